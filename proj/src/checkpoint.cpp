#include "bankgcn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace bankgcn {

namespace {

constexpr char kMagic[4] = {'B', 'G', 'C', 'N'};

template <typename T>
void put(std::string& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes, bytes + sizeof(T));
    }
    out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class Reader {
public:
    explicit Reader(const std::string& bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        unsigned char raw[sizeof(T)];
        std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) {
            std::reverse(raw, raw + sizeof(T));
        }
        pos_ += sizeof(T);
        T value;
        std::memcpy(&value, raw, sizeof(T));
        return value;
    }

    std::string get_bytes(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw FormatError("checkpoint truncated");
    }

    const std::string& bytes_;
    std::size_t pos_ = 0;
};

NamedTensor from_matrix(std::string name, const Matrix& m) {
    NamedTensor t{std::move(name), {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())}, {}};
    t.data.reserve(static_cast<std::size_t>(m.size()));
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) t.data.push_back(m(r, c));
    return t;
}

NamedTensor from_vector(std::string name, const Vector& v) {
    return {std::move(name), {static_cast<std::uint64_t>(v.size())}, std::vector<double>(v.data(), v.data() + v.size())};
}

NamedTensor scalar(std::string name, double value) {
    return {std::move(name), {}, {value}};
}

class TensorTable {
public:
    explicit TensorTable(std::vector<NamedTensor> tensors) {
        for (auto& t : tensors) {
            std::string name = t.name;
            table_.emplace(std::move(name), std::move(t));
        }
    }

    const NamedTensor& at(const std::string& name) const {
        auto it = table_.find(name);
        if (it == table_.end()) throw FormatError("checkpoint missing tensor '" + name + "'");
        return it->second;
    }

    double scalar(const std::string& name) const {
        const auto& t = at(name);
        if (!t.dims.empty() || t.data.size() != 1) throw FormatError("tensor '" + name + "' is not a scalar");
        return t.data[0];
    }

    Matrix matrix(const std::string& name) const {
        const auto& t = at(name);
        if (t.dims.size() != 2) throw FormatError("tensor '" + name + "' is not rank 2");
        Matrix m(static_cast<Index>(t.dims[0]), static_cast<Index>(t.dims[1]));
        std::size_t i = 0;
        for (Index r = 0; r < m.rows(); ++r)
            for (Index c = 0; c < m.cols(); ++c) m(r, c) = t.data[i++];
        return m;
    }

    Vector vector(const std::string& name) const {
        const auto& t = at(name);
        if (t.dims.size() != 1) throw FormatError("tensor '" + name + "' is not rank 1");
        return Eigen::Map<const Vector>(t.data.data(), static_cast<Index>(t.data.size()));
    }

private:
    std::map<std::string, NamedTensor> table_;
};

std::string layer_key(std::size_t l, const std::string& what) {
    return "layer" + std::to_string(l) + "." + what;
}

}  // namespace

std::string encode_tensors(const std::vector<NamedTensor>& tensors) {
    std::string out(kMagic, 4);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
        out += t.name;
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
        for (auto d : t.dims) put<std::uint64_t>(out, d);
        for (double v : t.data) put<double>(out, v);
    }
    return out;
}

std::vector<NamedTensor> decode_tensors(const std::string& bytes) {
    if (bytes.size() < 4 || bytes.compare(0, 4, kMagic, 4) != 0) {
        throw FormatError("not a checkpoint: bad magic bytes");
    }
    Reader in(bytes);
    in.get_bytes(4);
    const auto version = in.get<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
    }
    const auto count = in.get<std::uint32_t>();
    std::vector<NamedTensor> tensors;
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor t;
        t.name = in.get_bytes(in.get<std::uint32_t>());
        const auto rank = in.get<std::uint32_t>();
        if (rank > 8) throw FormatError("tensor '" + t.name + "' has implausible rank");
        std::uint64_t elements = 1;
        for (std::uint32_t r = 0; r < rank; ++r) {
            t.dims.push_back(in.get<std::uint64_t>());
            elements *= t.dims.back();
        }
        if (elements > bytes.size()) throw FormatError("tensor '" + t.name + "' larger than file");
        t.data.reserve(elements);
        for (std::uint64_t e = 0; e < elements; ++e) t.data.push_back(in.get<double>());
        tensors.push_back(std::move(t));
    }
    if (!in.done()) throw FormatError("trailing bytes after last tensor");
    return tensors;
}

std::string encode_checkpoint(const ModelParams& params) {
    std::vector<NamedTensor> tensors;
    tensors.push_back(scalar("meta.gamma", params.gamma));
    tensors.push_back(scalar("meta.frozen_filters", params.frozen_filters ? 1.0 : 0.0));
    tensors.push_back(scalar("meta.num_layers", static_cast<double>(params.layers.size())));
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        Vector shape(4);
        shape << static_cast<double>(layer.input_dim()), static_cast<double>(layer.output_dim()),
            static_cast<double>(layer.subspaces()), static_cast<double>(layer.order());
        tensors.push_back(from_vector(layer_key(l, "shape"), shape));
        for (int p = 0; p < layer.subspaces(); ++p) {
            tensors.push_back(from_matrix(layer_key(l, "W" + std::to_string(p)), layer.proj_W[p]));
            tensors.push_back(from_vector(layer_key(l, "b" + std::to_string(p)), layer.proj_b[p]));
            tensors.push_back(from_vector(layer_key(l, "alpha" + std::to_string(p)), layer.filters[p].alpha));
        }
    }
    tensors.push_back(from_matrix("head.W", params.head_W));
    tensors.push_back(from_vector("head.b", params.head_b));
    return encode_tensors(tensors);
}

ModelParams decode_checkpoint(const std::string& bytes) {
    const TensorTable table(decode_tensors(bytes));
    ModelParams params;
    params.gamma = table.scalar("meta.gamma");
    params.frozen_filters = table.scalar("meta.frozen_filters") != 0.0;
    const auto num_layers = static_cast<std::size_t>(table.scalar("meta.num_layers"));
    for (std::size_t l = 0; l < num_layers; ++l) {
        const Vector shape = table.vector(layer_key(l, "shape"));
        if (shape.size() != 4) throw FormatError("bad shape record for layer " + std::to_string(l));
        const int s = static_cast<int>(shape[2]);
        BankLayerParams layer;
        for (int p = 0; p < s; ++p) {
            layer.proj_W.push_back(table.matrix(layer_key(l, "W" + std::to_string(p))));
            layer.proj_b.push_back(table.vector(layer_key(l, "b" + std::to_string(p))));
            layer.filters.emplace_back(table.vector(layer_key(l, "alpha" + std::to_string(p))));
        }
        if (layer.input_dim() != static_cast<Index>(shape[0]) || layer.output_dim() != static_cast<Index>(shape[1]) ||
            layer.order() != static_cast<int>(shape[3])) {
            throw FormatError("layer " + std::to_string(l) + " tensors disagree with its shape record");
        }
        params.layers.push_back(std::move(layer));
    }
    params.head_W = table.matrix("head.W");
    params.head_b = table.vector("head.b");
    try {
        validate(params);
    } catch (const ConstructionError& e) {
        throw FormatError(std::string("checkpoint holds an inconsistent model: ") + e.what());
    }
    return params;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
    write_file_atomic(path, encode_checkpoint(params));
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(read_file(path));
}

}  // namespace bankgcn
