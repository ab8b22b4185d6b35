#include "bankgcn/config.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "bankgcn/checkpoint.hpp"

namespace bankgcn {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::pair<std::string, std::string> split_assignment(const std::string& text, const std::string& where) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    return {std::move(key), std::move(value)};
}

std::string render_double(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

class Reader {
public:
    explicit Reader(const KeyValues& kv) : kv_(kv) {
        for (const auto& [key, value] : kv) {
            (void)value;
            unknown_.insert(key);
        }
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    const std::string* raw(const std::string& key) {
        unknown_.erase(key);
        auto it = kv_.find(key);
        return it == kv_.end() ? nullptr : &it->second;
    }

    template <typename T>
    void integer(const std::string& key, T& out) {
        if (const std::string* v = raw(key)) {
            T value{};
            const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), value);
            if (ec != std::errc() || ptr != v->data() + v->size() || v->empty()) bad(key, *v, "an integer");
            out = value;
        }
    }

    void real(const std::string& key, double& out) {
        if (const std::string* v = raw(key)) {
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), value);
            if (ec != std::errc() || ptr != v->data() + v->size() || v->empty()) bad(key, *v, "a real number");
            out = value;
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const std::string* v = raw(key)) {
            if (*v == "true" || *v == "1") {
                out = true;
            } else if (*v == "false" || *v == "0") {
                out = false;
            } else {
                bad(key, *v, "true or false");
            }
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const std::string* v = raw(key)) out = *v;
    }

    void widths(const std::string& key, std::vector<Index>& out) {
        const std::string* v = raw(key);
        if (!v) return;
        std::vector<Index> parsed;
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            Index w = 0;
            const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), w);
            if (ec != std::errc() || ptr != item.data() + item.size() || item.empty()) {
                bad(key, *v, "a comma-separated list of integers");
            }
            parsed.push_back(w);
        }
        out = std::move(parsed);
    }

    void finish() const {
        if (!unknown_.empty()) throw ConfigError("unknown config key '" + *unknown_.begin() + "'");
    }

private:
    [[noreturn]] static void bad(const std::string& key, const std::string& value, const char* expected) {
        throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + value + "'");
    }

    const KeyValues& kv_;
    std::set<std::string> unknown_;
};

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        auto [key, value] = split_assignment(line, origin + ":" + std::to_string(number));
        kv[key] = value;
    }
    return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error&) {
        throw ConfigError("cannot read config file " + path.string());
    }
    return parse_key_values(text, path.string());
}

void apply_override(KeyValues& kv, const std::string& assignment) {
    auto [key, value] = split_assignment(assignment, "--set " + assignment);
    kv[key] = value;
}

RunConfig load_run_config(const KeyValues& kv) {
    RunConfig c;
    Reader r(kv);

    std::string source = "synthetic";
    r.text("dataset.source", source);
    if (source == "tu") {
        c.dataset.source = DatasetConfig::Source::Tu;
    } else if (source == "synthetic") {
        c.dataset.source = DatasetConfig::Source::Synthetic;
    } else {
        throw ConfigError("config key 'dataset.source': expected tu or synthetic, got '" + source + "'");
    }
    std::string dir;
    r.text("dataset.dir", dir);
    c.dataset.tu_dir = dir;
    r.text("dataset.name", c.dataset.tu_name);
    r.boolean("dataset.normalize", c.dataset.normalize);
    r.integer("dataset.synthetic.graphs", c.dataset.synthetic_graphs);
    r.integer("dataset.synthetic.nodes", c.dataset.synthetic_nodes);
    r.integer("dataset.synthetic.seed", c.dataset.synthetic_seed);
    r.real("dataset.synthetic.edge_probability", c.dataset.synthetic.edge_probability);
    r.real("dataset.synthetic.noise_sigma", c.dataset.synthetic.noise_sigma);
    r.integer("dataset.synthetic.band", c.dataset.synthetic.band);
    r.real("dataset.split.train", c.dataset.split[0]);
    r.real("dataset.split.val", c.dataset.split[1]);
    r.real("dataset.split.test", c.dataset.split[2]);

    r.widths("model.widths", c.model.widths);
    r.integer("model.subspaces", c.model.subspaces);
    r.integer("model.order", c.model.order);
    r.boolean("model.frozen_lowpass", c.model.frozen_lowpass);

    r.real("train.learning_rate", c.train.learning_rate);
    r.integer("train.batch_size", c.train.batch_size);
    r.integer("train.max_epochs", c.train.max_epochs);
    r.integer("train.patience", c.train.patience);
    r.real("train.weight_decay", c.train.weight_decay);
    r.real("train.gamma", c.train.gamma);
    r.integer("train.seed", c.train.seed);
    bool decay = false;
    r.boolean("train.lr_decay.enabled", decay);
    LrDecay schedule;
    r.real("train.lr_decay.factor", schedule.factor);
    r.integer("train.lr_decay.patience", schedule.plateau_patience);
    r.real("train.lr_decay.min_lr", schedule.min_lr);
    if (decay) c.train.lr_decay = schedule;

    std::string out;
    r.text("output.dir", out);
    if (!out.empty()) c.out_dir = out;
    r.integer("runs", c.runs);
    r.finish();

    validate(c);
    return c;
}

const std::vector<std::pair<std::string, std::string>>& config_keys() {
    static const std::vector<std::pair<std::string, std::string>> keys = [] {
        std::vector<std::pair<std::string, std::string>> out;
        std::istringstream in(render_run_config(RunConfig{}));
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find('=');
            out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        return out;
    }();
    return keys;
}

void validate(const RunConfig& c) {
    const auto& d = c.dataset;
    if (d.source == DatasetConfig::Source::Tu) {
        if (d.tu_dir.empty() || d.tu_name.empty()) {
            throw ConfigError("dataset.source = tu needs dataset.dir and dataset.name");
        }
    } else {
        if (d.synthetic_nodes < 8) throw ConfigError("dataset.synthetic.nodes must be at least 8");
        if (d.synthetic_graphs < 6) throw ConfigError("dataset.synthetic.graphs must be at least 6");
        if (d.synthetic.band < 1 || 2 * d.synthetic.band > d.synthetic_nodes) {
            throw ConfigError("dataset.synthetic.band must be in 1..nodes/2");
        }
        if (!(d.synthetic.edge_probability >= 0.0 && d.synthetic.edge_probability <= 1.0)) {
            throw ConfigError("dataset.synthetic.edge_probability must be in [0, 1]");
        }
        if (!(d.synthetic.noise_sigma >= 0.0)) throw ConfigError("dataset.synthetic.noise_sigma must be >= 0");
    }
    for (double ratio : d.split) {
        if (!(ratio >= 0.0)) throw ConfigError("dataset.split ratios must be non-negative");
    }
    if (std::abs(d.split[0] + d.split[1] + d.split[2] - 1.0) > 1e-9) {
        throw ConfigError("dataset.split ratios must sum to 1");
    }
    if (d.split[0] <= 0.0 || d.split[1] <= 0.0 || d.split[2] <= 0.0) {
        throw ConfigError("dataset.split ratios must all be positive");
    }

    const auto& m = c.model;
    if (m.widths.empty()) throw ConfigError("model.widths must list at least one layer");
    if (m.order < 1) throw ConfigError("model.order must be at least 1");
    if (m.subspaces < 1) throw ConfigError("model.subspaces must be at least 1");
    for (Index w : m.widths) {
        if (w < 1) throw ConfigError("model.widths entries must be positive");
        if (!m.frozen_lowpass && w % m.subspaces != 0) {
            throw ConfigError("model.widths entry " + std::to_string(w) + " is not divisible by model.subspaces = " +
                              std::to_string(m.subspaces));
        }
    }
    try {
        validate(c.train);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (c.runs < 1) throw ConfigError("runs must be at least 1");
    if (c.out_dir.empty()) throw ConfigError("output.dir must not be empty");
}

std::string render_run_config(const RunConfig& c) {
    KeyValues kv;
    const auto& d = c.dataset;
    kv["dataset.source"] = d.source == DatasetConfig::Source::Tu ? "tu" : "synthetic";
    kv["dataset.dir"] = d.tu_dir.string();
    kv["dataset.name"] = d.tu_name;
    kv["dataset.normalize"] = d.normalize ? "true" : "false";
    kv["dataset.synthetic.graphs"] = std::to_string(d.synthetic_graphs);
    kv["dataset.synthetic.nodes"] = std::to_string(d.synthetic_nodes);
    kv["dataset.synthetic.seed"] = std::to_string(d.synthetic_seed);
    kv["dataset.synthetic.edge_probability"] = render_double(d.synthetic.edge_probability);
    kv["dataset.synthetic.noise_sigma"] = render_double(d.synthetic.noise_sigma);
    kv["dataset.synthetic.band"] = std::to_string(d.synthetic.band);
    kv["dataset.split.train"] = render_double(d.split[0]);
    kv["dataset.split.val"] = render_double(d.split[1]);
    kv["dataset.split.test"] = render_double(d.split[2]);
    std::string widths;
    for (std::size_t i = 0; i < c.model.widths.size(); ++i) {
        widths += (i ? "," : "") + std::to_string(c.model.widths[i]);
    }
    kv["model.widths"] = widths;
    kv["model.subspaces"] = std::to_string(c.model.subspaces);
    kv["model.order"] = std::to_string(c.model.order);
    kv["model.frozen_lowpass"] = c.model.frozen_lowpass ? "true" : "false";
    kv["train.learning_rate"] = render_double(c.train.learning_rate);
    kv["train.batch_size"] = std::to_string(c.train.batch_size);
    kv["train.max_epochs"] = std::to_string(c.train.max_epochs);
    kv["train.patience"] = std::to_string(c.train.patience);
    kv["train.weight_decay"] = render_double(c.train.weight_decay);
    kv["train.gamma"] = render_double(c.train.gamma);
    kv["train.seed"] = std::to_string(c.train.seed);
    const LrDecay schedule = c.train.lr_decay.value_or(LrDecay{});
    kv["train.lr_decay.enabled"] = c.train.lr_decay ? "true" : "false";
    kv["train.lr_decay.factor"] = render_double(schedule.factor);
    kv["train.lr_decay.patience"] = std::to_string(schedule.plateau_patience);
    kv["train.lr_decay.min_lr"] = render_double(schedule.min_lr);
    kv["output.dir"] = c.out_dir.string();
    kv["runs"] = std::to_string(c.runs);

    std::string out;
    for (const auto& [key, value] : kv) out += key + " = " + value + "\n";
    return out;
}

Dataset load_dataset(const DatasetConfig& config) {
    Dataset ds;
    if (config.source == DatasetConfig::Source::Tu) {
        ds = parse_tu_dataset(config.tu_dir, config.tu_name);
        if (config.normalize) ds = normalize_attributes(ds);
    } else {
        ds = synthetic_spectral_dataset(config.synthetic_graphs, config.synthetic_nodes, config.synthetic_seed,
                                        config.synthetic);
    }
    return ds;
}

}  // namespace bankgcn
