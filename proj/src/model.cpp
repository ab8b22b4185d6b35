#include "bankgcn/model.hpp"

#include <cmath>
#include <string>

namespace bankgcn {

Index ModelParams::readout_dim() const noexcept {
    Index dim = 0;
    for (const auto& layer : layers) dim += 2 * layer.output_dim();
    return dim;
}

void validate(const ModelParams& params) {
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        validate(params.layers[l]);
        if (l > 0 && params.layers[l].input_dim() != params.layers[l - 1].output_dim()) {
            throw ConstructionError("model: layer " + std::to_string(l) + " expects " +
                                    std::to_string(params.layers[l].input_dim()) + " channels but layer " +
                                    std::to_string(l - 1) + " produces " +
                                    std::to_string(params.layers[l - 1].output_dim()));
        }
    }
    if (params.head_b.size() < 1) {
        throw ConstructionError("model: need at least one class");
    }
    if (params.head_W.cols() != params.head_b.size() ||
        (!params.layers.empty() && params.head_W.rows() != params.readout_dim())) {
        throw ConstructionError("model: head shape does not match readout width");
    }
    if (!(params.gamma >= 0.0) || !std::isfinite(params.gamma)) {
        throw ConstructionError("model: gamma must be finite and non-negative");
    }
    if (!params.head_W.allFinite() || !params.head_b.allFinite()) {
        throw ConstructionError("model: non-finite head parameter");
    }
}

namespace {

void init_head(ModelParams& params, int num_classes, std::mt19937_64& rng) {
    const Index rows = params.readout_dim();
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + num_classes));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    params.head_W = Matrix(rows, num_classes).unaryExpr([&](double) { return bound * unit(rng); });
    params.head_b = Vector::Zero(num_classes);
}

void check_spec(const ModelSpec& spec) {
    if (spec.input_dim < 1) throw ConstructionError("model: input width must be positive");
    if (spec.num_classes < 1) throw ConstructionError("model: need at least one class");
    if (!(spec.gamma >= 0.0)) throw ConstructionError("model: gamma must be non-negative");
}

}  // namespace

ModelParams init_model(const ModelSpec& spec, std::mt19937_64& rng) {
    check_spec(spec);
    ModelParams params;
    params.gamma = spec.gamma;
    Index d_in = spec.input_dim;
    for (Index d_out : spec.widths) {
        const int s = effective_subspaces(d_in, d_out, spec.subspaces);
        params.layers.push_back(init_bank_layer(d_in, d_out, s, spec.order, rng));
        d_in = d_out;
    }
    init_head(params, spec.num_classes, rng);
    return params;
}

ModelParams frozen_lowpass_model(const ModelSpec& spec, std::mt19937_64& rng) {
    check_spec(spec);
    const int order = spec.order < 1 ? 1 : spec.order;
    ModelParams params;
    params.gamma = spec.gamma;
    params.frozen_filters = true;
    Index d_in = spec.input_dim;
    for (Index d_out : spec.widths) {
        BankLayerParams layer = init_bank_layer(d_in, d_out, 1, order, rng);
        layer.filters[0].alpha.setZero();
        layer.filters[0].alpha[0] = 1.0;
        layer.filters[0].alpha[1] = -1.0;
        params.layers.push_back(std::move(layer));
        d_in = d_out;
    }
    init_head(params, spec.num_classes, rng);
    return params;
}

namespace {

Matrix readout_impl(std::span<const Matrix> layer_outputs, const Batch& b,
                    std::vector<Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>>* argmax_rows) {
    Index dim = 0;
    for (const Matrix& x : layer_outputs) {
        if (x.rows() != b.merged.num_nodes()) {
            throw DimensionError("readout: layer output has " + std::to_string(x.rows()) + " rows, batch has " +
                                 std::to_string(b.merged.num_nodes()) + " nodes");
        }
        dim += 2 * x.cols();
    }
    const Index graphs = static_cast<Index>(b.size());
    Matrix out(graphs, dim);
    if (argmax_rows) argmax_rows->clear();
    Index col = 0;
    for (const Matrix& x : layer_outputs) {
        const Index w = x.cols();
        Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> arg(graphs, w);
        for (Index k = 0; k < graphs; ++k) {
            const Index start = b.offsets[static_cast<std::size_t>(k)];
            const Index count = b.nodes_of(static_cast<std::size_t>(k));
            const auto block = x.middleRows(start, count);
            out.block(k, col, 1, w) = block.colwise().mean();
            for (Index c = 0; c < w; ++c) {
                Index best = 0;
                for (Index r = 1; r < count; ++r) {
                    if (block(r, c) > block(best, c)) best = r;
                }
                out(k, col + w + c) = block(best, c);
                arg(k, c) = start + best;
            }
        }
        if (argmax_rows) argmax_rows->push_back(std::move(arg));
        col += 2 * w;
    }
    return out;
}

}  // namespace

Matrix readout(std::span<const Matrix> layer_outputs, const Batch& b) {
    return readout_impl(layer_outputs, b, nullptr);
}

Vector softmax(const Vector& logits) {
    const double top = logits.maxCoeff();
    Vector e = (logits.array() - top).exp().matrix();
    return e / e.sum();
}

Prediction make_prediction(const Vector& logits) {
    Prediction p;
    p.logits = logits;
    p.probabilities = softmax(logits);
    Index best = 0;
    logits.maxCoeff(&best);
    p.predicted_class = static_cast<int>(best);
    return p;
}

Matrix model_logits(const ModelParams& params, const Batch& b, ForwardCache* cache) {
    if (b.merged.feature_dim() != params.input_dim() && !params.layers.empty()) {
        throw DimensionError("model expects " + std::to_string(params.input_dim()) + " input features, batch has " +
                             std::to_string(b.merged.feature_dim()));
    }
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.layers.assign(params.layers.size(), BankLayerCache{});
    c.layer_outputs.clear();
    const Matrix* x = &b.merged.features();
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        c.layer_outputs.push_back(bank_forward(params.layers[l], b.merged, *x, c.layers[l]));
        x = &c.layer_outputs.back();
    }
    if (params.layers.empty()) {
        c.graph_repr = Matrix::Zero(static_cast<Index>(b.size()), params.head_W.rows());
    } else {
        c.graph_repr = readout_impl(c.layer_outputs, b, &c.argmax_rows);
    }
    c.logits = c.graph_repr * params.head_W;
    c.logits.rowwise() += params.head_b.transpose();
    return c.logits;
}

std::vector<Prediction> model_forward(const ModelParams& params, const Batch& b) {
    const Matrix logits = model_logits(params, b);
    std::vector<Prediction> out;
    out.reserve(b.size());
    for (Index k = 0; k < logits.rows(); ++k) {
        out.push_back(make_prediction(logits.row(k).transpose()));
    }
    return out;
}

double cross_entropy(const Vector& logits, int label) {
    if (label < 0 || label >= logits.size()) {
        throw DomainError("cross_entropy: label " + std::to_string(label) + " outside [0, " +
                          std::to_string(logits.size()) + ")");
    }
    const double top = logits.maxCoeff();
    const double lse = top + std::log((logits.array() - top).exp().sum());
    return lse - logits[label];
}

double cross_entropy(const Prediction& pred, int label) {
    return cross_entropy(pred.logits, label);
}

double model_omega(const ModelParams& params) {
    double omega = 0.0;
    for (const auto& layer : params.layers) omega += diversity_penalty(layer.filters);
    return omega;
}

Objective objective(const ModelParams& params, const Batch& b) {
    const Matrix logits = model_logits(params, b);
    double loss = 0.0;
    for (Index k = 0; k < logits.rows(); ++k) {
        loss += cross_entropy(Vector(logits.row(k).transpose()), b.labels[static_cast<std::size_t>(k)]);
    }
    Objective obj;
    obj.loss = loss / static_cast<double>(logits.rows());
    obj.omega = model_omega(params);
    obj.total = obj.loss + params.gamma * obj.omega;
    return obj;
}

std::int64_t model_param_count(const ModelParams& params, ParamConvention convention) {
    std::int64_t total = params.head_W.size() + params.head_b.size();
    for (const auto& layer : params.layers) {
        total += bank_layer_param_count(layer, convention);
        if (params.frozen_filters) {
            total -= convention == ParamConvention::PerSubspace ? layer.subspaces() * (layer.order() + 1)
                                                                : layer.order() + 1;
        }
    }
    return total;
}

}  // namespace bankgcn
