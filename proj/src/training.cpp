#include "bankgcn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace bankgcn {

Gradients Gradients::zeros_like(const ModelParams& params) {
    Gradients g;
    for (const auto& layer : params.layers) g.layers.push_back(LayerGradients::zeros_like(layer));
    g.head_W = Matrix::Zero(params.head_W.rows(), params.head_W.cols());
    g.head_b = Vector::Zero(params.head_b.size());
    return g;
}

namespace {

TensorSlot slot(std::string name, Eigen::Ref<Matrix> m, bool is_filter = false) {
    return {std::move(name), m.data(), m.size(), is_filter};
}

TensorSlot slot(std::string name, Vector& v, bool is_filter = false) {
    return {std::move(name), v.data(), v.size(), is_filter};
}

}  // namespace

std::vector<TensorSlot> parameter_slots(ModelParams& params) {
    std::vector<TensorSlot> slots;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& layer = params.layers[l];
        const std::string prefix = "layer" + std::to_string(l) + ".";
        for (int p = 0; p < layer.subspaces(); ++p) {
            const std::string sp = std::to_string(p);
            slots.push_back(slot(prefix + "W" + sp, layer.proj_W[p]));
            slots.push_back(slot(prefix + "b" + sp, layer.proj_b[p]));
            slots.push_back(slot(prefix + "alpha" + sp, layer.filters[p].alpha, true));
        }
    }
    slots.push_back(slot("head.W", params.head_W));
    slots.push_back(slot("head.b", params.head_b));
    return slots;
}

std::vector<TensorSlot> gradient_slots(Gradients& grads) {
    std::vector<TensorSlot> slots;
    for (std::size_t l = 0; l < grads.layers.size(); ++l) {
        auto& layer = grads.layers[l];
        const std::string prefix = "layer" + std::to_string(l) + ".";
        for (std::size_t p = 0; p < layer.proj_W.size(); ++p) {
            const std::string sp = std::to_string(p);
            slots.push_back(slot(prefix + "W" + sp, layer.proj_W[p]));
            slots.push_back(slot(prefix + "b" + sp, layer.proj_b[p]));
            slots.push_back(slot(prefix + "alpha" + sp, layer.alpha[p], true));
        }
    }
    slots.push_back(slot("head.W", grads.head_W));
    slots.push_back(slot("head.b", grads.head_b));
    return slots;
}

LossAndGradients loss_and_gradients(const ModelParams& params, const Batch& b) {
    if (b.size() == 0) {
        throw DimensionError("loss_and_gradients: empty batch");
    }
    ForwardCache cache;
    const Matrix logits = model_logits(params, b, &cache);
    const auto graphs = static_cast<Index>(b.size());
    const double inv_graphs = 1.0 / static_cast<double>(graphs);

    LossAndGradients out;
    out.grads = Gradients::zeros_like(params);
    Matrix grad_logits(graphs, logits.cols());
    double loss = 0.0;
    for (Index k = 0; k < graphs; ++k) {
        const Vector row = logits.row(k).transpose();
        const int label = b.labels[static_cast<std::size_t>(k)];
        loss += cross_entropy(row, label);
        Vector g = softmax(row);
        g[label] -= 1.0;
        grad_logits.row(k) = inv_graphs * g.transpose();
    }
    out.objective.loss = loss * inv_graphs;
    out.objective.omega = model_omega(params);
    out.objective.total = out.objective.loss + params.gamma * out.objective.omega;
    if (!std::isfinite(out.objective.total)) {
        std::ostringstream msg;
        msg << "non-finite objective (loss " << out.objective.loss << ", omega " << out.objective.omega << ")";
        throw TrainingFault(msg.str());
    }

    out.grads.head_W = cache.graph_repr.transpose() * grad_logits;
    out.grads.head_b = grad_logits.colwise().sum().transpose();
    const Matrix grad_repr = grad_logits * params.head_W.transpose();

    // Scatter readout gradients onto node rows, then run the stack backwards.
    const std::size_t num_layers = params.layers.size();
    std::vector<Matrix> grad_outputs(num_layers);
    Index col = 0;
    for (std::size_t l = 0; l < num_layers; ++l) {
        const Index w = cache.layer_outputs[l].cols();
        Matrix& g = grad_outputs[l];
        g = Matrix::Zero(cache.layer_outputs[l].rows(), w);
        for (Index k = 0; k < graphs; ++k) {
            const Index start = b.offsets[static_cast<std::size_t>(k)];
            const Index count = b.nodes_of(static_cast<std::size_t>(k));
            g.middleRows(start, count).rowwise() += grad_repr.row(k).segment(col, w) / static_cast<double>(count);
            for (Index c = 0; c < w; ++c) {
                g(cache.argmax_rows[l](k, c), c) += grad_repr(k, col + w + c);
            }
        }
        col += 2 * w;
    }
    for (std::size_t l = num_layers; l-- > 0;) {
        Matrix grad_input =
            bank_backward(params.layers[l], b.merged, cache.layers[l], grad_outputs[l], out.grads.layers[l]);
        if (l > 0) grad_outputs[l - 1] += grad_input;
    }

    for (std::size_t l = 0; l < num_layers; ++l) {
        auto& alpha = out.grads.layers[l].alpha;
        if (params.frozen_filters) {
            for (auto& a : alpha) a.setZero();
        } else {
            diversity_backward(params.layers[l].filters, params.gamma, alpha);
        }
    }

    for (const auto& s : gradient_slots(out.grads)) {
        if (!Eigen::Map<const Vector>(s.data, s.size).allFinite()) {
            throw TrainingFault("non-finite gradient in " + s.name);
        }
    }
    return out;
}

double central_difference(const std::function<double(double)>& f, double x, double step) {
    return (f(x + step) - f(x - step)) / (2.0 * step);
}

namespace {

// Everything that selects a branch of the piecewise-smooth objective.
struct BranchSignature {
    std::vector<char> active;
    std::vector<Index> argmax;
    std::vector<int> omega_pairs;

    bool operator==(const BranchSignature&) const = default;
};

BranchSignature branch_signature(const ModelParams& params, const Batch& b) {
    ForwardCache cache;
    model_logits(params, b, &cache);
    BranchSignature sig;
    for (const auto& layer : cache.layers) {
        const Matrix& h = layer.pre_activation;
        for (Index i = 0; i < h.size(); ++i) sig.active.push_back(h.data()[i] > 0.0 ? 1 : 0);
        for (Index i = 0; i < layer.row_norms.size(); ++i) sig.active.push_back(layer.row_norms[i] > 0.0 ? 1 : 0);
    }
    for (const auto& arg : cache.argmax_rows) sig.argmax.insert(sig.argmax.end(), arg.data(), arg.data() + arg.size());
    if (!params.frozen_filters) {
        for (const auto& layer : params.layers) {
            const auto am = diversity_argmax(layer.filters);
            sig.omega_pairs.push_back(am.p);
            sig.omega_pairs.push_back(am.q);
        }
    }
    return sig;
}

}  // namespace

std::string FdReport::describe() const {
    std::ostringstream out;
    out << (passed ? "PASS" : "FAIL") << ": " << checked << " coordinates over " << tensors_covered
        << " tensors, max relative error " << max_rel_error << ", resampled " << resampled;
    for (const auto& f : failures) {
        out << "\n  " << f.tensor << "[" << f.index << "] analytic " << f.analytic << " numeric " << f.numeric
            << " rel " << f.rel_error;
    }
    return out.str();
}

FdReport finite_difference_check(const ModelParams& params, const Batch& b, const FdOptions& options) {
    if (!(options.step >= 1e-7 && options.step <= 1e-3)) {
        throw DomainError("finite_difference_check: step must lie in [1e-7, 1e-3]");
    }
    LossAndGradients base = loss_and_gradients(params, b);
    const BranchSignature base_sig = branch_signature(params, b);

    ModelParams work = params;
    std::vector<TensorSlot> param_slots = parameter_slots(work);
    std::vector<TensorSlot> grad_slots = gradient_slots(base.grads);

    std::vector<std::size_t> trainable;
    Index total = 0;
    for (std::size_t t = 0; t < param_slots.size(); ++t) {
        if (param_slots[t].is_filter && params.frozen_filters) continue;
        trainable.push_back(t);
        total += param_slots[t].size;
    }

    std::mt19937_64 rng(options.seed);
    std::set<std::pair<std::size_t, Index>> visited;
    FdReport report;
    bool fault_pending = options.inject_fault;

    // Returns false when the coordinate sits too close to a kink.
    auto check = [&](std::size_t t, Index i) {
        double& theta = param_slots[t].data[i];
        const double original = theta;
        theta = original + options.step;
        const double plus = objective(work, b).total;
        const bool plus_same = branch_signature(work, b) == base_sig;
        theta = original - options.step;
        const double minus = objective(work, b).total;
        const bool minus_same = branch_signature(work, b) == base_sig;
        theta = original;
        if (!plus_same || !minus_same) {
            ++report.resampled;
            return false;
        }
        const double numeric = (plus - minus) / (2.0 * options.step);
        double analytic = grad_slots[t].data[i];
        if (fault_pending) {
            analytic += 1e-2;
            fault_pending = false;
        }
        const double rel = std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
        report.max_rel_error = std::max(report.max_rel_error, rel);
        ++report.checked;
        if (rel > options.tolerance) {
            report.failures.push_back({param_slots[t].name, i, analytic, numeric, rel});
        }
        return true;
    };

    constexpr int kMaxAttemptsPerTensor = 50;
    for (std::size_t t : trainable) {
        std::uniform_int_distribution<Index> pick(0, param_slots[t].size - 1);
        for (int attempt = 0; attempt < kMaxAttemptsPerTensor; ++attempt) {
            const Index i = pick(rng);
            if (!visited.insert({t, i}).second) continue;
            if (check(t, i)) {
                ++report.tensors_covered;
                break;
            }
        }
    }

    const std::size_t target = std::min<std::size_t>(options.min_coordinates, static_cast<std::size_t>(total));
    std::uniform_int_distribution<Index> pick_global(0, std::max<Index>(total - 1, 0));
    std::size_t attempts = 0;
    while (report.checked < target && visited.size() < static_cast<std::size_t>(total) && attempts < 20 * target) {
        ++attempts;
        Index flat = pick_global(rng);
        std::size_t t = 0;
        for (std::size_t cand : trainable) {
            if (flat < param_slots[cand].size) {
                t = cand;
                break;
            }
            flat -= param_slots[cand].size;
        }
        if (!visited.insert({t, flat}).second) continue;
        check(t, flat);
    }

    report.passed = report.failures.empty() && report.checked >= target && report.tensors_covered == trainable.size();
    return report;
}

void validate(const TrainConfig& config) {
    if (!(config.learning_rate > 0.0)) throw ConfigError("train.learning_rate must be positive");
    if (config.batch_size < 1) throw ConfigError("train.batch_size must be positive");
    if (config.max_epochs < 1) throw ConfigError("train.max_epochs must be positive");
    if (config.patience < 1) throw ConfigError("train.patience must be positive");
    if (!(config.weight_decay >= 0.0)) throw ConfigError("train.weight_decay must be non-negative");
    if (!(config.gamma >= 0.0)) throw ConfigError("train.gamma must be non-negative");
    if (config.lr_decay) {
        const auto& d = *config.lr_decay;
        if (!(d.factor > 0.0 && d.factor < 1.0)) throw ConfigError("train.lr_decay.factor must lie in (0, 1)");
        if (d.plateau_patience < 1) throw ConfigError("train.lr_decay.plateau_patience must be positive");
        if (!(d.min_lr > 0.0)) throw ConfigError("train.lr_decay.min_lr must be positive");
    }
}

AdamState AdamState::for_params(const ModelParams& params) {
    ModelParams copy = params;
    AdamState state;
    for (const auto& s : parameter_slots(copy)) {
        state.m.push_back(Vector::Zero(s.size));
        state.v.push_back(Vector::Zero(s.size));
    }
    return state;
}

void adam_update(std::span<double> theta, std::span<const double> grad, Vector& m, Vector& v, std::int64_t step,
                 double lr, double weight_decay, bool decay) {
    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (decay) theta[i] *= 1.0 - lr * weight_decay;
        const auto k = static_cast<Index>(i);
        m[k] = kAdamBeta1 * m[k] + (1.0 - kAdamBeta1) * grad[i];
        v[k] = kAdamBeta2 * v[k] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
        theta[i] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + kAdamEpsilon);
    }
}

void adam_step(AdamState& state, ModelParams& params, Gradients& grads, double lr, double weight_decay) {
    auto p = parameter_slots(params);
    auto g = gradient_slots(grads);
    if (p.size() != state.m.size() || g.size() != p.size()) {
        throw DimensionError("adam_step: optimizer state does not match parameters");
    }
    ++state.step;
    for (std::size_t t = 0; t < p.size(); ++t) {
        if (p[t].is_filter && params.frozen_filters) continue;
        adam_update({p[t].data, static_cast<std::size_t>(p[t].size)}, {g[t].data, static_cast<std::size_t>(g[t].size)},
                    state.m[t], state.v[t], state.step, lr, weight_decay, !p[t].is_filter && weight_decay > 0.0);
    }
}

Evaluation evaluate(const ModelParams& params, std::span<const Graph> graphs, std::size_t chunk) {
    if (graphs.empty()) throw DimensionError("evaluate: empty graph set");
    const int classes = params.num_classes();
    Evaluation ev;
    ev.confusion = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(classes, classes);
    std::size_t correct = 0;
    double loss = 0.0;
    std::vector<std::size_t> members;
    for (std::size_t start = 0; start < graphs.size(); start += chunk) {
        members.clear();
        for (std::size_t k = start; k < std::min(graphs.size(), start + chunk); ++k) members.push_back(k);
        const Batch b = batch_graphs(graphs, members);
        const Matrix logits = model_logits(params, b);
        for (Index k = 0; k < logits.rows(); ++k) {
            const int label = b.labels[static_cast<std::size_t>(k)];
            const Vector row = logits.row(k).transpose();
            loss += cross_entropy(row, label);
            Index predicted = 0;
            row.maxCoeff(&predicted);
            ++ev.confusion(label, predicted);
            if (predicted == label) ++correct;
        }
    }
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(graphs.size());
    ev.mean_loss = loss / static_cast<double>(graphs.size());
    return ev;
}

TrainResult train(const ModelParams& init, std::span<const Graph> train_set, std::span<const Graph> val_set,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
    validate(config);
    if (train_set.empty() || val_set.empty()) {
        throw ConfigError("train: training and validation splits must be non-empty");
    }
    ModelParams params = init;
    params.gamma = config.gamma;
    validate(params);

    const auto started = std::chrono::steady_clock::now();
    AdamState state = AdamState::for_params(params);
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    result.best_params = params;
    result.best_val_acc = -1.0;
    double lr = config.learning_rate;
    int epochs_since_best = 0;
    double plateau_best_loss = std::numeric_limits<double>::infinity();
    int epochs_since_loss_improved = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const Batch batch = batch_graphs(train_set, std::span<const std::size_t>(order).subspan(start, end - start));
            LossAndGradients lg = loss_and_gradients(params, batch);
            loss_sum += lg.objective.loss * static_cast<double>(end - start);
            adam_step(state, params, lg.grads, lr, config.weight_decay);
        }

        const Evaluation val = evaluate(params, val_set);
        HistoryRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        rec.omega = model_omega(params);
        rec.val_loss = val.mean_loss;
        rec.val_acc = val.accuracy;
        rec.lr = lr;
        rec.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        result.history.push_back(rec);

        const bool improved = val.accuracy > result.best_val_acc ||
                              (val.accuracy == result.best_val_acc && val.mean_loss < result.best_val_loss);
        if (improved) {
            result.best_params = params;
            result.best_epoch = epoch;
            result.best_val_acc = val.accuracy;
            result.best_val_loss = val.mean_loss;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
        }

        if (config.lr_decay) {
            if (val.mean_loss < plateau_best_loss) {
                plateau_best_loss = val.mean_loss;
                epochs_since_loss_improved = 0;
            } else if (++epochs_since_loss_improved >= config.lr_decay->plateau_patience) {
                lr = std::max(lr * config.lr_decay->factor, config.lr_decay->min_lr);
                epochs_since_loss_improved = 0;
            }
        }

        if (on_epoch) on_epoch(rec);
        if (epochs_since_best >= config.patience) break;
    }
    return result;
}

}  // namespace bankgcn
