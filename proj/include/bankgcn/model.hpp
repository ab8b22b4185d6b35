#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "bankgcn/bank_layer.hpp"

namespace bankgcn {

/// Architecture choices for a BankGCN classifier.
struct ModelSpec {
    Index input_dim = 0;
    std::vector<Index> widths{64, 64, 64, 64};
    int subspaces = 8;
    int order = 2;
    int num_classes = 2;
    double gamma = 0.0;
};

/// Full trainable parameter set: convolution stack plus linear head.
struct ModelParams {
    std::vector<BankLayerParams> layers;
    Matrix head_W;  ///< (sum_l 2 d_{l+1}) x C
    Vector head_b;  ///< C
    double gamma = 0.0;
    /// Filter coefficients are constants (frozen low-pass baseline).
    bool frozen_filters = false;

    int num_classes() const noexcept { return static_cast<int>(head_b.size()); }
    Index input_dim() const noexcept { return layers.empty() ? head_W.rows() : layers.front().input_dim(); }
    Index readout_dim() const noexcept;
};

void validate(const ModelParams& params);

ModelParams init_model(const ModelSpec& spec, std::mt19937_64& rng);

/// Single-filter layers with alpha fixed to (1, -1, 0, ...), i.e. g(lambda) = 2 - lambda.
ModelParams frozen_lowpass_model(const ModelSpec& spec, std::mt19937_64& rng);

/// Per graph: concat over layers of (column mean, column max) of that graph's rows.
Matrix readout(std::span<const Matrix> layer_outputs, const Batch& b);

struct Prediction {
    Vector logits;
    Vector probabilities;
    int predicted_class = 0;
};

Vector softmax(const Vector& logits);
Prediction make_prediction(const Vector& logits);

/// Everything the reverse pass needs from one forward evaluation.
struct ForwardCache {
    std::vector<BankLayerCache> layers;
    std::vector<Matrix> layer_outputs;
    Matrix graph_repr;  ///< B x readout_dim
    Matrix logits;      ///< B x C
    /// argmax_rows[l](g, c): merged row holding the max of column c over graph g in layer l.
    std::vector<Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>> argmax_rows;
};

/// B x C logits; fills `cache` when given.
Matrix model_logits(const ModelParams& params, const Batch& b, ForwardCache* cache = nullptr);
std::vector<Prediction> model_forward(const ModelParams& params, const Batch& b);

/// -log softmax(logits)[label], via log-sum-exp.
double cross_entropy(const Vector& logits, int label);
double cross_entropy(const Prediction& pred, int label);

struct Objective {
    double total = 0.0;
    double loss = 0.0;
    double omega = 0.0;
};

/// Sum over layers of the per-layer diversity penalty.
double model_omega(const ModelParams& params);

/// loss = mean cross-entropy over the batch; total = loss + gamma * omega.
Objective objective(const ModelParams& params, const Batch& b);

/// Layer counts under `convention` plus head weights and bias. Frozen filters are not counted.
std::int64_t model_param_count(const ModelParams& params, ParamConvention convention);

}  // namespace bankgcn
