#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bankgcn/model.hpp"

namespace bankgcn {

/// One tensor per trainable tensor of ModelParams, same shapes.
struct Gradients {
    std::vector<LayerGradients> layers;
    Matrix head_W;
    Vector head_b;

    static Gradients zeros_like(const ModelParams& params);
};

/// Flat view of one parameter (or gradient) tensor.
struct TensorSlot {
    std::string name;
    double* data = nullptr;
    Index size = 0;
    bool is_filter = false;
};

/// Parameter and gradient slots enumerate tensors in the same order.
std::vector<TensorSlot> parameter_slots(ModelParams& params);
std::vector<TensorSlot> gradient_slots(Gradients& grads);

struct LossAndGradients {
    Objective objective;
    Gradients grads;
};

/// Objective and its exact gradient (filter gradients stay zero when filters are frozen).
/// Throws TrainingFault on a non-finite objective or gradient.
LossAndGradients loss_and_gradients(const ModelParams& params, const Batch& b);

/// (f(x + h) - f(x - h)) / 2h.
double central_difference(const std::function<double(double)>& f, double x, double step);

struct FdOptions {
    double step = 1e-5;
    double tolerance = 1e-4;
    std::size_t min_coordinates = 200;
    std::uint64_t seed = 0;
    /// Harness self-test: add 1e-2 to the analytic gradient of the first sampled coordinate.
    bool inject_fault = false;
};

struct FdCoordinate {
    std::string tensor;
    Index index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct FdReport {
    bool passed = false;
    std::size_t checked = 0;
    std::size_t resampled = 0;
    std::size_t tensors_covered = 0;
    double max_rel_error = 0.0;
    std::vector<FdCoordinate> failures;

    std::string describe() const;
};

/// Compares analytic gradients against central differences on a random sample of
/// coordinates covering every trainable tensor. Coordinates whose +-step
/// perturbation changes a ReLU pattern, a readout argmax or a diversity argmax
/// pair are resampled. Relative error is |g - g_fd| / max(1, |g_fd|).
FdReport finite_difference_check(const ModelParams& params, const Batch& b, const FdOptions& options = {});

struct LrDecay {
    double factor = 0.1;
    int plateau_patience = 20;
    double min_lr = 1e-5;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    int max_epochs = 500;
    int patience = 30;
    double weight_decay = 0.0;
    double gamma = 0.0;
    std::uint64_t seed = 0;
    std::optional<LrDecay> lr_decay;
};

void validate(const TrainConfig& config);

struct AdamState {
    std::vector<Vector> m;
    std::vector<Vector> v;
    std::int64_t step = 0;

    static AdamState for_params(const ModelParams& params);
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// One Adam update on a flat tensor. `step` is the 1-based step count used for
/// bias correction. When `decay` is set, theta is first scaled by (1 - lr * weight_decay).
void adam_update(std::span<double> theta, std::span<const double> grad, Vector& m, Vector& v, std::int64_t step,
                 double lr, double weight_decay, bool decay);

/// Adam over all trainable tensors. Weight decay skips filter coefficients;
/// frozen filters are not touched.
void adam_step(AdamState& state, ModelParams& params, Gradients& grads, double lr, double weight_decay);

struct HistoryRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double omega = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
    double lr = 0.0;
    double elapsed_s = 0.0;
};

struct TrainResult {
    ModelParams best_params;
    std::vector<HistoryRecord> history;
    int best_epoch = 0;
    double best_val_acc = 0.0;
    double best_val_loss = 0.0;
};

using EpochCallback = std::function<void(const HistoryRecord&)>;

/// Seeded mini-batch Adam with early stopping on validation accuracy
/// (ties broken by lower validation loss). Returns the best-validation parameters.
TrainResult train(const ModelParams& init, std::span<const Graph> train_set, std::span<const Graph> val_set,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

struct Evaluation {
    double accuracy = 0.0;
    double mean_loss = 0.0;
    /// confusion(true, predicted)
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> confusion;
};

Evaluation evaluate(const ModelParams& params, std::span<const Graph> graphs, std::size_t chunk = 256);

}  // namespace bankgcn
