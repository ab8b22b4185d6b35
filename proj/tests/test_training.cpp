#include <doctest.h>

#include "bankgcn/training.hpp"
#include "oracles.hpp"

using namespace bankgcn;

namespace {

ModelSpec spec_for(int s, int order, double gamma, Index d = 3, int classes = 3) {
    ModelSpec spec;
    spec.input_dim = d;
    spec.widths = {8, 8, 8, 8};
    spec.subspaces = s;
    spec.order = order;
    spec.num_classes = classes;
    spec.gamma = gamma;
    return spec;
}

std::vector<Graph> random_graphs(std::mt19937_64& rng, int count, Index nodes = 8) {
    std::vector<Graph> gs;
    for (int k = 0; k < count; ++k) gs.push_back(oracle::random_graph(rng, nodes, 0.4, 3, k % 3));
    return gs;
}

/// Two classes told apart by the sign of a constant node signal.
std::vector<Graph> separable(std::mt19937_64& rng, int count) {
    std::vector<Graph> gs;
    for (int k = 0; k < count; ++k) {
        const int label = k % 2;
        Graph g = oracle::random_graph(rng, 4 + static_cast<Index>(rng() % 5), 0.5, 2, label);
        Matrix x = Matrix::Constant(g.num_nodes(), 2, 0.0);
        x.col(0).setConstant(label == 0 ? 1.0 : -1.0);
        x.col(1) = oracle::random_matrix(rng, g.num_nodes(), 1) * 0.1;
        gs.push_back(with_features(g, x));
    }
    return gs;
}

}  // namespace

TEST_CASE("central difference harness on a parabola") {
    const double fd = central_difference([](double t) { return t * t; }, 1.0, 1e-5);
    CHECK(std::abs(fd - 2.0) < 1e-8);
}

TEST_CASE("zero model head bias gradient is p - y") {
    std::mt19937_64 rng(1);
    ModelParams p = init_model(spec_for(2, 2, 0.0), rng);
    for (auto& layer : p.layers) {
        for (auto& w : layer.proj_W) w.setZero();
        for (auto& f : layer.filters) f.alpha.setZero();
    }
    p.head_W.setZero();
    const auto gs = random_graphs(rng, 3);
    const LossAndGradients lg = loss_and_gradients(p, batch_graphs(gs));
    Vector expected = Vector::Constant(3, 1.0 / 3.0);
    for (const auto& g : gs) expected[g.label()] -= 1.0 / 3.0;
    CHECK((lg.grads.head_b - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(std::abs(lg.objective.total - objective(p, batch_graphs(gs)).total) < 1e-14);
}

TEST_CASE("duplicating every graph leaves the mean gradient unchanged") {
    std::mt19937_64 rng(2);
    const ModelParams p = init_model(spec_for(4, 2, 10.0), rng);
    const auto gs = random_graphs(rng, 3);
    std::vector<Graph> doubled = gs;
    doubled.insert(doubled.end(), gs.begin(), gs.end());
    LossAndGradients once = loss_and_gradients(p, batch_graphs(gs));
    LossAndGradients twice = loss_and_gradients(p, batch_graphs(doubled));
    CHECK(std::abs(once.objective.total - twice.objective.total) < 1e-12);
    const auto a = gradient_slots(once.grads);
    const auto b = gradient_slots(twice.grads);
    for (std::size_t t = 0; t < a.size(); ++t) {
        for (Index i = 0; i < a[t].size; ++i) CHECK(std::abs(a[t].data[i] - b[t].data[i]) < 1e-12);
    }
}

TEST_CASE("finite-difference check over the configuration grid") {
    std::mt19937_64 rng(3);
    const auto gs = random_graphs(rng, 4);
    const Batch b = batch_graphs(gs);
    for (double gamma : {0.0, 10.0}) {
        for (int s : {1, 4}) {
            for (int order : {1, 3}) {
                CAPTURE(gamma);
                CAPTURE(s);
                CAPTURE(order);
                const ModelParams p = init_model(spec_for(s, order, gamma), rng);
                FdOptions options;
                options.seed = rng();
                const FdReport report = finite_difference_check(p, b, options);
                INFO(report.describe());
                CHECK(report.passed);
                CHECK(report.checked >= 200);
                CHECK(report.tensors_covered == parameter_slots(const_cast<ModelParams&>(p)).size());
            }
        }
    }
}

TEST_CASE("finite-difference check catches an injected fault") {
    std::mt19937_64 rng(4);
    const auto gs = random_graphs(rng, 3);
    const ModelParams p = init_model(spec_for(2, 2, 0.0), rng);
    FdOptions options;
    options.inject_fault = true;
    const FdReport report = finite_difference_check(p, batch_graphs(gs), options);
    CHECK_FALSE(report.passed);
    CHECK_FALSE(report.failures.empty());
    options.step = 1e-2;
    CHECK_THROWS_AS(finite_difference_check(p, batch_graphs(gs), options), DomainError);
}

TEST_CASE("frozen filters get no gradient and no update") {
    std::mt19937_64 rng(5);
    const ModelParams p = frozen_lowpass_model(spec_for(1, 2, 0.0), rng);
    const auto gs = random_graphs(rng, 3);
    LossAndGradients lg = loss_and_gradients(p, batch_graphs(gs));
    for (const auto& layer : lg.grads.layers)
        for (const auto& a : layer.alpha) CHECK(a.isZero(0.0));
    ModelParams q = p;
    AdamState state = AdamState::for_params(q);
    adam_step(state, q, lg.grads, 1e-2, 1e-4);
    for (std::size_t l = 0; l < q.layers.size(); ++l) {
        CHECK(q.layers[l].filters[0].alpha == p.layers[l].filters[0].alpha);
    }
    CHECK(q.head_W != p.head_W);
}

TEST_CASE("adam update") {
    SUBCASE("first step moves by about lr") {
        std::vector<double> theta{0.5};
        const std::vector<double> grad{1.0};
        Vector m = Vector::Zero(1), v = Vector::Zero(1);
        adam_update(theta, grad, m, v, 1, 1e-3, 0.0, false);
        CHECK(std::abs((theta[0] - 0.5) + 1e-3) < 1e-6);
    }
    SUBCASE("zero gradient leaves parameters alone") {
        std::vector<double> theta{0.5, -2.0};
        const std::vector<double> grad{0.0, 0.0};
        Vector m = Vector::Zero(2), v = Vector::Zero(2);
        adam_update(theta, grad, m, v, 1, 1e-3, 0.0, false);
        CHECK(theta == std::vector<double>{0.5, -2.0});
    }
    SUBCASE("two steps on a quadratic decrease it") {
        std::vector<double> theta{1.0};
        Vector m = Vector::Zero(1), v = Vector::Zero(1);
        double f = 0.5;
        for (int step = 1; step <= 2; ++step) {
            const std::vector<double> grad{theta[0]};
            adam_update(theta, grad, m, v, step, 1e-2, 0.0, false);
            const double next = 0.5 * theta[0] * theta[0];
            CHECK(next < f);
            f = next;
        }
    }
    SUBCASE("decoupled weight decay scales before the moment update") {
        std::vector<double> theta{2.0};
        const std::vector<double> grad{0.0};
        Vector m = Vector::Zero(1), v = Vector::Zero(1);
        adam_update(theta, grad, m, v, 1, 0.1, 0.5, true);
        CHECK(theta[0] == doctest::Approx(2.0 * (1.0 - 0.05)));
    }
}

TEST_CASE("weight decay skips filter coefficients") {
    std::mt19937_64 rng(6);
    ModelParams p = init_model(spec_for(2, 2, 0.0), rng);
    Gradients zero = Gradients::zeros_like(p);
    const ModelParams before = p;
    AdamState state = AdamState::for_params(p);
    adam_step(state, p, zero, 0.1, 0.5);
    CHECK(p.layers[0].filters[0].alpha == before.layers[0].filters[0].alpha);
    CHECK((p.head_W - 0.95 * before.head_W).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("full-batch steps decrease the objective") {
    std::mt19937_64 rng(7);
    const auto gs = random_graphs(rng, 6);
    const Batch b = batch_graphs(gs);
    ModelParams p = init_model(spec_for(2, 2, 0.1), rng);
    AdamState state = AdamState::for_params(p);
    double previous = objective(p, b).total;
    int decreases = 0;
    for (int step = 0; step < 20; ++step) {
        LossAndGradients lg = loss_and_gradients(p, b);
        adam_step(state, p, lg.grads, 1e-3, 0.0);
        const double now = objective(p, b).total;
        if (now < previous) ++decreases;
        previous = now;
    }
    CHECK(decreases >= 18);
}

TEST_CASE("diversity drops from a colinear start with gamma = 10") {
    std::mt19937_64 rng(8);
    const auto gs = random_graphs(rng, 6);
    const Batch b = batch_graphs(gs);
    ModelParams p = init_model(spec_for(4, 2, 10.0), rng);
    for (auto& layer : p.layers)
        for (auto& f : layer.filters) f = FilterCoeffs{0.6, -0.3, 0.2};
    const double start = model_omega(p);
    CHECK(start == doctest::Approx(4.0).epsilon(1e-9));
    AdamState state = AdamState::for_params(p);
    for (int step = 0; step < 100; ++step) {
        LossAndGradients lg = loss_and_gradients(p, b);
        adam_step(state, p, lg.grads, 1e-3, 0.0);
    }
    CHECK(model_omega(p) < start);
}

TEST_CASE("training config validation") {
    TrainConfig c;
    CHECK_NOTHROW(validate(c));
    c.patience = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = TrainConfig{};
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = TrainConfig{};
    c.gamma = -1.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = TrainConfig{};
    c.lr_decay = LrDecay{1.5, 20, 1e-5};
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("train rejects empty splits") {
    std::mt19937_64 rng(9);
    const ModelParams p = init_model(spec_for(2, 2, 0.0), rng);
    const auto gs = random_graphs(rng, 3);
    CHECK_THROWS_AS(train(p, gs, {}, TrainConfig{}), ConfigError);
    CHECK_THROWS_AS(train(p, {}, gs, TrainConfig{}), ConfigError);
}

TEST_CASE("separable toy task is solved quickly and deterministically") {
    std::mt19937_64 rng(10);
    const auto train_set = separable(rng, 40);
    const auto val_set = separable(rng, 20);
    ModelSpec spec = spec_for(2, 2, 0.1, 2, 2);
    const ModelParams init = init_model(spec, rng);
    TrainConfig c;
    c.learning_rate = 1e-2;
    c.batch_size = 8;
    c.max_epochs = 50;
    c.patience = 50;
    c.seed = 3;
    const TrainResult a = train(init, train_set, val_set, c);
    const TrainResult b = train(init, train_set, val_set, c);
    CHECK(a.best_val_acc == 1.0);
    int first_perfect = 0;
    for (const auto& h : a.history) {
        if (h.val_acc == 1.0) {
            first_perfect = h.epoch;
            break;
        }
    }
    CHECK(first_perfect >= 1);
    CHECK(first_perfect <= 30);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e) {
        CHECK(a.history[e].train_loss == b.history[e].train_loss);
        CHECK(a.history[e].val_loss == b.history[e].val_loss);
        CHECK(a.history[e].omega == b.history[e].omega);
    }
    CHECK(a.best_params.head_W == b.best_params.head_W);
    CHECK(a.history[static_cast<std::size_t>(a.best_epoch - 1)].omega == model_omega(a.best_params));
}

TEST_CASE("early stopping and learning-rate decay") {
    std::mt19937_64 rng(11);
    const auto train_set = random_graphs(rng, 12);
    const auto val_set = random_graphs(rng, 6);
    const ModelParams init = init_model(spec_for(2, 1, 0.0), rng);
    TrainConfig c;
    c.max_epochs = 200;
    c.patience = 3;
    c.batch_size = 4;
    const TrainResult r = train(init, train_set, val_set, c);
    CHECK(r.history.size() < 200);
    CHECK(static_cast<int>(r.history.size()) >= r.best_epoch + 3);

    c.patience = 200;
    c.max_epochs = 40;
    c.learning_rate = 0.05;
    c.lr_decay = LrDecay{0.1, 2, 1e-4};
    const TrainResult d = train(init, train_set, val_set, c);
    CHECK(d.history.back().lr < 0.05);
    for (const auto& rec : d.history) CHECK(rec.lr >= 1e-4);
}

TEST_CASE("evaluate") {
    std::mt19937_64 rng(12);
    const auto gs = random_graphs(rng, 9);
    ModelParams p = init_model(spec_for(2, 2, 0.0), rng);
    const Evaluation ev = evaluate(p, gs, 4);
    CHECK(ev.confusion.sum() == 9);
    for (int c = 0; c < 3; ++c) CHECK(ev.confusion.row(c).sum() == 3);
    CHECK(ev.accuracy == doctest::Approx(static_cast<double>(ev.confusion.trace()) / 9.0));
    CHECK_THROWS_AS(evaluate(p, {}), DimensionError);

    // A head that always votes for each graph's own label.
    std::vector<Graph> labelled;
    for (int k = 0; k < 6; ++k) {
        Graph g = oracle::random_graph(rng, 5, 0.5, 3, 1);
        labelled.push_back(g);
    }
    p.head_W.setZero();
    p.head_b << 0, 5, 0;
    CHECK(evaluate(p, labelled).accuracy == 1.0);
}

TEST_CASE("random head on a balanced binary set is near chance") {
    std::mt19937_64 rng(13);
    std::vector<Graph> gs;
    for (int k = 0; k < 400; ++k) gs.push_back(oracle::random_graph(rng, 6, 0.4, 3, static_cast<int>(rng() % 2)));
    const ModelParams p = init_model(spec_for(2, 2, 0.0, 3, 2), rng);
    const double acc = evaluate(p, gs).accuracy;
    CHECK(std::abs(acc - 0.5) <= 3.0 * std::sqrt(0.25 / 400.0));
}
