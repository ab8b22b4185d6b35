#include <doctest.h>

#include <filesystem>
#include <numeric>

#include "bankgcn/checkpoint.hpp"
#include "bankgcn/model.hpp"
#include "oracles.hpp"

using namespace bankgcn;

namespace {

ModelSpec small_spec(int s = 2, int order = 2, int classes = 3) {
    ModelSpec spec;
    spec.input_dim = 3;
    spec.widths = {4, 4, 4, 4};
    spec.subspaces = s;
    spec.order = order;
    spec.num_classes = classes;
    return spec;
}

std::vector<Graph> random_graphs(std::mt19937_64& rng, int count, Index d = 3) {
    std::vector<Graph> gs;
    for (int k = 0; k < count; ++k) gs.push_back(oracle::random_graph(rng, 2 + static_cast<Index>(rng() % 9), 0.4, d, k % 3));
    return gs;
}

ModelParams with_random_biases(ModelParams p, std::mt19937_64& rng) {
    for (auto& layer : p.layers)
        for (auto& b : layer.proj_b) b = oracle::random_matrix(rng, b.size(), 1).col(0) * 0.2;
    p.head_b = oracle::random_matrix(rng, p.head_b.size(), 1).col(0);
    return p;
}

}  // namespace

TEST_CASE("readout examples") {
    const Graph single = build_graph(1, {}, Matrix::Zero(1, 2), 0);
    const std::vector<Graph> one{single};
    const Batch b1 = batch_graphs(one);
    Matrix x(1, 2);
    x << 0.3, -0.7;
    const std::vector<Matrix> outs{x};
    const Matrix r = readout(outs, b1);
    CHECK(r(0, 0) == 0.3);
    CHECK(r(0, 1) == -0.7);
    CHECK(r(0, 2) == 0.3);
    CHECK(r(0, 3) == -0.7);

    const std::vector<Edge> e{{0, 1, 1.0}};
    const std::vector<Graph> two{build_graph(2, e, Matrix::Zero(2, 2), 0)};
    const Batch b2 = batch_graphs(two);
    Matrix y(2, 2);
    y << 0, 2, 2, 0;
    const std::vector<Matrix> outs2{y};
    const Matrix r2 = readout(outs2, b2);
    CHECK(r2.row(0) == (Eigen::RowVector4d() << 1, 1, 2, 2).finished());
}

TEST_CASE("batched readout equals per-graph readout") {
    std::mt19937_64 rng(1);
    const auto gs = random_graphs(rng, 3);
    const Batch b = batch_graphs(gs);
    const std::vector<Matrix> outs{oracle::random_matrix(rng, b.merged.num_nodes(), 2),
                                   oracle::random_matrix(rng, b.merged.num_nodes(), 3)};
    const Matrix r = readout(outs, b);
    for (std::size_t k = 0; k < gs.size(); ++k) {
        const std::vector<Graph> one{gs[k]};
        const std::vector<Matrix> part{outs[0].middleRows(b.offsets[k], b.nodes_of(k)),
                                       outs[1].middleRows(b.offsets[k], b.nodes_of(k))};
        CHECK((readout(part, batch_graphs(one)).row(0) - r.row(static_cast<Index>(k))).cwiseAbs().maxCoeff() < 1e-15);
    }
    const std::vector<Matrix> wrong{Matrix::Zero(1, 2)};
    CHECK_THROWS_AS(readout(wrong, b), DimensionError);
}

TEST_CASE("all-zero parameters predict the uniform distribution") {
    std::mt19937_64 rng(2);
    ModelParams p = init_model(small_spec(), rng);
    for (auto& layer : p.layers) {
        for (auto& w : layer.proj_W) w.setZero();
        for (auto& f : layer.filters) f.alpha.setZero();
    }
    p.head_W.setZero();
    const auto gs = random_graphs(rng, 4);
    for (const auto& pred : model_forward(p, batch_graphs(gs))) {
        CHECK((pred.probabilities.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
        CHECK(pred.logits.isZero(0.0));
    }
}

TEST_CASE("logits match the dense straight-line model") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 5; ++t) {
        const ModelParams p = with_random_biases(init_model(small_spec(2, 1 + t % 3), rng), rng);
        const auto gs = random_graphs(rng, 4);
        const Matrix logits = model_logits(p, batch_graphs(gs));
        for (std::size_t k = 0; k < gs.size(); ++k) {
            CHECK((logits.row(static_cast<Index>(k)).transpose() - oracle::logits(p, gs[k])).cwiseAbs().maxCoeff() <
                  1e-10);
        }
    }
}

TEST_CASE("predictions are invariant to node relabeling and batch order") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 10; ++t) {
        const ModelParams p = with_random_biases(init_model(small_spec(), rng), rng);
        const auto gs = random_graphs(rng, 5);
        const Matrix base = model_logits(p, batch_graphs(gs));
        std::vector<Graph> relabeled;
        for (const auto& g : gs) {
            Permutation perm(static_cast<std::size_t>(g.num_nodes()));
            std::iota(perm.begin(), perm.end(), Index{0});
            std::shuffle(perm.begin(), perm.end(), rng);
            relabeled.push_back(permute_graph(g, perm));
        }
        CHECK((model_logits(p, batch_graphs(relabeled)) - base).cwiseAbs().maxCoeff() < 1e-10);
        std::vector<Graph> reversed(gs.rbegin(), gs.rend());
        CHECK((model_logits(p, batch_graphs(reversed)).colwise().reverse() - base).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("softmax and cross entropy") {
    CHECK(cross_entropy((Vector(2) << 0, 0).finished(), 0) == doctest::Approx(0.693147180559945).epsilon(1e-14));
    const double big = cross_entropy((Vector(2) << 1000, 0).finished(), 0);
    CHECK(std::isfinite(big));
    CHECK(big < 1e-300);
    CHECK(cross_entropy((Vector(2) << 1000, 0).finished(), 1) == doctest::Approx(1000.0));
    CHECK_THROWS_AS(cross_entropy((Vector(2) << 0, 0).finished(), 2), DomainError);
    CHECK_THROWS_AS(cross_entropy((Vector(2) << 0, 0).finished(), -1), DomainError);

    std::mt19937_64 rng(5);
    for (int t = 0; t < 50; ++t) {
        const Vector z = oracle::random_matrix(rng, 4, 1).col(0) * 3.0;
        const Vector naive = z.array().exp() / z.array().exp().sum();
        const Prediction pred = make_prediction(z);
        CHECK(std::abs(pred.probabilities.sum() - 1.0) <= 1e-12);
        CHECK((pred.probabilities - naive).cwiseAbs().maxCoeff() < 1e-14);
        const int label = static_cast<int>(rng() % 4);
        CHECK(std::abs(cross_entropy(pred, label) + std::log(naive[label])) < 1e-10);
        Index arg = 0;
        z.maxCoeff(&arg);
        CHECK(pred.predicted_class == arg);
    }
}

TEST_CASE("objective decomposition") {
    std::mt19937_64 rng(6);
    const auto gs = random_graphs(rng, 3);
    const Batch b = batch_graphs(gs);
    ModelParams p = init_model(small_spec(4, 2), rng);

    p.gamma = 0.0;
    const Objective zero = objective(p, b);
    CHECK(zero.total == zero.loss);

    p.gamma = 10.0;
    const Objective ten = objective(p, b);
    CHECK(ten.total - ten.loss == doctest::Approx(10.0 * ten.omega).epsilon(1e-15));
    CHECK(ten.total == ten.loss + 10.0 * ten.omega);
    double summed = 0.0;
    for (const auto& layer : p.layers) summed += diversity_penalty(layer.filters);
    CHECK(ten.omega == summed);

    ModelParams orth = init_model(small_spec(2, 2), rng);
    for (auto& layer : orth.layers) {
        layer.filters[0] = FilterCoeffs{0.5, 0, 0};
        layer.filters[1] = FilterCoeffs{0, -2, 1e-300};
        CHECK(diversity_penalty(layer.filters) == 0.0);
    }
    orth.gamma = 10.0;
    const Objective o = objective(orth, b);
    CHECK(o.omega == 0.0);
    CHECK(o.total == o.loss);
}

TEST_CASE("frozen low-pass model propagates with 2I - L") {
    std::mt19937_64 rng(7);
    ModelSpec spec = small_spec();
    const ModelParams p = frozen_lowpass_model(spec, rng);
    CHECK(p.frozen_filters);
    for (const auto& layer : p.layers) {
        CHECK(layer.subspaces() == 1);
        CHECK(layer.filters[0].alpha == (Vector(3) << 1, -1, 0).finished());
    }
    const Graph g = oracle::random_graph(rng, 8, 0.5, 3);
    const Matrix r = subspace_project(p.layers[0], g.features())[0];
    const Matrix lap = oracle::laplacian(g);
    const Matrix expected = (2.0 * Matrix::Identity(8, 8) - lap) * r;
    CHECK((cheb_filter_apply(g, p.layers[0].filters[0], r) - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("model parameter counts") {
    std::mt19937_64 rng(8);
    ModelSpec spec;
    spec.input_dim = 64;
    spec.widths = {64, 64, 64, 64};
    spec.subspaces = 8;
    spec.order = 2;
    spec.num_classes = 2;
    const ModelParams bank = init_model(spec, rng);
    const std::int64_t head = 512 * 2 + 2;
    CHECK(model_param_count(bank, ParamConvention::SharedOrder) == 4 * 4163 + head);
    CHECK(model_param_count(bank, ParamConvention::PerSubspace) == 4 * 4184 + head);

    const ModelParams gcn = frozen_lowpass_model(spec, rng);
    CHECK(model_param_count(gcn, ParamConvention::SharedOrder) == 4 * 4160 + head);
    CHECK(model_param_count(gcn, ParamConvention::PerSubspace) == 4 * 4160 + head);

    ModelSpec empty = spec;
    empty.widths.clear();
    const ModelParams head_only = init_model(empty, rng);
    CHECK(model_param_count(head_only, ParamConvention::SharedOrder) == 0 * 2 + 2);
}

TEST_CASE("single-channel input uses one subspace per output channel in the first layer") {
    std::mt19937_64 rng(9);
    ModelSpec spec = small_spec(2);
    spec.input_dim = 1;
    const ModelParams p = init_model(spec, rng);
    CHECK(p.layers[0].subspaces() == 4);
    CHECK(p.layers[1].subspaces() == 2);
}

TEST_CASE("model validation") {
    std::mt19937_64 rng(10);
    ModelParams p = init_model(small_spec(), rng);
    p.layers[1].proj_W[0] = Matrix::Zero(5, 2);
    CHECK_THROWS_AS(validate(p), ConstructionError);
    ModelSpec bad = small_spec();
    bad.widths = {4, 5};
    CHECK_THROWS_AS(init_model(bad, rng), ConstructionError);
}

TEST_CASE("checkpoint round trip is exact") {
    std::mt19937_64 rng(11);
    ModelParams p = with_random_biases(init_model(small_spec(2, 3), rng), rng);
    p.gamma = 0.1;
    const std::string bytes = encode_checkpoint(p);
    CHECK(bytes.substr(0, 4) == "BGCN");
    const ModelParams q = decode_checkpoint(bytes);
    CHECK(encode_checkpoint(q) == bytes);
    CHECK(q.gamma == 0.1);
    CHECK(q.layers.size() == 4);
    CHECK(q.head_W == p.head_W);
    CHECK(q.layers[2].filters[1].alpha == p.layers[2].filters[1].alpha);

    const ModelParams frozen = frozen_lowpass_model(small_spec(), rng);
    CHECK(decode_checkpoint(encode_checkpoint(frozen)).frozen_filters);

    const auto path = std::filesystem::temp_directory_path() / "bankgcn_ckpt_test.bgcn";
    save_checkpoint(p, path);
    CHECK(encode_checkpoint(load_checkpoint(path)) == bytes);
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint corruption is reported") {
    std::mt19937_64 rng(12);
    const std::string bytes = encode_checkpoint(init_model(small_spec(), rng));
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_checkpoint(bad_magic), doctest::Contains("magic"), FormatError);
    std::string bad_version = bytes;
    bad_version[4] = 9;
    CHECK_THROWS_WITH_AS(decode_checkpoint(bad_version), doctest::Contains("version"), FormatError);
    CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
    CHECK_THROWS_AS(decode_checkpoint(bytes + "x"), FormatError);

    // A tensor whose shape disagrees with its neighbours.
    auto tensors = decode_tensors(bytes);
    for (auto& t : tensors) {
        if (t.name == "head.W") {
            t.dims[0] += 1;
            t.data.resize(t.data.size() + t.dims[1], 0.0);
        }
    }
    CHECK_THROWS_AS(decode_checkpoint(encode_tensors(tensors)), FormatError);
}

TEST_CASE("checkpoint byte layout") {
    NamedTensor t{"ab", {2}, {1.0, -2.0}};
    const std::string bytes = encode_tensors({t});
    REQUIRE(bytes.size() == 4 + 4 + 4 + 4 + 2 + 4 + 8 + 16);
    CHECK(bytes.substr(0, 4) == "BGCN");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);
    CHECK(static_cast<unsigned char>(bytes[8]) == 1);
    CHECK(static_cast<unsigned char>(bytes[12]) == 2);
    CHECK(bytes.substr(16, 2) == "ab");
    CHECK(static_cast<unsigned char>(bytes[18]) == 1);
    CHECK(static_cast<unsigned char>(bytes[22]) == 2);
    // 1.0 little-endian: 00 .. 00 F0 3F
    CHECK(static_cast<unsigned char>(bytes[36]) == 0xF0);
    CHECK(static_cast<unsigned char>(bytes[37]) == 0x3F);
}
