#include <doctest.h>

#include <numeric>

#include "bankgcn/graph.hpp"
#include "oracles.hpp"

using namespace bankgcn;

namespace {

Graph p2(Matrix x = Matrix::Identity(2, 2)) {
    const std::vector<Edge> e{{0, 1, 1.0}};
    return build_graph(2, e, std::move(x), 0);
}

Permutation random_perm(std::mt19937_64& rng, Index n) {
    Permutation p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), Index{0});
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

}  // namespace

TEST_CASE("build_graph symmetrizes a single edge") {
    const Graph g = p2();
    Matrix expected(2, 2);
    expected << 0, 1, 1, 0;
    CHECK(oracle::adjacency(g) == expected);
    CHECK(g.num_edges() == 1);
}

TEST_CASE("build_graph sums both listed directions into one edge") {
    const std::vector<Edge> e{{0, 1, 1.0}, {1, 0, 1.0}};
    const Graph g = build_graph(3, e, Matrix::Zero(3, 1), 0);
    CHECK(g.adjacency().nonZeros() == 2);
    CHECK(g.adjacency().coeff(0, 1) == 2.0);
    CHECK(g.adjacency().coeff(1, 0) == 2.0);
}

TEST_CASE("single isolated node") {
    const Graph g = build_graph(1, {}, Matrix::Ones(1, 1), 0);
    CHECK(g.adjacency().nonZeros() == 0);
    CHECK(g.inv_sqrt_degree()[0] == 0.0);
    CHECK(laplacian_matvec(g, g.features())(0, 0) == 1.0);
}

TEST_CASE("build_graph rejects bad input") {
    const std::vector<Edge> out_of_range{{0, 2, 1.0}};
    CHECK_THROWS_AS(build_graph(2, out_of_range, Matrix::Zero(2, 1), 0), ConstructionError);
    const std::vector<Edge> negative{{0, 1, -1.0}};
    CHECK_THROWS_AS(build_graph(2, negative, Matrix::Zero(2, 1), 0), ConstructionError);
    CHECK_THROWS_AS(build_graph(0, {}, Matrix::Zero(0, 1), 0), ConstructionError);
    CHECK_THROWS_AS(build_graph(2, {}, Matrix::Zero(3, 1), 0), ConstructionError);
}

TEST_CASE("self loops are kept only when listed") {
    const std::vector<Edge> e{{0, 0, 1.0}, {0, 1, 1.0}};
    const Graph g = build_graph(2, e, Matrix::Zero(2, 1), 0);
    CHECK(g.adjacency().coeff(0, 0) == 1.0);
    CHECK(g.adjacency().coeff(1, 1) == 0.0);
    CHECK(p2().adjacency().coeff(0, 0) == 0.0);
}

TEST_CASE("laplacian on P2") {
    Matrix x(2, 1);
    x << 1, 0;
    const Graph g = p2(x);
    Matrix lx(2, 1);
    lx << 1, -1;
    CHECK((laplacian_matvec(g, x) - lx).norm() < 1e-15);
    Matrix sx(2, 1);
    sx << 0, -1;
    CHECK((scaled_laplacian_matvec(g, x) - sx).norm() < 1e-15);
}

TEST_CASE("square-root degree signal is in the nullspace of a connected graph") {
    const std::vector<Edge> path{{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 1.0}, {3, 4, 0.5}, {1, 4, 1.0}};
    const Matrix root_deg = (Matrix(5, 1) << 1.0, 4.0, 3.0, 1.5, 1.5).finished().cwiseSqrt();
    const Graph g = build_graph(5, path, root_deg, 0);
    CHECK(laplacian_matvec(g, g.features()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((scaled_laplacian_matvec(g, g.features()) + g.features()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sparse laplacian matches the dense formula") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const Graph g = oracle::random_graph(rng, 8, 0.35, 3);
        const Matrix lap = oracle::laplacian(g);
        CHECK((laplacian_matvec(g, g.features()) - lap * g.features()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((scaled_laplacian_matvec(g, g.features()) - (lap - Matrix::Identity(8, 8)) * g.features())
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
        CHECK((dense_laplacian(g) - lap).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("laplacian reconstructed from basis vectors is symmetric with spectrum in [0, 2]") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const Index n = 1 + static_cast<Index>(rng() % 32);
        const Graph g = oracle::random_graph(rng, n, 0.2, 1);
        const Matrix lap = laplacian_matvec(g, Matrix::Identity(n, n));
        CHECK((lap - lap.transpose()).cwiseAbs().maxCoeff() < 1e-14);
        Eigen::SelfAdjointEigenSolver<Matrix> es(lap);
        CHECK(es.eigenvalues().minCoeff() >= -1e-9);
        CHECK(es.eigenvalues().maxCoeff() <= 2.0 + 1e-9);
    }
}

TEST_CASE("batching two P2 graphs") {
    const Graph a = p2();
    const std::vector<Graph> gs{a, a};
    const Batch b = batch_graphs(gs);
    CHECK(b.merged.num_nodes() == 4);
    CHECK(b.graph_of_node == std::vector<Index>{0, 0, 1, 1});
    CHECK(b.merged.adjacency().nonZeros() == 4);
    CHECK(b.merged.adjacency().coeff(0, 1) == 1.0);
    CHECK(b.merged.adjacency().coeff(2, 3) == 1.0);
    CHECK(b.merged.adjacency().coeff(1, 2) == 0.0);
    CHECK(b.offsets == std::vector<Index>{0, 2, 4});
}

TEST_CASE("batching a single isolated node is the identity") {
    const Graph g = build_graph(1, {}, Matrix::Constant(1, 2, 3.0), 1);
    const std::vector<Graph> gs{g};
    const Batch b = batch_graphs(gs);
    CHECK(b.merged.num_nodes() == 1);
    CHECK(b.merged.features() == g.features());
    CHECK(b.labels == std::vector<int>{1});
}

TEST_CASE("batch matvec equals stacked per-graph matvecs") {
    std::mt19937_64 rng(21);
    std::vector<Graph> gs;
    for (int k = 0; k < 3; ++k) gs.push_back(oracle::random_graph(rng, 3 + k * 2, 0.5, 2, k));
    const Batch b = batch_graphs(gs);
    const Matrix merged = laplacian_matvec(b.merged, b.merged.features());
    for (std::size_t k = 0; k < gs.size(); ++k) {
        const Matrix part = laplacian_matvec(gs[k], gs[k].features());
        CHECK((merged.middleRows(b.offsets[k], b.nodes_of(k)) - part).cwiseAbs().maxCoeff() < 1e-12);
    }
    for (Index r = 0; r < b.merged.num_nodes(); ++r) {
        for (SparseMatrix::InnerIterator it(b.merged.adjacency(), r); it; ++it) {
            CHECK(b.graph_of_node[static_cast<std::size_t>(r)] == b.graph_of_node[static_cast<std::size_t>(it.col())]);
        }
    }
    CHECK(std::is_sorted(b.graph_of_node.begin(), b.graph_of_node.end()));
}

TEST_CASE("batching rejects mixed feature widths") {
    const std::vector<Graph> gs{p2(Matrix::Zero(2, 1)), p2(Matrix::Zero(2, 2))};
    CHECK_THROWS_AS(batch_graphs(gs), DimensionError);
}

TEST_CASE("permute_graph") {
    SUBCASE("identity") {
        std::mt19937_64 rng(2);
        const Graph g = oracle::random_graph(rng, 6, 0.5, 2);
        const Graph h = permute_graph(g, {0, 1, 2, 3, 4, 5});
        CHECK(oracle::adjacency(h) == oracle::adjacency(g));
        CHECK(h.features() == g.features());
    }
    SUBCASE("P2 swap") {
        Matrix x(2, 1);
        x << 1, 2;
        const Graph h = permute_graph(p2(x), {1, 0});
        CHECK(oracle::adjacency(h) == oracle::adjacency(p2(x)));
        CHECK(h.features()(0, 0) == 2.0);
        CHECK(h.features()(1, 0) == 1.0);
    }
    SUBCASE("round trip through the inverse") {
        std::mt19937_64 rng(8);
        const Graph g = oracle::random_graph(rng, 9, 0.4, 3);
        const Permutation p = random_perm(rng, 9);
        const Graph back = permute_graph(permute_graph(g, p), inverse_permutation(p));
        CHECK(oracle::adjacency(back) == oracle::adjacency(g));
        CHECK(back.features() == g.features());
    }
    SUBCASE("rejects non-bijections") {
        CHECK_THROWS_AS(permute_graph(p2(), {0, 0}), ConstructionError);
        CHECK_THROWS_AS(permute_graph(p2(), {0}), ConstructionError);
    }
}

TEST_CASE("laplacian is permutation equivariant") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 10; ++t) {
        const Graph g = oracle::random_graph(rng, 10, 0.3, 2);
        const Permutation p = random_perm(rng, 10);
        const Graph h = permute_graph(g, p);
        const Matrix lhs = laplacian_matvec(h, h.features());
        const Matrix rhs = permute_rows(laplacian_matvec(g, g.features()), p);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("matvec row mismatch") {
    CHECK_THROWS_AS(laplacian_matvec(p2(), Matrix::Zero(3, 1)), DimensionError);
}
