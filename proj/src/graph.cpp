#include "bankgcn/graph.hpp"

#include <cmath>
#include <string>

namespace bankgcn {

std::shared_ptr<const Graph::Topology> Graph::make_topology(SparseMatrix adjacency) {
    auto topo = std::make_shared<Topology>();
    adjacency.makeCompressed();
    const Index n = adjacency.rows();
    topo->inv_sqrt_degree = Vector::Zero(n);
    Index off_diagonal = 0;
    Index diagonal = 0;
    for (Index r = 0; r < n; ++r) {
        double degree = 0.0;
        for (SparseMatrix::InnerIterator it(adjacency, r); it; ++it) {
            degree += it.value();
            if (it.col() == r) {
                ++diagonal;
            } else {
                ++off_diagonal;
            }
        }
        topo->inv_sqrt_degree[r] = degree > 0.0 ? 1.0 / std::sqrt(degree) : 0.0;
    }
    topo->undirected_edges = off_diagonal / 2 + diagonal;
    topo->adjacency = std::move(adjacency);
    return topo;
}

Graph build_graph(Index n, std::span<const Edge> edges, Matrix features, int label) {
    if (n < 1) {
        throw ConstructionError("build_graph: a graph needs at least one node");
    }
    if (features.rows() != n) {
        throw ConstructionError("build_graph: feature rows (" + std::to_string(features.rows()) +
                                ") differ from node count (" + std::to_string(n) + ")");
    }
    if (label < 0) {
        throw ConstructionError("build_graph: negative class label");
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(edges.size() * 2);
    for (const Edge& e : edges) {
        if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n) {
            throw ConstructionError("build_graph: edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                                    ") out of range for n = " + std::to_string(n));
        }
        if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
            throw ConstructionError("build_graph: edge weight must be finite and non-negative");
        }
        triplets.emplace_back(e.i, e.j, e.weight);
        if (e.i != e.j) {
            triplets.emplace_back(e.j, e.i, e.weight);
        }
    }
    SparseMatrix adjacency(n, n);
    adjacency.setFromTriplets(triplets.begin(), triplets.end());
    return from_adjacency(std::move(adjacency), std::move(features), label);
}

Graph from_adjacency(SparseMatrix adjacency, Matrix features, int label) {
    if (adjacency.rows() != adjacency.cols() || adjacency.rows() < 1) {
        throw ConstructionError("from_adjacency: adjacency must be square and non-empty");
    }
    if (features.rows() != adjacency.rows()) {
        throw ConstructionError("from_adjacency: feature rows differ from node count");
    }
    Graph g;
    g.topology_ = Graph::make_topology(std::move(adjacency));
    g.features_ = std::move(features);
    g.label_ = label;
    return g;
}

Graph with_features(const Graph& g, Matrix features) {
    require_rows(g, features.rows(), "with_features");
    Graph out = g;
    out.features_ = std::move(features);
    return out;
}

Graph with_label(const Graph& g, int label) {
    Graph out = g;
    out.label_ = label;
    return out;
}

Matrix dense_laplacian(const Graph& g) {
    const Index n = g.num_nodes();
    const Matrix a = Matrix(g.adjacency());
    const auto scale = g.inv_sqrt_degree().asDiagonal();
    return Matrix::Identity(n, n) - scale * a * scale;
}

Batch batch_graphs(std::span<const Graph> graphs) {
    std::vector<std::size_t> all(graphs.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    return batch_graphs(graphs, all);
}

Batch batch_graphs(std::span<const Graph> pool, std::span<const std::size_t> members) {
    if (members.empty()) {
        throw DimensionError("batch_graphs: empty batch");
    }
    const Index d = pool[members.front()].feature_dim();
    Batch b;
    b.offsets.reserve(members.size() + 1);
    b.offsets.push_back(0);
    Index total_nodes = 0;
    Index total_nnz = 0;
    for (std::size_t k : members) {
        const Graph& g = pool[k];
        if (g.feature_dim() != d) {
            throw DimensionError("batch_graphs: feature width " + std::to_string(g.feature_dim()) +
                                 " differs from " + std::to_string(d));
        }
        total_nodes += g.num_nodes();
        total_nnz += g.adjacency().nonZeros();
        b.offsets.push_back(total_nodes);
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(total_nnz));
    Matrix features(total_nodes, d);
    b.graph_of_node.resize(static_cast<std::size_t>(total_nodes));
    b.labels.reserve(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) {
        const Graph& g = pool[members[k]];
        const Index base = b.offsets[k];
        for (Index r = 0; r < g.num_nodes(); ++r) {
            for (SparseMatrix::InnerIterator it(g.adjacency(), r); it; ++it) {
                triplets.emplace_back(base + r, base + it.col(), it.value());
            }
            b.graph_of_node[static_cast<std::size_t>(base + r)] = static_cast<Index>(k);
        }
        features.middleRows(base, g.num_nodes()) = g.features();
        b.labels.push_back(g.label());
    }
    SparseMatrix adjacency(total_nodes, total_nodes);
    adjacency.setFromTriplets(triplets.begin(), triplets.end());
    b.merged = from_adjacency(std::move(adjacency), std::move(features), 0);
    return b;
}

void validate_permutation(const Permutation& perm, Index n) {
    if (static_cast<Index>(perm.size()) != n) {
        throw ConstructionError("permutation length " + std::to_string(perm.size()) + " differs from n = " +
                                std::to_string(n));
    }
    std::vector<char> seen(perm.size(), 0);
    for (Index p : perm) {
        if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)]) {
            throw ConstructionError("permutation is not a bijection");
        }
        seen[static_cast<std::size_t>(p)] = 1;
    }
}

Permutation inverse_permutation(const Permutation& perm) {
    Permutation inv(perm.size());
    for (std::size_t m = 0; m < perm.size(); ++m) {
        inv[static_cast<std::size_t>(perm[m])] = static_cast<Index>(m);
    }
    return inv;
}

Matrix permute_rows(const Matrix& x, const Permutation& perm) {
    validate_permutation(perm, x.rows());
    Matrix out(x.rows(), x.cols());
    for (Index m = 0; m < x.rows(); ++m) {
        out.row(m) = x.row(perm[static_cast<std::size_t>(m)]);
    }
    return out;
}

Graph permute_graph(const Graph& g, const Permutation& perm) {
    validate_permutation(perm, g.num_nodes());
    const Permutation inv = inverse_permutation(perm);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(g.adjacency().nonZeros()));
    for (Index r = 0; r < g.num_nodes(); ++r) {
        for (SparseMatrix::InnerIterator it(g.adjacency(), r); it; ++it) {
            triplets.emplace_back(inv[static_cast<std::size_t>(r)], inv[static_cast<std::size_t>(it.col())],
                                  it.value());
        }
    }
    SparseMatrix adjacency(g.num_nodes(), g.num_nodes());
    adjacency.setFromTriplets(triplets.begin(), triplets.end());
    return from_adjacency(std::move(adjacency), permute_rows(g.features(), perm), g.label());
}

}  // namespace bankgcn
