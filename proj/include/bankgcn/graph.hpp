#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "bankgcn/errors.hpp"

namespace bankgcn {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Edge {
    Index i = 0;
    Index j = 0;
    double weight = 1.0;
};

/// Undirected weighted graph with an n x d node-signal matrix and a class label.
///
/// The topology (CSR adjacency plus cached D^{-1/2}) is shared between copies,
/// so swapping features via with_features() does not copy the edge structure.
/// Instances are immutable once built.
class Graph {
public:
    Graph() = default;

    Index num_nodes() const noexcept { return topology_ ? topology_->adjacency.rows() : 0; }
    Index feature_dim() const noexcept { return features_.cols(); }
    /// Number of undirected edges; a self loop counts once.
    Index num_edges() const noexcept { return topology_ ? topology_->undirected_edges : 0; }

    const SparseMatrix& adjacency() const { return topology_->adjacency; }
    /// Diagonal of D^{-1/2}, with 0 on zero-degree nodes.
    const Vector& inv_sqrt_degree() const { return topology_->inv_sqrt_degree; }
    const Matrix& features() const noexcept { return features_; }
    int label() const noexcept { return label_; }

    friend Graph build_graph(Index n, std::span<const Edge> edges, Matrix features, int label);
    friend Graph with_features(const Graph& g, Matrix features);
    friend Graph with_label(const Graph& g, int label);
    friend Graph from_adjacency(SparseMatrix adjacency, Matrix features, int label);

private:
    struct Topology {
        SparseMatrix adjacency;
        Vector inv_sqrt_degree;
        Index undirected_edges = 0;
    };

    static std::shared_ptr<const Topology> make_topology(SparseMatrix adjacency);

    std::shared_ptr<const Topology> topology_;
    Matrix features_;
    int label_ = 0;
};

/// Builds a graph from an undirected edge list. Each (i, j, w) contributes w
/// to both A_ij and A_ji; repeated entries are summed. No self loops are added.
Graph build_graph(Index n, std::span<const Edge> edges, Matrix features, int label);

/// Same topology, new node signals (row count must equal n).
Graph with_features(const Graph& g, Matrix features);
Graph with_label(const Graph& g, int label);

/// Wraps an already-symmetric adjacency. Used by batching and permutation.
Graph from_adjacency(SparseMatrix adjacency, Matrix features, int label);

inline void require_rows(const Graph& g, Index rows, const char* what) {
    if (rows != g.num_nodes()) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(g.num_nodes()) +
                             " rows, got " + std::to_string(rows));
    }
}

/// L X with L = I - D^{-1/2} A D^{-1/2}, evaluated sparsely.
template <typename Derived>
Matrix laplacian_matvec(const Graph& g, const Eigen::MatrixBase<Derived>& x) {
    require_rows(g, x.rows(), "laplacian_matvec");
    const auto scale = g.inv_sqrt_degree().asDiagonal();
    Matrix scaled = scale * x;
    Matrix propagated = g.adjacency() * scaled;
    return x - scale * propagated;
}

/// (L - I) X = -D^{-1/2} A D^{-1/2} X. Spectrum of the operator lies in [-1, 1].
template <typename Derived>
Matrix scaled_laplacian_matvec(const Graph& g, const Eigen::MatrixBase<Derived>& x) {
    require_rows(g, x.rows(), "scaled_laplacian_matvec");
    const auto scale = g.inv_sqrt_degree().asDiagonal();
    Matrix scaled = scale * x;
    Matrix propagated = g.adjacency() * scaled;
    return -(scale * propagated);
}

/// Dense normalized Laplacian. Oracle and diagnostics only.
Matrix dense_laplacian(const Graph& g);

/// Block-diagonal merge of several graphs.
struct Batch {
    Graph merged;
    std::vector<Index> graph_of_node;
    std::vector<int> labels;
    /// offsets[k] is the first merged row of graph k; offsets.back() == total nodes.
    std::vector<Index> offsets;

    std::size_t size() const noexcept { return labels.size(); }
    Index nodes_of(std::size_t k) const { return offsets[k + 1] - offsets[k]; }
};

Batch batch_graphs(std::span<const Graph> graphs);
Batch batch_graphs(std::span<const Graph> pool, std::span<const std::size_t> members);

using Permutation = std::vector<Index>;

/// Throws ConstructionError unless perm is a bijection on 0..n-1.
void validate_permutation(const Permutation& perm, Index n);
Permutation inverse_permutation(const Permutation& perm);

/// Row m of the result is row perm[m] of x (P_perm x).
Matrix permute_rows(const Matrix& x, const Permutation& perm);

/// Node m of the result is node perm[m] of g.
Graph permute_graph(const Graph& g, const Permutation& perm);

}  // namespace bankgcn
