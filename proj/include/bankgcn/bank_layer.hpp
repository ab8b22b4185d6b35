#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "bankgcn/graph.hpp"
#include "bankgcn/spectral.hpp"

namespace bankgcn {

/// Parameters of one filter-bank convolution layer.
///
/// The d_in-channel input is projected into `subspaces` groups of width
/// d_out / subspaces; group p is filtered by its own Chebyshev polynomial.
struct BankLayerParams {
    std::vector<Matrix> proj_W;  ///< each d_in x subspace_dim
    std::vector<Vector> proj_b;  ///< each subspace_dim
    std::vector<FilterCoeffs> filters;

    int subspaces() const noexcept { return static_cast<int>(proj_W.size()); }
    int order() const noexcept { return filters.empty() ? 0 : filters.front().order(); }
    Index input_dim() const noexcept { return proj_W.empty() ? 0 : proj_W.front().rows(); }
    Index subspace_dim() const noexcept { return proj_W.empty() ? 0 : proj_W.front().cols(); }
    Index output_dim() const noexcept { return subspace_dim() * subspaces(); }
};

/// Gradient of the objective with respect to one layer, shape-matched to BankLayerParams.
struct LayerGradients {
    std::vector<Matrix> proj_W;
    std::vector<Vector> proj_b;
    std::vector<Vector> alpha;

    static LayerGradients zeros_like(const BankLayerParams& params);
};

/// Throws ConstructionError unless all shapes agree and every entry is finite.
void validate(const BankLayerParams& params);

/// Subspace count actually used for a layer: the requested one, except that a
/// single-channel input gets one subspace per output channel.
int effective_subspaces(Index d_in, Index d_out, int requested);

/// All-zero parameters (filters included).
BankLayerParams zero_bank_layer(Index d_in, Index d_out, int subspaces, int order);

/// W uniform in +-sqrt(6 / (d_in + d_out/s)), b = 0, alpha uniform in +-1/sqrt(K+1).
BankLayerParams init_bank_layer(Index d_in, Index d_out, int subspaces, int order, std::mt19937_64& rng);

/// R_[p] = X W_[p] + 1 b_[p]^T for every subspace.
std::vector<Matrix> subspace_project(const BankLayerParams& params, const Matrix& x);

/// Intermediate values kept for the reverse pass.
struct BankLayerCache {
    Matrix input;
    std::vector<Matrix> terms;  ///< T_k(L~) R over the concatenated projection
    Matrix pre_activation;      ///< concat_p H_[p]
    Vector row_norms;           ///< l2 norms of ReLU(pre_activation) rows
    Matrix output;
};

/// l2_normalize_rows(ReLU(concat_p (g_[p] * R_[p] + R_[p]))).
Matrix bank_forward(const BankLayerParams& params, const Graph& g, const Matrix& x);
Matrix bank_forward(const BankLayerParams& params, const Batch& b, const Matrix& x);
Matrix bank_forward(const BankLayerParams& params, const Graph& g, const Matrix& x, BankLayerCache& cache);

/// Accumulates parameter gradients into `grads` and returns dL/dX.
/// ReLU and row normalization use a zero subgradient at zero.
Matrix bank_backward(const BankLayerParams& params, const Graph& g, const BankLayerCache& cache,
                     const Matrix& grad_output, LayerGradients& grads);

/// Rows scaled to unit l2 norm; zero rows stay zero.
Matrix l2_normalize_rows(const Matrix& x);

/// Offset added to coefficient norms in the cosine denominator.
inline constexpr double kDiversityEpsilon = 1e-12;

struct DiversityArgmax {
    double value = 0.0;
    int p = -1;  ///< -1 when there is no pair (s < 2)
    int q = -1;
};

/// max_{p != q} |<a_p, a_q>| / ((|a_p| + eps)(|a_q| + eps)); ties resolved to the
/// lexicographically smallest (p, q).
DiversityArgmax diversity_argmax(std::span<const FilterCoeffs> filters);
double diversity_penalty(std::span<const FilterCoeffs> filters);

/// Adds scale * dOmega/dalpha into alpha_grads (one vector per filter),
/// flowing through the designated argmax pair only.
void diversity_backward(std::span<const FilterCoeffs> filters, double scale, std::vector<Vector>& alpha_grads);

enum class ParamConvention {
    PerSubspace,  ///< d_in d_out + d_out + s (K+1)
    SharedOrder,   ///< d_in d_out + d_out + (K+1)
};

std::int64_t bank_layer_param_count(const BankLayerParams& params, ParamConvention convention);
std::int64_t bank_layer_param_count(Index d_in, Index d_out, int subspaces, int order, ParamConvention convention);

}  // namespace bankgcn
