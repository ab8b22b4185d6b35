#pragma once

#include <vector>

#include "bankgcn/graph.hpp"

namespace bankgcn {

/// Chebyshev coefficients alpha^(0..K) of one polynomial filter.
struct FilterCoeffs {
    Vector alpha;

    FilterCoeffs() = default;
    explicit FilterCoeffs(Vector a) : alpha(std::move(a)) {}
    FilterCoeffs(std::initializer_list<double> a) : alpha(Eigen::Map<const Vector>(a.begin(), Index(a.size()))) {}

    int order() const noexcept { return static_cast<int>(alpha.size()) - 1; }
};

/// Throws DomainError on an empty or non-finite coefficient vector.
void validate(const FilterCoeffs& coeffs);

/// Dense eigendecomposition L = U diag(lambda) U^T, eigenvalues ascending.
struct SpectralBasis {
    Vector eigenvalues;
    Matrix eigenvectors;

    Index size() const noexcept { return eigenvalues.size(); }
};

inline constexpr Index kDefaultOracleLimit = 512;

SpectralBasis eig_laplacian(const Graph& g, Index oracle_limit = kDefaultOracleLimit);

/// Forward transform, column by column: U^T x.
Matrix gft(const SpectralBasis& basis, const Matrix& x);
/// Inverse transform: U xhat.
Matrix igft(const SpectralBasis& basis, const Matrix& xhat);

/// Frequency response sum_k alpha_k T_k(lambda - 1) for lambda in [0, 2].
double cheb_eval_scalar(const FilterCoeffs& coeffs, double lambda);

/// [T_0(L~) R, ..., T_K(L~) R] via the three-term recurrence; K sparse matvecs.
std::vector<Matrix> chebyshev_terms(const Graph& g, const Matrix& r, int order);

/// sum_k alpha_k T_k(L~) R.
Matrix cheb_filter_apply(const Graph& g, const FilterCoeffs& coeffs, const Matrix& r);

/// Per-column filtering: column c of the result is sum_k coeffs(k, c) T_k(L~) r.col(c).
/// coeffs has K+1 rows and r.cols() columns.
Matrix cheb_filter_columns(const Graph& g, const Matrix& coeffs, const Matrix& r);

/// U g(Lambda) U^T R with g evaluated by cheb_eval_scalar. Ground truth for cheb_filter_apply.
Matrix spectral_filter_oracle(const SpectralBasis& basis, const FilterCoeffs& coeffs, const Matrix& r);

struct ResponsePoint {
    double lambda;
    double response;
};

/// Uniform grid on [0, 2], endpoints included.
std::vector<ResponsePoint> frequency_response_grid(const FilterCoeffs& coeffs, int num_points);

}  // namespace bankgcn
