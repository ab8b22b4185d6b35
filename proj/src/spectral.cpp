#include "bankgcn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace bankgcn {

namespace {

constexpr double kClampTolerance = 1e-9;

void require_basis_rows(const SpectralBasis& basis, Index rows, const char* what) {
    if (rows != basis.size()) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(basis.size()) + " rows, got " +
                             std::to_string(rows));
    }
}

}  // namespace

void validate(const FilterCoeffs& coeffs) {
    if (coeffs.alpha.size() < 1) {
        throw DomainError("filter needs at least one coefficient");
    }
    if (!coeffs.alpha.allFinite()) {
        throw DomainError("filter coefficients must be finite");
    }
}

SpectralBasis eig_laplacian(const Graph& g, Index oracle_limit) {
    if (g.num_nodes() > oracle_limit) {
        throw OracleSizeError("eig_laplacian: n = " + std::to_string(g.num_nodes()) + " exceeds oracle limit " +
                              std::to_string(oracle_limit));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(dense_laplacian(g));
    if (solver.info() != Eigen::Success) {
        throw Error("eig_laplacian: eigensolver did not converge");
    }
    SpectralBasis basis{solver.eigenvalues(), solver.eigenvectors()};
    for (Index k = 0; k < basis.eigenvalues.size(); ++k) {
        double& lam = basis.eigenvalues[k];
        if (lam < 0.0 && lam > -kClampTolerance) lam = 0.0;
        if (lam > 2.0 && lam < 2.0 + kClampTolerance) lam = 2.0;
    }
    return basis;
}

Matrix gft(const SpectralBasis& basis, const Matrix& x) {
    require_basis_rows(basis, x.rows(), "gft");
    return basis.eigenvectors.transpose() * x;
}

Matrix igft(const SpectralBasis& basis, const Matrix& xhat) {
    require_basis_rows(basis, xhat.rows(), "igft");
    return basis.eigenvectors * xhat;
}

double cheb_eval_scalar(const FilterCoeffs& coeffs, double lambda) {
    validate(coeffs);
    if (!(lambda >= 0.0 && lambda <= 2.0)) {
        throw DomainError("cheb_eval_scalar: lambda = " + std::to_string(lambda) + " outside [0, 2]");
    }
    const double mu = lambda - 1.0;
    double prev = 1.0;
    double curr = mu;
    double sum = coeffs.alpha[0];
    if (coeffs.order() >= 1) sum += coeffs.alpha[1] * curr;
    for (int k = 2; k <= coeffs.order(); ++k) {
        const double next = 2.0 * mu * curr - prev;
        sum += coeffs.alpha[k] * next;
        prev = curr;
        curr = next;
    }
    return sum;
}

std::vector<Matrix> chebyshev_terms(const Graph& g, const Matrix& r, int order) {
    require_rows(g, r.rows(), "chebyshev_terms");
    if (order < 0) {
        throw DomainError("chebyshev_terms: negative order");
    }
    std::vector<Matrix> terms;
    terms.reserve(static_cast<std::size_t>(order) + 1);
    terms.push_back(r);
    if (order >= 1) terms.push_back(scaled_laplacian_matvec(g, r));
    for (int k = 2; k <= order; ++k) {
        Matrix next = 2.0 * scaled_laplacian_matvec(g, terms[k - 1]) - terms[k - 2];
        terms.push_back(std::move(next));
    }
    return terms;
}

Matrix cheb_filter_apply(const Graph& g, const FilterCoeffs& coeffs, const Matrix& r) {
    validate(coeffs);
    require_rows(g, r.rows(), "cheb_filter_apply");
    // Keep only two recurrence terms alive.
    Matrix prev = r;
    Matrix out = coeffs.alpha[0] * r;
    if (coeffs.order() == 0) return out;
    Matrix curr = scaled_laplacian_matvec(g, r);
    out += coeffs.alpha[1] * curr;
    for (int k = 2; k <= coeffs.order(); ++k) {
        Matrix next = 2.0 * scaled_laplacian_matvec(g, curr) - prev;
        out += coeffs.alpha[k] * next;
        prev = std::move(curr);
        curr = std::move(next);
    }
    return out;
}

Matrix cheb_filter_columns(const Graph& g, const Matrix& coeffs, const Matrix& r) {
    require_rows(g, r.rows(), "cheb_filter_columns");
    if (coeffs.cols() != r.cols() || coeffs.rows() < 1) {
        throw DimensionError("cheb_filter_columns: coefficient matrix must be (K+1) x " + std::to_string(r.cols()));
    }
    const int order = static_cast<int>(coeffs.rows()) - 1;
    Matrix prev = r;
    Matrix out = r * coeffs.row(0).asDiagonal();
    if (order == 0) return out;
    Matrix curr = scaled_laplacian_matvec(g, r);
    out += curr * coeffs.row(1).asDiagonal();
    for (int k = 2; k <= order; ++k) {
        Matrix next = 2.0 * scaled_laplacian_matvec(g, curr) - prev;
        out += next * coeffs.row(k).asDiagonal();
        prev = std::move(curr);
        curr = std::move(next);
    }
    return out;
}

Matrix spectral_filter_oracle(const SpectralBasis& basis, const FilterCoeffs& coeffs, const Matrix& r) {
    require_basis_rows(basis, r.rows(), "spectral_filter_oracle");
    Vector response(basis.size());
    for (Index k = 0; k < basis.size(); ++k) {
        response[k] = cheb_eval_scalar(coeffs, basis.eigenvalues[k]);
    }
    return basis.eigenvectors * (response.asDiagonal() * (basis.eigenvectors.transpose() * r));
}

std::vector<ResponsePoint> frequency_response_grid(const FilterCoeffs& coeffs, int num_points) {
    if (num_points < 2) {
        throw DomainError("frequency_response_grid: need at least 2 points");
    }
    std::vector<ResponsePoint> grid;
    grid.reserve(static_cast<std::size_t>(num_points));
    for (int i = 0; i < num_points; ++i) {
        const double lambda = i == num_points - 1 ? 2.0 : 2.0 * i / (num_points - 1);
        grid.push_back({lambda, cheb_eval_scalar(coeffs, lambda)});
    }
    return grid;
}

}  // namespace bankgcn
