#include "bankgcn/bank_layer.hpp"

#include <cmath>
#include <string>

namespace bankgcn {

namespace {

Matrix concat_projection(const BankLayerParams& params) {
    Matrix w(params.input_dim(), params.output_dim());
    const Index width = params.subspace_dim();
    for (int p = 0; p < params.subspaces(); ++p) {
        w.middleCols(p * width, width) = params.proj_W[p];
    }
    return w;
}

Eigen::RowVectorXd concat_bias(const BankLayerParams& params) {
    Eigen::RowVectorXd b(params.output_dim());
    const Index width = params.subspace_dim();
    for (int p = 0; p < params.subspaces(); ++p) {
        b.segment(p * width, width) = params.proj_b[p].transpose();
    }
    return b;
}

// (K+1) x d_out; every column of block p holds alpha_[p].
Matrix column_coefficients(const BankLayerParams& params) {
    Matrix c(params.order() + 1, params.output_dim());
    const Index width = params.subspace_dim();
    for (int p = 0; p < params.subspaces(); ++p) {
        c.middleCols(p * width, width) = params.filters[p].alpha.replicate(1, width);
    }
    return c;
}

void require_input(const BankLayerParams& params, const Matrix& x) {
    if (x.cols() != params.input_dim()) {
        throw DimensionError("bank layer expects " + std::to_string(params.input_dim()) + " input channels, got " +
                             std::to_string(x.cols()));
    }
}

}  // namespace

LayerGradients LayerGradients::zeros_like(const BankLayerParams& params) {
    LayerGradients g;
    for (int p = 0; p < params.subspaces(); ++p) {
        g.proj_W.push_back(Matrix::Zero(params.proj_W[p].rows(), params.proj_W[p].cols()));
        g.proj_b.push_back(Vector::Zero(params.proj_b[p].size()));
        g.alpha.push_back(Vector::Zero(params.filters[p].alpha.size()));
    }
    return g;
}

void validate(const BankLayerParams& params) {
    const int s = params.subspaces();
    if (s < 1) {
        throw ConstructionError("bank layer needs at least one subspace");
    }
    if (static_cast<int>(params.proj_b.size()) != s || static_cast<int>(params.filters.size()) != s) {
        throw ConstructionError("bank layer: projection, bias and filter counts differ");
    }
    const Index d_in = params.input_dim();
    const Index width = params.subspace_dim();
    const int order = params.order();
    if (width < 1 || d_in < 1) {
        throw ConstructionError("bank layer: empty projection");
    }
    for (int p = 0; p < s; ++p) {
        if (params.proj_W[p].rows() != d_in || params.proj_W[p].cols() != width ||
            params.proj_b[p].size() != width) {
            throw ConstructionError("bank layer: subspace " + std::to_string(p) + " has mismatched shape");
        }
        if (params.filters[p].order() != order || order < 0) {
            throw ConstructionError("bank layer: all filters must share the same order");
        }
        if (!params.proj_W[p].allFinite() || !params.proj_b[p].allFinite() || !params.filters[p].alpha.allFinite()) {
            throw ConstructionError("bank layer: non-finite parameter");
        }
    }
}

int effective_subspaces(Index d_in, Index d_out, int requested) {
    return d_in == 1 ? static_cast<int>(d_out) : requested;
}

BankLayerParams zero_bank_layer(Index d_in, Index d_out, int subspaces, int order) {
    if (subspaces < 1 || order < 0 || d_in < 1 || d_out < 1) {
        throw ConstructionError("bank layer: need d_in, d_out, s >= 1 and K >= 0");
    }
    if (d_out % subspaces != 0) {
        throw ConstructionError("bank layer: output width " + std::to_string(d_out) +
                                " is not divisible by subspace count " + std::to_string(subspaces));
    }
    const Index width = d_out / subspaces;
    BankLayerParams params;
    for (int p = 0; p < subspaces; ++p) {
        params.proj_W.push_back(Matrix::Zero(d_in, width));
        params.proj_b.push_back(Vector::Zero(width));
        params.filters.emplace_back(Vector::Zero(order + 1));
    }
    return params;
}

BankLayerParams init_bank_layer(Index d_in, Index d_out, int subspaces, int order, std::mt19937_64& rng) {
    BankLayerParams params = zero_bank_layer(d_in, d_out, subspaces, order);
    const double w_bound = std::sqrt(6.0 / static_cast<double>(d_in + params.subspace_dim()));
    const double a_bound = 1.0 / std::sqrt(static_cast<double>(order + 1));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int p = 0; p < subspaces; ++p) {
        params.proj_W[p] = params.proj_W[p].unaryExpr([&](double) { return w_bound * unit(rng); });
        params.filters[p].alpha = params.filters[p].alpha.unaryExpr([&](double) { return a_bound * unit(rng); });
    }
    return params;
}

std::vector<Matrix> subspace_project(const BankLayerParams& params, const Matrix& x) {
    require_input(params, x);
    std::vector<Matrix> out;
    out.reserve(params.proj_W.size());
    for (int p = 0; p < params.subspaces(); ++p) {
        Matrix r = x * params.proj_W[p];
        r.rowwise() += params.proj_b[p].transpose();
        out.push_back(std::move(r));
    }
    return out;
}

Matrix l2_normalize_rows(const Matrix& x) {
    Matrix out = x;
    for (Index i = 0; i < x.rows(); ++i) {
        const double norm = x.row(i).norm();
        if (norm > 0.0) out.row(i) /= norm;
    }
    return out;
}

Matrix bank_forward(const BankLayerParams& params, const Graph& g, const Matrix& x) {
    BankLayerCache cache;
    return bank_forward(params, g, x, cache);
}

Matrix bank_forward(const BankLayerParams& params, const Batch& b, const Matrix& x) {
    return bank_forward(params, b.merged, x);
}

Matrix bank_forward(const BankLayerParams& params, const Graph& g, const Matrix& x, BankLayerCache& cache) {
    require_input(params, x);
    require_rows(g, x.rows(), "bank_forward");
    const Matrix coeffs = column_coefficients(params);

    Matrix r = x * concat_projection(params);
    r.rowwise() += concat_bias(params);

    cache.input = x;
    cache.terms = chebyshev_terms(g, r, params.order());
    cache.pre_activation = r;  // full-pass shortcut
    for (int k = 0; k <= params.order(); ++k) {
        cache.pre_activation += cache.terms[k] * coeffs.row(k).asDiagonal();
    }
    const Matrix activated = cache.pre_activation.cwiseMax(0.0);
    cache.row_norms = activated.rowwise().norm();
    cache.output = activated;
    for (Index i = 0; i < activated.rows(); ++i) {
        if (cache.row_norms[i] > 0.0) cache.output.row(i) /= cache.row_norms[i];
    }
    return cache.output;
}

Matrix bank_backward(const BankLayerParams& params, const Graph& g, const BankLayerCache& cache,
                     const Matrix& grad_output, LayerGradients& grads) {
    const Matrix& y = cache.output;
    if (grad_output.rows() != y.rows() || grad_output.cols() != y.cols()) {
        throw DimensionError("bank_backward: gradient shape differs from layer output");
    }

    // Through row normalization: (I - y y^T) dy / |a|.
    Matrix grad_pre(y.rows(), y.cols());
    for (Index i = 0; i < y.rows(); ++i) {
        const double norm = cache.row_norms[i];
        if (norm > 0.0) {
            const double radial = y.row(i).dot(grad_output.row(i));
            grad_pre.row(i) = (grad_output.row(i) - radial * y.row(i)) / norm;
        } else {
            grad_pre.row(i).setZero();
        }
    }
    // Through ReLU.
    grad_pre = (cache.pre_activation.array() > 0.0).select(grad_pre, 0.0);

    const Index width = params.subspace_dim();
    for (int p = 0; p < params.subspaces(); ++p) {
        for (int k = 0; k <= params.order(); ++k) {
            grads.alpha[p][k] +=
                cache.terms[k].middleCols(p * width, width).cwiseProduct(grad_pre.middleCols(p * width, width)).sum();
        }
    }

    // T_k(L~) is symmetric, so the adjoint of the filter is the same filter.
    const Matrix grad_r = grad_pre + cheb_filter_columns(g, column_coefficients(params), grad_pre);
    for (int p = 0; p < params.subspaces(); ++p) {
        const auto block = grad_r.middleCols(p * width, width);
        grads.proj_W[p].noalias() += cache.input.transpose() * block;
        grads.proj_b[p] += block.colwise().sum().transpose();
    }
    return grad_r * concat_projection(params).transpose();
}

DiversityArgmax diversity_argmax(std::span<const FilterCoeffs> filters) {
    DiversityArgmax best;
    const int s = static_cast<int>(filters.size());
    for (int p = 0; p < s; ++p) {
        for (int q = p + 1; q < s; ++q) {
            const Vector& u = filters[p].alpha;
            const Vector& v = filters[q].alpha;
            const double cosine = std::abs(u.dot(v)) / ((u.norm() + kDiversityEpsilon) * (v.norm() + kDiversityEpsilon));
            if (best.p < 0 || cosine > best.value) {
                best = {cosine, p, q};
            }
        }
    }
    return best;
}

double diversity_penalty(std::span<const FilterCoeffs> filters) {
    return diversity_argmax(filters).value;
}

void diversity_backward(std::span<const FilterCoeffs> filters, double scale, std::vector<Vector>& alpha_grads) {
    const DiversityArgmax arg = diversity_argmax(filters);
    if (arg.p < 0 || scale == 0.0) return;
    const Vector& u = filters[arg.p].alpha;
    const Vector& v = filters[arg.q].alpha;
    const double nu = u.norm();
    const double nv = v.norm();
    const double c = u.dot(v);
    const double denom = (nu + kDiversityEpsilon) * (nv + kDiversityEpsilon);
    const double sign = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
    const double value = std::abs(c) / denom;

    Vector du = sign * v / denom;
    Vector dv = sign * u / denom;
    if (nu > 0.0) du -= value / (nu + kDiversityEpsilon) * u / nu;
    if (nv > 0.0) dv -= value / (nv + kDiversityEpsilon) * v / nv;
    alpha_grads[arg.p] += scale * du;
    alpha_grads[arg.q] += scale * dv;
}

std::int64_t bank_layer_param_count(Index d_in, Index d_out, int subspaces, int order, ParamConvention convention) {
    const std::int64_t dense = static_cast<std::int64_t>(d_in) * d_out + d_out;
    const std::int64_t coeffs = order + 1;
    return convention == ParamConvention::PerSubspace ? dense + subspaces * coeffs : dense + coeffs;
}

std::int64_t bank_layer_param_count(const BankLayerParams& params, ParamConvention convention) {
    return bank_layer_param_count(params.input_dim(), params.output_dim(), params.subspaces(), params.order(),
                                  convention);
}

}  // namespace bankgcn
