#include "bankgcn/check_suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bankgcn/training.hpp"

namespace bankgcn {

Graph random_graph(std::mt19937_64& rng, Index n, double edge_probability, Index feature_dim, int label,
                   bool no_isolated) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Edge> edges;
    Eigen::MatrixXi present = Eigen::MatrixXi::Zero(n, n);
    if (no_isolated) {
        for (Index v = 1; v < n; ++v) {
            const auto parent = static_cast<Index>(unit(rng) * static_cast<double>(v));
            edges.push_back({parent, v, 1.0});
            present(parent, v) = 1;
        }
    }
    for (Index a = 0; a < n; ++a) {
        for (Index b = a + 1; b < n; ++b) {
            if (!present(a, b) && unit(rng) < edge_probability) edges.push_back({a, b, 1.0});
        }
    }
    Matrix x(n, feature_dim);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
    return build_graph(n, edges, std::move(x), label);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sci(double v) {
    std::ostringstream ss;
    ss.precision(3);
    ss << std::scientific << v;
    return ss.str();
}

FilterCoeffs random_filter(std::mt19937_64& rng, int order) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector a(order + 1);
    for (Index k = 0; k <= order; ++k) a[k] = gauss(rng);
    return FilterCoeffs(std::move(a));
}

}  // namespace

CheckResult check_spectral_equivalence(std::mt19937_64& rng, int trials) {
    const auto start = Clock::now();
    std::uniform_int_distribution<Index> nodes(1, 12);
    std::uniform_int_distribution<int> orders(1, 4);
    std::uniform_real_distribution<double> density(0.0, 0.8);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Graph g = random_graph(rng, nodes(rng), density(rng), 3, 0, false);
        const FilterCoeffs f = random_filter(rng, orders(rng));
        const Matrix fast = cheb_filter_apply(g, f, g.features());
        const Matrix slow = spectral_filter_oracle(eig_laplacian(g), f, g.features());
        worst = std::max(worst, (fast - slow).cwiseAbs().maxCoeff());
    }
    return {"spectral equivalence", worst <= 1e-9,
            std::to_string(trials) + " graphs, max abs error " + sci(worst) + " (tol 1e-9)", seconds_since(start)};
}

CheckResult check_gcn_equivalence(std::mt19937_64& rng, int trials) {
    const auto start = Clock::now();
    std::uniform_int_distribution<Index> nodes(2, 12);
    std::uniform_real_distribution<double> density(0.0, 0.6);
    std::uniform_int_distribution<int> extra(0, 3);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Graph g = random_graph(rng, nodes(rng), density(rng), 4, 0, true);
        Vector alpha = Vector::Zero(2 + extra(rng));
        alpha[0] = 1.0;
        alpha[1] = -1.0;
        const Matrix& x = g.features();
        const Matrix propagated = x + g.inv_sqrt_degree().asDiagonal() *
                                          (g.adjacency() * (g.inv_sqrt_degree().asDiagonal() * x));
        const Matrix filtered = cheb_filter_apply(g, FilterCoeffs(alpha), x);
        worst = std::max(worst, (propagated - filtered).cwiseAbs().maxCoeff());
    }
    return {"GCN equivalence", worst <= 1e-10,
            std::to_string(trials) + " graphs, max abs error " + sci(worst) + " (tol 1e-10)", seconds_since(start)};
}

CheckResult check_permutation_invariance(std::mt19937_64& rng, int trials) {
    const auto start = Clock::now();
    std::uniform_int_distribution<Index> nodes(3, 10);
    std::uniform_int_distribution<int> batch_size(2, 5);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        ModelSpec spec;
        spec.input_dim = 3;
        spec.widths = {8, 8};
        spec.subspaces = 4;
        spec.order = 2;
        spec.num_classes = 3;
        const ModelParams params = init_model(spec, rng);

        std::vector<Graph> graphs;
        const int count = batch_size(rng);
        for (int k = 0; k < count; ++k) graphs.push_back(random_graph(rng, nodes(rng), 0.4, 3, k % 3, false));
        const Matrix base = model_logits(params, batch_graphs(graphs));

        // Relabel nodes inside every graph.
        std::vector<Graph> relabeled;
        for (const auto& g : graphs) {
            Permutation perm(static_cast<std::size_t>(g.num_nodes()));
            std::iota(perm.begin(), perm.end(), Index{0});
            std::shuffle(perm.begin(), perm.end(), rng);
            relabeled.push_back(permute_graph(g, perm));
        }
        worst = std::max(worst, (model_logits(params, batch_graphs(relabeled)) - base).cwiseAbs().maxCoeff());

        // Reorder the batch.
        std::vector<std::size_t> order(graphs.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        const Matrix shuffled = model_logits(params, batch_graphs(graphs, order));
        for (std::size_t k = 0; k < order.size(); ++k) {
            worst = std::max(worst, (shuffled.row(static_cast<Index>(k)) - base.row(static_cast<Index>(order[k])))
                                        .cwiseAbs()
                                        .maxCoeff());
        }
    }
    return {"permutation invariance", worst <= 1e-10,
            std::to_string(trials) + " trials, max logit change " + sci(worst) + " (tol 1e-10)",
            seconds_since(start)};
}

CheckResult check_gradients(std::mt19937_64& rng, bool inject_fault) {
    const auto start = Clock::now();
    std::vector<Graph> graphs;
    for (int k = 0; k < 4; ++k) graphs.push_back(random_graph(rng, 5 + k, 0.5, 3, k % 3, false));
    const Batch batch = batch_graphs(graphs);

    bool all_passed = true;
    std::size_t checked = 0;
    double worst = 0.0;
    std::string first_failure;
    for (double gamma : {0.0, 10.0}) {
        for (int s : {1, 4}) {
            for (int order : {1, 3}) {
                ModelSpec spec;
                spec.input_dim = 3;
                spec.widths = {8, 8, 8};
                spec.subspaces = s;
                spec.order = order;
                spec.num_classes = 3;
                spec.gamma = gamma;
                const ModelParams params = init_model(spec, rng);
                FdOptions options;
                options.seed = rng();
                options.inject_fault = inject_fault;
                const FdReport report = finite_difference_check(params, batch, options);
                checked += report.checked;
                worst = std::max(worst, report.max_rel_error);
                if (!report.passed && all_passed) {
                    std::ostringstream ss;
                    ss << "; first failure at gamma=" << gamma << " s=" << s << " K=" << order << ": "
                       << report.describe();
                    first_failure = ss.str();
                }
                all_passed = all_passed && report.passed;
            }
        }
    }
    return {"finite-difference gradients", all_passed,
            "8 configurations, " + std::to_string(checked) + " coordinates, max rel error " + sci(worst) +
                " (tol 1e-4)" + first_failure,
            seconds_since(start)};
}

CheckResult check_diversity_bounds(std::mt19937_64& rng, int trials) {
    const auto start = Clock::now();
    std::uniform_int_distribution<int> subspaces(2, 8);
    std::uniform_int_distribution<int> orders(1, 4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    bool ok = true;
    double lo = 1.0;
    double hi = 0.0;
    for (int t = 0; t < trials; ++t) {
        const int order = orders(rng);
        std::vector<FilterCoeffs> filters;
        const int s = subspaces(rng);
        for (int p = 0; p < s; ++p) filters.push_back(random_filter(rng, order));
        const double omega = diversity_penalty(filters);
        lo = std::min(lo, omega);
        hi = std::max(hi, omega);
        ok = ok && omega >= 0.0 && omega <= 1.0;
    }

    // Orthogonal set: scaled standard basis vectors.
    std::vector<FilterCoeffs> orthogonal;
    for (int p = 0; p < 4; ++p) {
        Vector a = Vector::Zero(4);
        a[p] = 1.0 + gauss(rng) * gauss(rng);
        orthogonal.emplace_back(std::move(a));
    }
    const double omega_orth = diversity_penalty(orthogonal);

    // Colinear pair inside an otherwise orthogonal set.
    std::vector<FilterCoeffs> colinear = orthogonal;
    colinear[3].alpha = -2.5 * colinear[1].alpha;
    const double omega_col = diversity_penalty(colinear);

    ok = ok && omega_orth == 0.0 && std::abs(omega_col - 1.0) <= 1e-9;
    std::ostringstream ss;
    ss << trials << " random sets in [" << lo << ", " << hi << "]; orthogonal " << omega_orth << "; colinear "
       << omega_col;
    return {"diversity bounds", ok, ss.str(), seconds_since(start)};
}

std::vector<CheckResult> run_check_suite(const CheckOptions& options) {
    std::mt19937_64 rng(options.seed);
    std::vector<CheckResult> out;
    out.push_back(check_spectral_equivalence(rng));
    out.push_back(check_gcn_equivalence(rng));
    out.push_back(check_permutation_invariance(rng));
    out.push_back(check_gradients(rng, options.inject_fault));
    out.push_back(check_diversity_bounds(rng));
    return out;
}

std::string format_check_table(const std::vector<CheckResult>& results) {
    std::size_t width = 0;
    for (const auto& r : results) width = std::max(width, r.name.size());
    std::ostringstream ss;
    for (const auto& r : results) {
        ss << (r.passed ? "PASS  " : "FAIL  ") << r.name << std::string(width - r.name.size() + 2, ' ');
        ss.precision(2);
        ss << std::fixed << r.seconds << "s  " << r.detail << '\n';
    }
    return ss.str();
}

}  // namespace bankgcn
