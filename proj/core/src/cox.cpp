#include "permadyn/cox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "permadyn/alpha_permanent.hpp"
#include "permadyn/errors.hpp"
#include "permadyn/quadrature.hpp"

namespace permadyn {

ProcessSample sample_cox(const GridSpec& grid, const FieldFactor& factor, int l,
                         std::uint64_t master_seed, std::uint64_t replica,
                         bool keep_intensity) {
    GaussianFieldSample fields = sample_fields(factor, l, master_seed, replica);
    Rng rng = Rng::stream(master_seed, "poisson", replica);
    Configuration gamma(grid.total_cells());
    const double dv = grid.cell_volume();
    for (int i = 0; i < grid.total_cells(); ++i) {
        const long c = rng.poisson(fields.intensity(i) * dv);
        for (long t = 0; t < c; ++t) gamma.add_point(i);
    }
    ProcessSample out;
    out.gamma = std::move(gamma);
    out.seed = master_seed;
    out.replica = replica;
    if (keep_intensity) out.intensity = fields.intensity;
    return out;
}

ProcessSample sample_poisson(const GridSpec& grid, const Eigen::VectorXd& g,
                             std::uint64_t master_seed, std::uint64_t replica) {
    if (g.size() != grid.total_cells())
        throw std::invalid_argument("intensity vector size does not match grid");
    if (g.minCoeff() < 0.0)
        throw std::invalid_argument("Poisson intensity must be non-negative");
    Rng rng = Rng::stream(master_seed, "poisson", replica);
    Configuration gamma(grid.total_cells());
    const double dv = grid.cell_volume();
    for (int i = 0; i < grid.total_cells(); ++i) {
        const long c = rng.poisson(g(i) * dv);
        for (long t = 0; t < c; ++t) gamma.add_point(i);
    }
    ProcessSample out;
    out.gamma = std::move(gamma);
    out.seed = master_seed;
    out.replica = replica;
    out.intensity = g;
    return out;
}

double correlation_theory(const KernelMatrix& k, int l, const std::vector<int>& cells) {
    const int n = static_cast<int>(cells.size());
    Eigen::MatrixXd sub(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            sub(a, b) = l * k.values(cells[static_cast<std::size_t>(a)],
                                     cells[static_cast<std::size_t>(b)]);
    return per_alpha(sub, 2.0 / l);
}

std::vector<CorrelationEstimate> estimate_correlations(
    const std::vector<ProcessSample>& samples, const std::vector<std::vector<int>>& tuples,
    const KernelMatrix& k, int l) {
    std::vector<CorrelationEstimate> out;
    out.reserve(tuples.size());
    const double dv = k.cell_volume();
    for (const auto& tuple : tuples) {
        const int n = static_cast<int>(tuple.size());
        if (n < 1 || n > 4)
            throw std::invalid_argument("correlation order must be in 1..4");
        // multiplicity of each distinct cell in the tuple
        std::map<int, int> mult;
        for (int c : tuple) ++mult[c];
        const double scale = std::pow(dv, -n);
        CompensatedSum sum, sum_sq;
        for (const auto& s : samples) {
            double prod = 1.0;
            for (const auto& [cell, m] : mult)
                for (int t = 0; t < m; ++t) prod *= s.gamma.count(cell) - t;
            prod *= scale;
            sum.add(prod);
            sum_sq.add(prod * prod);
        }
        const double nn = static_cast<double>(samples.size());
        const double mean = sum.value() / nn;
        const double var = std::max(0.0, sum_sq.value() / nn - mean * mean);
        CorrelationEstimate est;
        est.cells = tuple;
        est.empirical = mean;
        est.std_error = std::sqrt(var / nn);
        est.theory = correlation_theory(k, l, tuple);
        out.push_back(std::move(est));
    }
    return out;
}

WeightEngine::WeightEngine(KernelMatrix k, int l) : kernel_(std::move(k)), l_(l) {
    if (l_ < 1) throw std::invalid_argument("l must be >= 1");
    alpha_ = 2.0 / l_;
    const int n = kernel_.grid.total_cells();
    const double dv = kernel_.cell_volume();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + 2.0 * dv * kernel_.values;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    resolvent_ = static_cast<double>(l_) * kernel_.values * lu.inverse();
    // log det(I + 2 dv K), always positive definite for PSD K
    double log_det = 0.0;
    for (int i = 0; i < n; ++i) log_det += std::log(std::abs(lu.matrixLU()(i, i)));
    log_norm_ = -0.5 * l_ * log_det;
}

double WeightEngine::per_alpha_repeated(const Configuration& gamma) const {
    if (gamma.total() == 0) return 1.0;
    {
        std::lock_guard<std::mutex> lock(memo_mutex_);
        auto it = per_memo_.find(gamma.counts());
        if (it != per_memo_.end()) return it->second;
    }
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(gamma.total()));
    for (int c = 0; c < gamma.n_cells(); ++c)
        for (int t = 0; t < gamma.count(c); ++t) idx.push_back(c);
    const int n = static_cast<int>(idx.size());
    Eigen::MatrixXd rep(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            rep(a, b) = resolvent_(idx[static_cast<std::size_t>(a)],
                                   idx[static_cast<std::size_t>(b)]);
    const double value = per_alpha(rep, alpha_);
    std::lock_guard<std::mutex> lock(memo_mutex_);
    per_memo_.emplace(gamma.counts(), value);
    return value;
}

double WeightEngine::weight_perm(const Configuration& gamma) const {
    if (!validated_)
        throw UnvalidatedFormula(
            "perm weights requested before the validation suite passed for this (l, grid) class");
    if (gamma.total() > kMaxPoints)
        throw MatrixTooLarge("perm weight limited to " + std::to_string(kMaxPoints) + " points, got " +
                             std::to_string(gamma.total()));
    double log_fact = 0.0;
    for (int c = 0; c < gamma.n_cells(); ++c)
        log_fact += std::lgamma(gamma.count(c) + 1.0);
    const double dv = kernel_.cell_volume();
    const double scale =
        std::exp(log_norm_ + gamma.total() * std::log(dv) - log_fact);
    return scale * per_alpha_repeated(gamma);
}

double WeightEngine::weight_quadrature(const Configuration& gamma) const {
    const int cells = kernel_.grid.total_cells();
    const double dv = kernel_.cell_volume();
    if (cells == 1) {
        // g ~ Gamma(l/2, 2 sigma^2); Gauss-Laguerre on the normalized Gamma
        const double sigma_sq = kernel_.values(0, 0);
        const int n = gamma.count(0);
        if (sigma_sq <= 0.0) return n == 0 ? 1.0 : 0.0;
        const double shape = 0.5 * l_;
        const double theta = 2.0 * sigma_sq;
        QuadratureRule rule = gauss_laguerre_gamma(96, shape);
        CompensatedSum acc;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double g = theta * rule.nodes[q];
            acc.add(rule.weights[q] * std::exp(-g * dv) * std::pow(g * dv, n));
        }
        return acc.value() / std::tgamma(n + 1.0);
    }
    if (cells == 2 && l_ <= 2) {
        // tensor Gauss-Hermite over the 2*l field coordinates
        Eigen::LLT<Eigen::MatrixXd> llt(
            kernel_.values + 1e-14 * kernel_.max_diag() * Eigen::MatrixXd::Identity(2, 2));
        if (llt.info() != Eigen::Success)
            throw FactorizationFailed("2-cell covariance not factorizable for quadrature");
        const Eigen::MatrixXd f = llt.matrixL();
        const int nodes_per_dim = (l_ == 1) ? 80 : 36;
        QuadratureRule rule = gauss_hermite_prob(nodes_per_dim);
        const int dims = 2 * l_;
        const int n0 = gamma.count(0);
        const int n1 = gamma.count(1);
        std::vector<std::size_t> digit(static_cast<std::size_t>(dims), 0);
        CompensatedSum acc;
        for (;;) {
            double w = 1.0;
            double g0 = 0.0, g1 = 0.0;
            for (int field = 0; field < l_; ++field) {
                const double x0 = rule.nodes[digit[static_cast<std::size_t>(2 * field)]];
                const double x1 = rule.nodes[digit[static_cast<std::size_t>(2 * field + 1)]];
                const double y0 = f(0, 0) * x0;
                const double y1 = f(1, 0) * x0 + f(1, 1) * x1;
                g0 += y0 * y0;
                g1 += y1 * y1;
            }
            for (int dmn = 0; dmn < dims; ++dmn)
                w *= rule.weights[digit[static_cast<std::size_t>(dmn)]];
            acc.add(w * std::exp(-(g0 + g1) * dv) * std::pow(g0 * dv, n0) *
                    std::pow(g1 * dv, n1));
            int pos = 0;
            while (pos < dims) {
                if (++digit[static_cast<std::size_t>(pos)] < rule.nodes.size()) break;
                digit[static_cast<std::size_t>(pos)] = 0;
                ++pos;
            }
            if (pos == dims) break;
        }
        return acc.value() / (std::tgamma(n0 + 1.0) * std::tgamma(n1 + 1.0));
    }
    throw std::invalid_argument(
        "quadrature weights support 1-cell grids (any l) and 2-cell grids with l <= 2");
}

WeightEstimate WeightEngine::weight_mc(const Configuration& gamma, Rng& rng, int n_draws) const {
    FieldFactor factor(kernel_);
    const double dv = kernel_.cell_volume();
    double log_fact = 0.0;
    for (int c = 0; c < gamma.n_cells(); ++c)
        log_fact += std::lgamma(gamma.count(c) + 1.0);
    CompensatedSum sum, sum_sq;
    for (int t = 0; t < n_draws; ++t) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(kernel_.grid.total_cells());
        for (int i = 0; i < l_; ++i) {
            Eigen::VectorXd y = factor.sample(rng);
            g.array() += y.array().square();
        }
        double log_w = -log_fact;
        bool zero = false;
        for (int c = 0; c < gamma.n_cells(); ++c) {
            const double lambda = g(c) * dv;
            log_w -= lambda;
            if (gamma.count(c) > 0) {
                if (lambda <= 0.0) {
                    zero = true;
                    break;
                }
                log_w += gamma.count(c) * std::log(lambda);
            }
        }
        const double w = zero ? 0.0 : std::exp(log_w);
        sum.add(w);
        sum_sq.add(w * w);
    }
    const double n = static_cast<double>(n_draws);
    const double mean = sum.value() / n;
    const double var = std::max(0.0, sum_sq.value() / n - mean * mean);
    return WeightEstimate{mean, std::sqrt(var / n)};
}

double WeightEngine::weight(const Configuration& gamma, WeightMethod method, Rng* rng,
                            int n_draws) const {
    switch (method) {
        case WeightMethod::Perm:
            return weight_perm(gamma);
        case WeightMethod::Quadrature:
            return weight_quadrature(gamma);
        case WeightMethod::Mc: {
            if (rng == nullptr)
                throw std::invalid_argument("mc weight needs an RNG");
            return weight_mc(gamma, *rng, n_draws).value;
        }
    }
    throw std::invalid_argument("unknown weight method");
}

double WeightEngine::papangelou_ratio(int cell, const Configuration& gamma) const {
    if (!validated_)
        throw UnvalidatedFormula(
            "papangelou_ratio requested before the validation suite passed for this (l, grid) class");
    if (gamma.total() + 1 > kMaxPoints)
        throw MatrixTooLarge("papangelou_ratio needs total+1 <= " + std::to_string(kMaxPoints));
    const double denom = per_alpha_repeated(gamma);
    if (denom <= 0.0) return 0.0;  // degenerate kernel: impossible configuration
    Configuration plus = gamma;
    plus.add_point(cell);
    return per_alpha_repeated(plus) / denom;
}

void WeightEngine::validate(std::uint64_t seed) {
    if (validated_) return;
    const double dv = kernel_.cell_volume();
    const int n = kernel_.grid.total_cells();

    // representative covariance blocks out of this kernel
    int top = 0;
    for (int i = 1; i < n; ++i)
        if (kernel_.values(i, i) > kernel_.values(top, top)) top = i;
    int mate = (top + 1) % n;

    auto approved = [&](const Eigen::MatrixXd& cov, const std::vector<int>& counts,
                        bool use_quadrature) {
        WeightEngine sub = make_engine_from_covariance(cov, dv, l_);
        sub.validated_ = true;  // allow the sub-engine's own perm path
        const Configuration gamma{counts};
        const double perm = sub.weight_perm(gamma);
        if (use_quadrature) {
            const double quad = sub.weight_quadrature(gamma);
            const double rel = std::abs(perm - quad) / std::max({std::abs(quad), 1e-300});
            if (rel > 1e-6)
                throw UnvalidatedFormula("perm vs quadrature mismatch " + std::to_string(rel));
        } else {
            Rng rng = Rng::stream(seed, "weight-validate", static_cast<std::uint64_t>(counts.size()),
                                  static_cast<std::uint64_t>(gamma.total()));
            const WeightEstimate mc = sub.weight_mc(gamma, rng, 200000);
            const double band = 5.0 * std::max(mc.std_error, 1e-12);
            if (std::abs(perm - mc.value) > band)
                throw UnvalidatedFormula("perm vs mc mismatch beyond 5 SE");
        }
    };

    Eigen::MatrixXd cov1(1, 1);
    cov1 << kernel_.values(top, top);
    for (int c : {0, 1, 2, 3}) approved(cov1, {c}, true);

    if (n >= 2) {
        Eigen::MatrixXd cov2(2, 2);
        cov2 << kernel_.values(top, top), kernel_.values(top, mate), kernel_.values(mate, top),
            kernel_.values(mate, mate);
        const bool quad2 = (l_ <= 2);
        approved(cov2, {0, 0}, quad2);
        approved(cov2, {1, 0}, quad2);
        approved(cov2, {1, 1}, quad2);
        approved(cov2, {2, 1}, quad2);
    }
    if (n >= 3) {
        int third = (mate + 1) % n;
        Eigen::MatrixXd cov3(3, 3);
        std::array<int, 3> pick{top, mate, third};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                cov3(a, b) = kernel_.values(pick[static_cast<std::size_t>(a)],
                                            pick[static_cast<std::size_t>(b)]);
        approved(cov3, {1, 1, 0}, false);
        approved(cov3, {2, 0, 1}, false);
    }
    validated_ = true;
}

WeightEngine make_engine_from_covariance(const Eigen::MatrixXd& cov, double cell_volume, int l) {
    const int m = static_cast<int>(cov.rows());
    GridSpec grid(1, cell_volume * m, m, true);
    KernelMatrix k{grid, cov};
    return WeightEngine(std::move(k), l);
}

} // namespace permadyn
