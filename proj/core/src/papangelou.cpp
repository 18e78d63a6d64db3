#include "permadyn/papangelou.hpp"

#include <cmath>
#include <stdexcept>

#include "permadyn/alpha_permanent.hpp"
#include "permadyn/errors.hpp"

namespace permadyn {

PapangelouEstimate papangelou_mc(const KernelMatrix& k, int l, int cell,
                                 const Configuration& gamma, int n_mc, Rng& rng) {
    if (n_mc < 10000)
        throw std::invalid_argument("papangelou_mc needs n_mc >= 1e4");
    const double dv = k.cell_volume();
    FieldFactor factor(k);

    std::vector<double> log_w(static_cast<std::size_t>(n_mc));
    std::vector<double> g_at(static_cast<std::size_t>(n_mc));
    for (int t = 0; t < n_mc; ++t) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(k.grid.total_cells());
        for (int i = 0; i < l; ++i) {
            Eigen::VectorXd y = factor.sample(rng);
            g.array() += y.array().square();
        }
        double lw = 0.0;
        for (int c = 0; c < gamma.n_cells(); ++c) {
            const double lambda = g(c) * dv;
            lw -= lambda;
            if (gamma.count(c) > 0)
                lw += (lambda > 0.0) ? gamma.count(c) * std::log(lambda)
                                     : -std::numeric_limits<double>::infinity();
        }
        log_w[static_cast<std::size_t>(t)] = lw;
        g_at[static_cast<std::size_t>(t)] = g(cell);
    }

    double max_lw = -std::numeric_limits<double>::infinity();
    for (double lw : log_w) max_lw = std::max(max_lw, lw);
    if (!std::isfinite(max_lw))
        throw DegenerateWeight("all conditional likelihoods vanished for this configuration");

    CompensatedSum num, den, den_sq;
    std::vector<double> w(static_cast<std::size_t>(n_mc));
    for (int t = 0; t < n_mc; ++t) {
        const double wt = std::exp(log_w[static_cast<std::size_t>(t)] - max_lw);
        w[static_cast<std::size_t>(t)] = wt;
        num.add(wt * g_at[static_cast<std::size_t>(t)]);
        den.add(wt);
        den_sq.add(wt * wt);
    }
    const double ess = den.value() * den.value() / std::max(den_sq.value(), 1e-300);
    if (ess < 50.0)
        throw DegenerateWeight("denominator effective sample size " + std::to_string(ess) +
                               " < 50; raise n_mc or shrink the configuration");
    if (den.value() <= 0.0)
        throw DegenerateWeight("denominator estimate is zero");

    const double ratio = num.value() / den.value();
    // delta-method SE of the ratio estimator
    CompensatedSum resid_sq;
    for (int t = 0; t < n_mc; ++t) {
        const double r = w[static_cast<std::size_t>(t)] *
                         (g_at[static_cast<std::size_t>(t)] - ratio);
        resid_sq.add(r * r);
    }
    const double n = static_cast<double>(n_mc);
    const double se = std::sqrt(resid_sq.value() / n) / (den.value() / n) / std::sqrt(n);

    PapangelouEstimate out;
    out.cell = cell;
    out.value = ratio;
    out.std_error = se;
    out.method = PapangelouMethod::Mc;
    out.effective_sample_size = ess;
    return out;
}

PapangelouEstimate papangelou_ratio(const WeightEngine& engine, int cell,
                                    const Configuration& gamma) {
    PapangelouEstimate out;
    out.cell = cell;
    out.value = engine.papangelou_ratio(cell, gamma);
    out.method = PapangelouMethod::Ratio;
    return out;
}

GnzResult gnz_check(const std::vector<ProcessSample>& samples, const PapangelouModel& model,
                    const TestFunctional& f, double cell_volume, int max_points_for_ratio) {
    if (samples.empty()) throw std::invalid_argument("gnz_check needs samples");
    CompensatedSum lhs_sum, rhs_sum, diff_sum, diff_sq;
    long used = 0, skipped = 0;
    for (const auto& s : samples) {
        if (s.gamma.total() + 1 > max_points_for_ratio) {
            ++skipped;
            continue;
        }
        double lhs = 0.0;
        for (int c = 0; c < s.gamma.n_cells(); ++c)
            if (s.gamma.count(c) > 0) lhs += s.gamma.count(c) * f(c, s.gamma);
        double rhs = 0.0;
        Configuration plus = s.gamma;
        for (int c = 0; c < s.gamma.n_cells(); ++c) {
            const double r = model.r_add(c, s.gamma);
            if (r == 0.0) continue;
            plus.add_point(c);
            rhs += r * f(c, plus);
            plus.remove_point(c);
        }
        rhs *= cell_volume;
        lhs_sum.add(lhs);
        rhs_sum.add(rhs);
        diff_sum.add(lhs - rhs);
        diff_sq.add((lhs - rhs) * (lhs - rhs));
        ++used;
    }
    if (used == 0) throw DegenerateWeight("all samples exceeded the ratio point cap");
    const double n = static_cast<double>(used);
    const double mean_diff = diff_sum.value() / n;
    const double var = std::max(0.0, diff_sq.value() / n - mean_diff * mean_diff);
    GnzResult out;
    out.lhs = lhs_sum.value() / n;
    out.rhs = rhs_sum.value() / n;
    out.pooled_se = std::sqrt(var / n);
    out.skipped = skipped;
    return out;
}

} // namespace permadyn
