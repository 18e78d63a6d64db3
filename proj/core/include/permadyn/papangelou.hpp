#ifndef PERMADYN_PAPANGELOU_HPP
#define PERMADYN_PAPANGELOU_HPP

#include <functional>
#include <vector>

#include "permadyn/cox.hpp"

namespace permadyn {

/// Conditional intensity provider r(cell, gamma) for dynamics and estimators.
/// `r_add(x, gamma)` is the intensity of adding a point at x given gamma.
class PapangelouModel {
public:
    virtual ~PapangelouModel() = default;
    virtual double r_add(int cell, const Configuration& gamma) const = 0;
};

/// Exact discrete Papangelou intensity of the permanental process, from
/// weight ratios of a validated engine.
class CoxPapangelou final : public PapangelouModel {
public:
    explicit CoxPapangelou(const WeightEngine& engine) : engine_(&engine) {}
    double r_add(int cell, const Configuration& gamma) const override {
        return engine_->papangelou_ratio(cell, gamma);
    }

private:
    const WeightEngine* engine_;
};

/// Poisson baseline: the intensity does not depend on the configuration.
class PoissonPapangelou final : public PapangelouModel {
public:
    explicit PoissonPapangelou(Eigen::VectorXd g) : g_(std::move(g)) {}
    double r_add(int cell, const Configuration&) const override { return g_(cell); }

private:
    Eigen::VectorXd g_;
};

enum class PapangelouMethod { Mc, Ratio };

struct PapangelouEstimate {
    int cell = 0;
    double value = 0.0;
    double std_error = 0.0;  // mc only
    PapangelouMethod method = PapangelouMethod::Ratio;
    double effective_sample_size = 0.0;  // mc only
};

/// Bayes-ratio realization of the conditional expectation defining r:
///   r(x, gamma) = E[g(x) w_gamma(g)] / E[w_gamma(g)],
/// where w_gamma is the conditional Poisson likelihood of the observed
/// counts under intensity g. Importance measure is the field prior itself.
/// Throws DegenerateWeight when the denominator's effective sample size
/// drops below 50.
PapangelouEstimate papangelou_mc(const KernelMatrix& k, int l, int cell,
                                 const Configuration& gamma, int n_mc, Rng& rng);

/// Exact ratio method (delegates to the weight engine).
PapangelouEstimate papangelou_ratio(const WeightEngine& engine, int cell,
                                    const Configuration& gamma);

using TestFunctional = std::function<double(int cell, const Configuration&)>;

struct GnzResult {
    double lhs = 0.0;        // mean of sum_{x in gamma} F(x, gamma)
    double rhs = 0.0;        // mean of dv * sum_x r(x, gamma) F(x, gamma + x)
    double pooled_se = 0.0;  // SE of the per-sample difference
    long skipped = 0;        // samples beyond the weight-ratio point cap
};

/// Empirical two-sided check of the add-one-point identity over samples.
GnzResult gnz_check(const std::vector<ProcessSample>& samples, const PapangelouModel& model,
                    const TestFunctional& f, double cell_volume, int max_points_for_ratio);

} // namespace permadyn

#endif
