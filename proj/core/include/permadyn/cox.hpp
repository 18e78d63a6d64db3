#ifndef PERMADYN_COX_HPP
#define PERMADYN_COX_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "permadyn/gaussian_field.hpp"
#include "permadyn/grid.hpp"
#include "permadyn/kernel.hpp"
#include "permadyn/rng.hpp"

namespace permadyn {

/// One draw of the point process, with provenance.
struct ProcessSample {
    Configuration gamma;
    std::uint64_t seed = 0;
    std::uint64_t replica = 0;
    std::optional<Eigen::VectorXd> intensity;  // retained g, for diagnostics
};

/// Cox draw: l fields -> intensity g -> independent Poisson(g_i * cell_volume).
ProcessSample sample_cox(const GridSpec& grid, const FieldFactor& factor, int l,
                         std::uint64_t master_seed, std::uint64_t replica,
                         bool keep_intensity = false);

/// Poisson draw with a fixed intensity vector (g >= 0).
ProcessSample sample_poisson(const GridSpec& grid, const Eigen::VectorXd& g,
                             std::uint64_t master_seed, std::uint64_t replica);

/// Theoretical order-n correlation at the given cells: the alpha-permanent of
/// the scaled kernel l*k restricted to the cells, with alpha = 2/l (the index
/// of the permanental family generated by l squared real Gaussian fields).
double correlation_theory(const KernelMatrix& k, int l, const std::vector<int>& cells);

struct CorrelationEstimate {
    std::vector<int> cells;   // one tuple, length n <= 4
    double empirical = 0.0;   // factorial-moment estimator / cell_volume^n
    double std_error = 0.0;
    double theory = 0.0;
};

/// Unbiased correlation estimates at cell-center tuples via falling
/// factorials of the counts (handles repeated cells without bias).
std::vector<CorrelationEstimate> estimate_correlations(
    const std::vector<ProcessSample>& samples, const std::vector<std::vector<int>>& tuples,
    const KernelMatrix& k, int l);

enum class WeightMethod { Mc, Quadrature, Perm };

struct WeightEstimate {
    double value = 0.0;
    double std_error = 0.0;  // zero for deterministic methods
};

/// Configuration weights of the discrete permanental process and the exact
/// Papangelou intensity built from their ratios.
///
/// The closed form is
///   P(n) = det(I + 2 dv K)^(-l/2) * per_alpha(J[n]) * dv^|n| / prod n_i!,
/// with alpha = 2/l and J = l K (I + 2 dv K)^(-1); J[n] repeats rows/columns
/// by multiplicity. The `perm` method refuses to run until validate() has
/// cross-checked it against the mc and quadrature oracles for this (l, grid)
/// class. Ratios of these weights give
///   r(x, gamma) = per_alpha(J[gamma + x]) / per_alpha(J[gamma]),
/// which realizes the discrete add-one-point identity exactly.
class WeightEngine {
public:
    WeightEngine(KernelMatrix k, int l);

    int l() const { return l_; }
    double alpha() const { return alpha_; }
    const KernelMatrix& kernel() const { return kernel_; }
    const Eigen::MatrixXd& resolvent() const { return resolvent_; }
    double log_normalization() const { return log_norm_; }

    /// Exact probability mass of the count vector (perm method).
    double weight_perm(const Configuration& gamma) const;

    /// Deterministic quadrature oracle; grids of 1 cell (any l, Gauss-Laguerre
    /// on the Gamma mixture) or 2 cells with l <= 2 (tensor Gauss-Hermite).
    double weight_quadrature(const Configuration& gamma) const;

    /// Monte-Carlo oracle over fresh field draws.
    WeightEstimate weight_mc(const Configuration& gamma, Rng& rng, int n_draws) const;

    double weight(const Configuration& gamma, WeightMethod method, Rng* rng = nullptr,
                  int n_draws = 100000) const;

    /// Papangelou intensity r(cell, gamma) from weight ratios; memoized.
    double papangelou_ratio(int cell, const Configuration& gamma) const;

    /// Run the oracle cross-checks (1- and 2-cell quadrature at 1e-6 relative,
    /// 3-cell Monte Carlo at 5 SE) and unlock the perm method.
    void validate(std::uint64_t seed);
    bool validated() const { return validated_; }

    static constexpr int kMaxPoints = 10;  // perm weights cap: total points

private:
    double per_alpha_repeated(const Configuration& gamma) const;

    KernelMatrix kernel_;
    int l_;
    double alpha_;
    Eigen::MatrixXd resolvent_;
    double log_norm_;
    bool validated_ = false;
    mutable std::map<std::vector<int>, double> per_memo_;
    mutable std::mutex memo_mutex_;
};

/// Build a d=1 engine from an explicit covariance block (used by the
/// validation suite and by tests on hand-picked matrices).
WeightEngine make_engine_from_covariance(const Eigen::MatrixXd& cov, double cell_volume, int l);

} // namespace permadyn

#endif
