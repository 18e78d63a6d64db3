#ifndef PERMADYN_SCALING_HPP
#define PERMADYN_SCALING_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "permadyn/dynamics.hpp"

namespace permadyn {

/// Smooth compactly supported profile on the (periodic) window: a mollifier
/// bump amplitude * exp(1 - 1/(1 - t^2)) with t = |x - center| / width < 1.
class Profile {
public:
    Profile(std::array<double, 3> center, double width, double amplitude, const GridSpec& grid);

    double value(const std::array<double, 3>& x) const;
    std::array<double, 3> gradient(const std::array<double, 3>& x) const;

    double width() const { return width_; }
    const std::array<double, 3>& center() const { return center_; }

private:
    std::array<double, 3> offset(const std::array<double, 3>& x) const;

    std::array<double, 3> center_;
    double width_;
    double amplitude_;
    int dimension_;
    double period_;  // 0 = no wrap
};

/// Outer function g on R^N with analytic gradient.
struct OuterFunction {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    std::string name;
};

OuterFunction outer_linear(int n_stats);
OuterFunction outer_tanh(int n_stats);
OuterFunction outer_product(int n_stats);

/// Cylinder function F(gamma) = g(<phi_1, gamma>, ..., <phi_N, gamma>).
class CylinderFunction {
public:
    CylinderFunction(std::vector<Profile> profiles, OuterFunction outer);

    int n_stats() const { return static_cast<int>(profiles_.size()); }
    const std::string& name() const { return outer_.name; }

    /// Linear statistics of the configuration (cell centers).
    Eigen::VectorXd stats(const Configuration& gamma, const GridSpec& grid) const;

    /// Profile values at an arbitrary point (off-grid allowed).
    Eigen::VectorXd point_stats(const std::array<double, 3>& x) const;

    double value(const Eigen::VectorXd& stats) const { return outer_.value(stats); }

    /// F(gamma + point at x), given precomputed stats(gamma).
    double value_with_point(const Eigen::VectorXd& base, const std::array<double, 3>& x) const;

    /// Gradient of F(gamma + x) in the added point's position.
    std::array<double, 3> point_gradient(const Eigen::VectorXd& base,
                                         const std::array<double, 3>& x, int dimension) const;

    /// F + G and F - G remain cylinder functions (concatenated statistics).
    static CylinderFunction sum(const CylinderFunction& f, const CylinderFunction& g);
    static CylinderFunction difference(const CylinderFunction& f, const CylinderFunction& g);

    const std::vector<Profile>& profiles() const { return profiles_; }

private:
    std::vector<Profile> profiles_;
    OuterFunction outer_;
};

struct ScaledHopKernel {
    HopKernel base;
    double eps;
    int dimension;

    /// a_eps(z) = eps^(-d-2) a(z / eps).
    double operator()(const std::array<double, 3>& z) const;
};

struct ScaleDiagnostics {
    double second_moment;       // cell_volume * sum a_eps(z) z_1^2 on the grid
    double reference_moment;    // same at eps = 1
    double relative_drift;      // |moment - reference| / reference
    bool within_tolerance;      // drift <= 5%
};

/// Rescale the hop kernel; throws UnresolvableScale when eps * radius falls
/// under the grid spacing. The drift of the discrete second moment is a
/// logged diagnostic, not a failure.
ScaledHopKernel scale_hop_kernel(const HopKernel& a, double eps, const GridSpec& grid);
ScaleDiagnostics scale_diagnostics(const HopKernel& a, double eps, const GridSpec& grid);

/// c = (1/2) * cell_volume * sum_z a(z) z_1^2, with isotropy checks: off-axis
/// moments vanish and the diagonal moments agree across coordinates.
double diffusion_constant(const HopKernel& a, const GridSpec& grid);

struct FormEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double eps = 0.0;  // 0 marks the limit form
    long n_samples = 0;
    long skipped = 0;
    double mean_snap_rel = 0.0;  // mean snap distance / (eps * radius)
};

/// Monte-Carlo estimate of the scaled hopping form on cylinder functions:
///   (1/2) dv^2 sum_x sum_y a(y) sqrt(r(x~) r(x)) ((F(gamma+x~) - F(gamma+x))/eps)^2
/// with x~ the grid cell nearest to x + eps*y; the substituted variable y runs
/// over the unscaled support on the fine displacement grid.
FormEstimate estimate_form_eps(const CylinderFunction& f, double eps,
                               const std::vector<ProcessSample>& samples, const GridSpec& grid,
                               const PapangelouModel& model, const HopKernel& hop,
                               int max_points, int n_batches = 32);

/// The limit form c * E sum_x r(x, gamma) <grad F(gamma+x), grad G(gamma+x)>.
FormEstimate estimate_form_limit(const CylinderFunction& f, const CylinderFunction& g,
                                 const std::vector<ProcessSample>& samples, const GridSpec& grid,
                                 const PapangelouModel& model, double c, int max_points,
                                 int n_batches = 32);

struct LadderRow {
    double eps;
    double value;
    double std_error;
    double gap;          // |E_eps - E_0| on the same samples
    double gap_se;       // batch SE of the gap
    double sqrt_r_msd;   // mean square of sqrt(r(x~)) - sqrt(r(x)), the
                         // continuity diagnostic along the ladder
    double mean_snap_rel;
};

struct LadderResult {
    std::vector<LadderRow> rows;  // in the given (descending) eps order
    FormEstimate limit;
    bool gap_non_increasing = false;  // across the last two eps, within 3 SE
    bool final_gap_ok = false;        // <= max(10% relative, 3 SE)
    long skipped = 0;
};

LadderResult scaling_ladder(const CylinderFunction& f, const std::vector<double>& eps_list,
                            const std::vector<ProcessSample>& samples, const GridSpec& grid,
                            const PapangelouModel& model, const HopKernel& hop, double c,
                            int max_points);

/// Continuity diagnostic used inside the ladder (exposed for tests).
double sqrt_r_mean_square_diff(double eps, const std::vector<ProcessSample>& samples,
                               const GridSpec& grid, const PapangelouModel& model,
                               const HopKernel& hop, int max_points);

} // namespace permadyn

#endif
