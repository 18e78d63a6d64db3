#ifndef PERMADYN_KERNEL_HPP
#define PERMADYN_KERNEL_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "permadyn/grid.hpp"

namespace permadyn {

/// Convolution root kappa(z): the covariance kernel is its self-convolution
/// k = kappa * kappa. Radial in |z|; table kernels are linearly interpolated
/// (and therefore continuous, as the limit theory assumes).
class ConvolutionKernel {
public:
    enum class Shape { Gaussian, Exponential, Table };

    static ConvolutionKernel gaussian(double amplitude, double lengthscale);
    static ConvolutionKernel exponential(double amplitude, double lengthscale);
    /// nodes: (radius, value) pairs, radii strictly increasing from 0;
    /// zero beyond the last radius.
    static ConvolutionKernel table(std::vector<std::pair<double, double>> nodes);
    static ConvolutionKernel table_from_file(const std::string& path);

    double operator()(const std::array<double, 3>& z, int dimension) const;
    double at_radius(double r) const;

    Shape shape() const { return shape_; }
    double amplitude() const { return amplitude_; }
    double lengthscale() const { return lengthscale_; }

private:
    ConvolutionKernel(Shape s, double a, double ls) : shape_(s), amplitude_(a), lengthscale_(ls) {}

    Shape shape_;
    double amplitude_;
    double lengthscale_;
    std::vector<std::pair<double, double>> nodes_;
};

/// Dense symmetric PSD matrix of covariance values k(x_i, x_j) on a grid.
struct KernelMatrix {
    GridSpec grid;
    Eigen::MatrixXd values;

    double cell_volume() const { return grid.cell_volume(); }
    double max_diag() const { return values.diagonal().maxCoeff(); }

    /// Scale so that the largest diagonal entry equals `target`.
    KernelMatrix normalized_diag(double target = 1.0) const;

    static constexpr double kPsdRelTol = 1e-8;
    static constexpr double kJitterRel = 1e-10;
};

/// k_ij = cell_volume * sum_u kappa(x_i - x_u) kappa(x_j - x_u).
/// On a torus the value is computed once per canonical displacement class so
/// symmetry and translation invariance are exact. Throws on a PSD violation
/// beyond KernelMatrix::kPsdRelTol (a misconfigured table kernel).
KernelMatrix build_kernel_matrix(const GridSpec& grid, const ConvolutionKernel& kappa);

struct TraceCheck {
    double trace;       // cell_volume * sum_{i in window} k_ii
    double hs_norm_sq;  // cell_volume^2 * double sum of kappa^2
};

/// The two sides of the local trace / Hilbert-Schmidt identity, computed by
/// independent routes; they must agree to 1e-9 relative.
TraceCheck local_trace_check(const KernelMatrix& k, const ConvolutionKernel& kappa,
                             const std::vector<int>& window);

/// Canonical Gaussian semimetric
/// D(i,j) = (cell_volume * sum_u kappa(u) (kappa(u) - kappa(u + x_j - x_i)))^(1/2),
/// clamped at -1e-12; beyond that throws NegativeSemimetric.
double metric_D(const ConvolutionKernel& kappa, const GridSpec& grid, int i, int j);

struct EntropyRow {
    double delta;
    int covering_number;  // greedy upper bound on N(D, delta)
    double entropy;       // log of covering_number
};

struct DudleyTable {
    std::vector<EntropyRow> rows;
    double dudley_integral;  // trapezoid over the delta ladder
};

/// Greedy covering numbers of the Euclidean unit ball (grid points with
/// |x - window center| <= 1) under D, for a descending delta ladder in (0,1].
DudleyTable dudley_entropy(const ConvolutionKernel& kappa, const GridSpec& grid,
                           const std::vector<double>& deltas);

} // namespace permadyn

#endif
