#ifndef PERMADYN_GAUSSIAN_FIELD_HPP
#define PERMADYN_GAUSSIAN_FIELD_HPP

#include <Eigen/Dense>
#include <vector>

#include "permadyn/kernel.hpp"
#include "permadyn/rng.hpp"

namespace permadyn {

/// Square-root factor of a kernel matrix: factor * factor^T = K.
///
/// Built by symmetric eigendecomposition; eigenvalues inside the jitter band
/// are lifted, residual negatives are clamped to zero. Immutable, shareable.
class FieldFactor {
public:
    explicit FieldFactor(const KernelMatrix& k);

    const Eigen::MatrixXd& matrix() const { return factor_; }
    int n_cells() const { return static_cast<int>(factor_.rows()); }

    /// One mean-zero field with the factored covariance: factor * xi.
    Eigen::VectorXd sample(Rng& rng) const;

private:
    Eigen::MatrixXd factor_;
};

/// l independent fields and their pointwise sum of squares (the random
/// intensity of the Cox construction).
struct GaussianFieldSample {
    std::vector<Eigen::VectorXd> fields;
    Eigen::VectorXd intensity;  // sum of squared fields, >= 0 pointwise

    int l() const { return static_cast<int>(fields.size()); }
};

FieldFactor factorize(const KernelMatrix& k);

/// Draw l independent fields; field i of replica r reads from the stream
/// (master, "field", r, i) so replicas are reproducible individually.
GaussianFieldSample sample_fields(const FieldFactor& factor, int l,
                                  std::uint64_t master_seed, std::uint64_t replica);

struct MomentEstimate {
    double value;
    double std_error;
};

/// Empirical n-th moment of the intensity at one cell, with standard error.
MomentEstimate intensity_moments(const std::vector<GaussianFieldSample>& samples,
                                 int cell, int order);

/// (2n)! / (2^n n!) = (2n-1)!!, the Gaussian even-moment factor.
double gaussian_moment_factor(int n);

} // namespace permadyn

#endif
