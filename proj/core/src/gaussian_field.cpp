#include "permadyn/gaussian_field.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "permadyn/errors.hpp"

namespace permadyn {

FieldFactor::FieldFactor(const KernelMatrix& k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.values);
    if (es.info() != Eigen::Success)
        throw FactorizationFailed("eigendecomposition of the kernel matrix failed");
    Eigen::VectorXd lambda = es.eigenvalues();
    const double lambda_max = std::max(lambda.maxCoeff(), 0.0);
    const double psd_floor = -KernelMatrix::kPsdRelTol * lambda_max;
    if (lambda.minCoeff() < psd_floor)
        throw FactorizationFailed("matrix is not PSD within tolerance (lambda_min=" +
                                  std::to_string(lambda.minCoeff()) + ")");
    if (lambda.minCoeff() < 0.0)
        lambda.array() += KernelMatrix::kJitterRel * lambda_max;
    lambda = lambda.cwiseMax(0.0);
    factor_ = es.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
}

Eigen::VectorXd FieldFactor::sample(Rng& rng) const {
    Eigen::VectorXd xi(factor_.rows());
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = rng.normal();
    return factor_ * xi;
}

FieldFactor factorize(const KernelMatrix& k) { return FieldFactor(k); }

GaussianFieldSample sample_fields(const FieldFactor& factor, int l,
                                  std::uint64_t master_seed, std::uint64_t replica) {
    if (l < 1) throw std::invalid_argument("number of fields l must be >= 1");
    GaussianFieldSample out;
    out.fields.reserve(static_cast<std::size_t>(l));
    out.intensity = Eigen::VectorXd::Zero(factor.n_cells());
    for (int i = 0; i < l; ++i) {
        Rng rng = Rng::stream(master_seed, "field", replica, static_cast<std::uint64_t>(i));
        out.fields.push_back(factor.sample(rng));
        out.intensity.array() += out.fields.back().array().square();
    }
    return out;
}

MomentEstimate intensity_moments(const std::vector<GaussianFieldSample>& samples,
                                 int cell, int order) {
    if (order < 1 || order > 4) throw std::invalid_argument("moment order must be in 1..4");
    if (samples.size() < 1000)
        throw std::invalid_argument("intensity_moments needs at least 1e3 samples");
    CompensatedSum sum, sum_sq;
    for (const auto& s : samples) {
        const double m = std::pow(s.intensity(cell), order);
        sum.add(m);
        sum_sq.add(m * m);
    }
    const double n = static_cast<double>(samples.size());
    const double mean = sum.value() / n;
    const double var = std::max(0.0, sum_sq.value() / n - mean * mean);
    return MomentEstimate{mean, std::sqrt(var / n)};
}

double gaussian_moment_factor(int n) {
    double f = 1.0;
    for (int j = 1; j <= n; ++j) f *= 2.0 * j - 1.0;
    return f;
}

} // namespace permadyn
