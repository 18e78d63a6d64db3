#ifndef PERMADYN_ALPHA_PERMANENT_HPP
#define PERMADYN_ALPHA_PERMANENT_HPP

#include <Eigen/Dense>
#include <cmath>

namespace permadyn {

/// alpha-permanent: sum over permutations of alpha^(n - #cycles) times the
/// diagonal product. alpha = 1 is the permanent, alpha = -1 the determinant.
///
/// Reference path: full enumeration with incremental cycle bookkeeping and
/// compensated accumulation; no symmetry shortcuts. Cost n! * n, so n <= 12.
/// Throws MatrixTooLarge / InvalidEntry.
double per_alpha(const Eigen::MatrixXd& a, double alpha);

/// Permanent by Ryser's inclusion-exclusion with Gray-code row sums, n <= 24.
double permanent_ryser(const Eigen::MatrixXd& a);

/// Running compensated (Neumaier) sum.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace permadyn

#endif
