#include "permadyn/alpha_permanent.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "permadyn/errors.hpp"

namespace permadyn {

namespace {

void check_entries(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols())
        throw InvalidEntry("per_alpha expects a square matrix");
    if (!a.allFinite())
        throw InvalidEntry("matrix has non-finite entries");
}

/// Enumerates permutations by their cycle decomposition: each cycle starts
/// at the smallest element not yet placed, so every permutation is reached
/// exactly once. `product` carries the partial diagonal product and `cycles`
/// the number of closed cycles.
class CycleEnumerator {
public:
    CycleEnumerator(const Eigen::MatrixXd& a, const std::vector<double>& alpha_pow)
        : a_(a), alpha_pow_(alpha_pow), n_(static_cast<int>(a.rows())), used_(a.rows(), false) {}

    double run() {
        descend_new_cycle(1.0, 0);
        return acc_.value();
    }

private:
    void descend_new_cycle(double product, int cycles) {
        int start = -1;
        for (int i = 0; i < n_; ++i) {
            if (!used_[static_cast<std::size_t>(i)]) {
                start = i;
                break;
            }
        }
        if (start < 0) {
            acc_.add(alpha_pow_[static_cast<std::size_t>(n_ - cycles)] * product);
            return;
        }
        used_[static_cast<std::size_t>(start)] = true;
        extend_cycle(start, start, product, cycles);
        used_[static_cast<std::size_t>(start)] = false;
    }

    void extend_cycle(int start, int current, double product, int cycles) {
        // close the cycle
        descend_new_cycle(product * a_(current, start), cycles + 1);
        // or map current to any unused element
        for (int next = 0; next < n_; ++next) {
            if (used_[static_cast<std::size_t>(next)]) continue;
            used_[static_cast<std::size_t>(next)] = true;
            extend_cycle(start, next, product * a_(current, next), cycles);
            used_[static_cast<std::size_t>(next)] = false;
        }
    }

    const Eigen::MatrixXd& a_;
    const std::vector<double>& alpha_pow_;
    int n_;
    std::vector<bool> used_;
    CompensatedSum acc_;
};

} // namespace

double per_alpha(const Eigen::MatrixXd& a, double alpha) {
    check_entries(a);
    const int n = static_cast<int>(a.rows());
    if (n < 1) throw InvalidEntry("per_alpha needs order >= 1");
    if (n > 12)
        throw MatrixTooLarge("per_alpha order " + std::to_string(n) + " exceeds cap 12");
    std::vector<double> alpha_pow(static_cast<std::size_t>(n) + 1, 1.0);
    for (int k = 1; k <= n; ++k)
        alpha_pow[static_cast<std::size_t>(k)] = alpha_pow[static_cast<std::size_t>(k - 1)] * alpha;
    CycleEnumerator walker(a, alpha_pow);
    return walker.run();
}

double permanent_ryser(const Eigen::MatrixXd& a) {
    check_entries(a);
    const int n = static_cast<int>(a.rows());
    if (n < 1) throw InvalidEntry("permanent_ryser needs order >= 1");
    if (n > 24)
        throw MatrixTooLarge("permanent_ryser order " + std::to_string(n) + " exceeds cap 24");

    std::vector<double> row_sum(static_cast<std::size_t>(n), 0.0);
    CompensatedSum acc;
    const std::uint64_t total = std::uint64_t{1} << n;
    std::uint64_t gray_prev = 0;
    int popcount = 0;
    for (std::uint64_t counter = 1; counter < total; ++counter) {
        const std::uint64_t gray = counter ^ (counter >> 1);
        const std::uint64_t flipped = gray ^ gray_prev;
        int col = 0;
        while (((flipped >> col) & 1u) == 0) ++col;
        const double sign_col = (gray & flipped) ? 1.0 : -1.0;
        popcount += (gray & flipped) ? 1 : -1;
        for (int i = 0; i < n; ++i)
            row_sum[static_cast<std::size_t>(i)] += sign_col * a(i, col);
        double prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= row_sum[static_cast<std::size_t>(i)];
        acc.add(((n - popcount) % 2 == 0) ? prod : -prod);
        gray_prev = gray;
    }
    return acc.value();
}

} // namespace permadyn
