#include "permadyn/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "permadyn/errors.hpp"

namespace permadyn {

ConvolutionKernel ConvolutionKernel::gaussian(double amplitude, double lengthscale) {
    if (!(lengthscale > 0.0)) throw std::invalid_argument("gaussian kernel needs lengthscale > 0");
    return ConvolutionKernel(Shape::Gaussian, amplitude, lengthscale);
}

ConvolutionKernel ConvolutionKernel::exponential(double amplitude, double lengthscale) {
    if (!(lengthscale > 0.0)) throw std::invalid_argument("exponential kernel needs lengthscale > 0");
    return ConvolutionKernel(Shape::Exponential, amplitude, lengthscale);
}

ConvolutionKernel ConvolutionKernel::table(std::vector<std::pair<double, double>> nodes) {
    if (nodes.empty()) throw std::invalid_argument("table kernel needs at least one node");
    if (nodes.front().first != 0.0)
        throw std::invalid_argument("table kernel must start at radius 0");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i].first > nodes[i - 1].first))
            throw std::invalid_argument("table kernel radii must be strictly increasing");
    ConvolutionKernel k(Shape::Table, 1.0, nodes.back().first);
    k.nodes_ = std::move(nodes);
    return k;
}

ConvolutionKernel ConvolutionKernel::table_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open kernel table " + path);
    std::vector<std::pair<double, double>> nodes;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double r, v;
        if (!(ls >> r >> v))
            throw std::invalid_argument("bad kernel table line: " + line);
        nodes.emplace_back(r, v);
    }
    return table(std::move(nodes));
}

double ConvolutionKernel::at_radius(double r) const {
    switch (shape_) {
        case Shape::Gaussian:
            return amplitude_ * std::exp(-0.5 * (r / lengthscale_) * (r / lengthscale_));
        case Shape::Exponential:
            return amplitude_ * std::exp(-r / lengthscale_);
        case Shape::Table: {
            if (r >= nodes_.back().first) return 0.0;
            auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r,
                                       [](double x, const auto& n) { return x < n.first; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double t = (r - lo.first) / (hi.first - lo.first);
            return lo.second + t * (hi.second - lo.second);
        }
    }
    return 0.0;
}

double ConvolutionKernel::operator()(const std::array<double, 3>& z, int dimension) const {
    double s = 0.0;
    for (int axis = 0; axis < dimension; ++axis)
        s += z[static_cast<std::size_t>(axis)] * z[static_cast<std::size_t>(axis)];
    return at_radius(std::sqrt(s));
}

KernelMatrix KernelMatrix::normalized_diag(double target) const {
    KernelMatrix out{grid, values};
    const double top = values.diagonal().maxCoeff();
    if (top > 0.0) out.values *= target / top;
    return out;
}

namespace {

void check_psd(const KernelMatrix& k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.values, Eigen::EigenvaluesOnly);
    const double lambda_max = es.eigenvalues().maxCoeff();
    const double lambda_min = es.eigenvalues().minCoeff();
    if (lambda_min < -KernelMatrix::kPsdRelTol * std::max(lambda_max, 0.0))
        throw FactorizationFailed("kernel matrix fails PSD tolerance: lambda_min=" +
                                  std::to_string(lambda_min));
}

} // namespace

KernelMatrix build_kernel_matrix(const GridSpec& grid, const ConvolutionKernel& kappa) {
    const int n = grid.total_cells();
    const double dv = grid.cell_volume();
    Eigen::MatrixXd k(n, n);

    if (grid.torus()) {
        // one value per canonical displacement class -> exact symmetry and
        // exact translation invariance of the assembled matrix
        std::vector<double> kappa_at(static_cast<std::size_t>(n));
        for (int u = 0; u < n; ++u)
            kappa_at[static_cast<std::size_t>(u)] = kappa(grid.displacement(0, u), grid.dimension());
        std::vector<double> class_value(static_cast<std::size_t>(n),
                                        std::numeric_limits<double>::quiet_NaN());
        for (int j = 0; j < n; ++j) {
            const int cls = grid.displacement_class(0, j);
            if (!std::isnan(class_value[static_cast<std::size_t>(cls)])) continue;
            CompensatedSum acc;
            for (int u = 0; u < n; ++u) {
                const double ku = kappa_at[static_cast<std::size_t>(u)];
                const double kv = kappa(grid.displacement(cls, u), grid.dimension());
                acc.add(ku * kv);
            }
            class_value[static_cast<std::size_t>(cls)] = dv * acc.value();
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                k(i, j) = class_value[static_cast<std::size_t>(grid.displacement_class(i, j))];
    } else {
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                CompensatedSum acc;
                for (int u = 0; u < n; ++u)
                    acc.add(kappa(grid.displacement(u, i), grid.dimension()) *
                            kappa(grid.displacement(u, j), grid.dimension()));
                k(i, j) = dv * acc.value();
                k(j, i) = k(i, j);
            }
        }
    }

    KernelMatrix out{grid, std::move(k)};
    check_psd(out);
    return out;
}

TraceCheck local_trace_check(const KernelMatrix& k, const ConvolutionKernel& kappa,
                             const std::vector<int>& window) {
    if (window.empty()) throw std::invalid_argument("local_trace_check needs a non-empty window");
    const double dv = k.cell_volume();
    CompensatedSum trace;
    for (int i : window) trace.add(k.values(i, i));
    CompensatedSum hs;
    const int n = k.grid.total_cells();
    for (int i : window) {
        for (int u = 0; u < n; ++u) {
            const double v = kappa(k.grid.displacement(u, i), k.grid.dimension());
            hs.add(v * v);
        }
    }
    return TraceCheck{dv * trace.value(), dv * dv * hs.value()};
}

double metric_D(const ConvolutionKernel& kappa, const GridSpec& grid, int i, int j) {
    const auto delta = grid.displacement(i, j);
    const int n = grid.total_cells();
    CompensatedSum acc;
    for (int u = 0; u < n; ++u) {
        auto zu = grid.displacement(0, u);
        const double k0 = kappa(zu, grid.dimension());
        std::array<double, 3> shifted = zu;
        for (int axis = 0; axis < grid.dimension(); ++axis)
            shifted[static_cast<std::size_t>(axis)] += delta[static_cast<std::size_t>(axis)];
        acc.add(k0 * (k0 - kappa(shifted, grid.dimension())));
    }
    double d2 = grid.cell_volume() * acc.value();
    if (d2 < 0.0) {
        if (d2 < -1e-12)
            throw NegativeSemimetric("semimetric integrand " + std::to_string(d2) +
                                     " below clamp threshold: non-PSD kernel table");
        d2 = 0.0;
    }
    return std::sqrt(d2);
}

DudleyTable dudley_entropy(const ConvolutionKernel& kappa, const GridSpec& grid,
                           const std::vector<double>& deltas) {
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0 && deltas[i] <= 1.0))
            throw std::invalid_argument("dudley deltas must lie in (0, 1]");
        if (i > 0 && !(deltas[i] < deltas[i - 1]))
            throw std::invalid_argument("dudley deltas must be strictly descending");
    }

    // points of the Euclidean unit ball around the window center
    const int n = grid.total_cells();
    std::array<double, 3> c{0.0, 0.0, 0.0};
    for (int axis = 0; axis < grid.dimension(); ++axis)
        c[static_cast<std::size_t>(axis)] = 0.5 * grid.side_length();
    const int center = grid.nearest_cell(c);
    std::vector<int> ball;
    for (int i = 0; i < n; ++i)
        if (grid.distance_sq(center, i) <= 1.0) ball.push_back(i);

    const int m = static_cast<int>(ball.size());
    Eigen::MatrixXd dist(m, m);
    for (int a = 0; a < m; ++a) {
        dist(a, a) = 0.0;
        for (int b = a + 1; b < m; ++b) {
            dist(a, b) = metric_D(kappa, grid, ball[static_cast<std::size_t>(a)],
                                  ball[static_cast<std::size_t>(b)]);
            dist(b, a) = dist(a, b);
        }
    }

    DudleyTable out;
    for (double delta : deltas) {
        std::vector<bool> covered(static_cast<std::size_t>(m), false);
        int picks = 0;
        for (int a = 0; a < m; ++a) {
            if (covered[static_cast<std::size_t>(a)]) continue;
            ++picks;
            for (int b = 0; b < m; ++b)
                if (dist(a, b) < delta) covered[static_cast<std::size_t>(b)] = true;
        }
        out.rows.push_back(EntropyRow{delta, picks, std::log(static_cast<double>(picks))});
    }

    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < out.rows.size(); ++i) {
        const double width = out.rows[i].delta - out.rows[i + 1].delta;
        integral += 0.5 * width *
                    (std::sqrt(out.rows[i].entropy) + std::sqrt(out.rows[i + 1].entropy));
    }
    out.dudley_integral = integral;
    return out;
}

} // namespace permadyn
