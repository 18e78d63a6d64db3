#include "permadyn/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "permadyn/errors.hpp"

namespace permadyn {

GridSpec::GridSpec(int dimension, double side_length, int cells_per_side, bool torus)
    : d_(dimension), length_(side_length), m_(cells_per_side), torus_(torus) {
    if (d_ < 1 || d_ > 3)
        throw std::invalid_argument("grid dimension must be 1, 2 or 3, got " + std::to_string(d_));
    if (!(length_ > 0.0))
        throw std::invalid_argument("grid side length must be positive");
    if (m_ < 1)
        throw std::invalid_argument("cells per side must be at least 1");
    double cells = std::pow(static_cast<double>(m_), d_);
    if (cells > kMaxCells)
        throw std::invalid_argument("grid has " + std::to_string(static_cast<long>(cells)) +
                                    " cells, cap is " + std::to_string(kMaxCells));
    spacing_ = length_ / m_;
    cell_volume_ = std::pow(spacing_, d_);
    n_cells_ = static_cast<int>(cells);
}

std::array<int, 3> GridSpec::coords(int index) const {
    std::array<int, 3> c{0, 0, 0};
    for (int axis = 0; axis < d_; ++axis) {
        c[static_cast<std::size_t>(axis)] = index % m_;
        index /= m_;
    }
    return c;
}

int GridSpec::index(const std::array<int, 3>& coords) const {
    int idx = 0;
    for (int axis = d_ - 1; axis >= 0; --axis)
        idx = idx * m_ + coords[static_cast<std::size_t>(axis)];
    return idx;
}

std::array<double, 3> GridSpec::center(int index) const {
    const auto c = coords(index);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int axis = 0; axis < d_; ++axis)
        x[static_cast<std::size_t>(axis)] = (c[static_cast<std::size_t>(axis)] + 0.5) * spacing_;
    return x;
}

std::array<double, 3> GridSpec::displacement(int i, int j) const {
    const auto ci = coords(i);
    const auto cj = coords(j);
    std::array<double, 3> dv{0.0, 0.0, 0.0};
    for (int axis = 0; axis < d_; ++axis) {
        int diff = cj[static_cast<std::size_t>(axis)] - ci[static_cast<std::size_t>(axis)];
        if (torus_) {
            // minimum image: representative in (-M/2, M/2]
            diff %= m_;
            if (2 * diff <= -m_) diff += m_;
            if (2 * diff > m_) diff -= m_;
        }
        dv[static_cast<std::size_t>(axis)] = diff * spacing_;
    }
    return dv;
}

double GridSpec::distance_sq(int i, int j) const {
    const auto dv = displacement(i, j);
    double s = 0.0;
    for (int axis = 0; axis < d_; ++axis)
        s += dv[static_cast<std::size_t>(axis)] * dv[static_cast<std::size_t>(axis)];
    return s;
}

int GridSpec::displacement_class(int i, int j) const {
    const auto ci = coords(i);
    const auto cj = coords(j);
    std::array<int, 3> fwd{0, 0, 0};
    std::array<int, 3> rev{0, 0, 0};
    for (int axis = 0; axis < d_; ++axis) {
        int diff = cj[static_cast<std::size_t>(axis)] - ci[static_cast<std::size_t>(axis)];
        int f = ((diff % m_) + m_) % m_;
        fwd[static_cast<std::size_t>(axis)] = f;
        rev[static_cast<std::size_t>(axis)] = (m_ - f) % m_;
    }
    // sign-canonical representative: the lexicographically smaller of +/-
    const std::array<int, 3>& rep = (rev < fwd) ? rev : fwd;
    return index(rep);
}

int GridSpec::nearest_cell(const std::array<double, 3>& point) const {
    std::array<int, 3> c{0, 0, 0};
    for (int axis = 0; axis < d_; ++axis) {
        double t = point[static_cast<std::size_t>(axis)] / spacing_ - 0.5;
        long idx = std::lround(t);
        if (torus_) {
            idx = ((idx % m_) + m_) % m_;
        } else {
            if (idx < 0) idx = 0;
            if (idx >= m_) idx = m_ - 1;
        }
        c[static_cast<std::size_t>(axis)] = static_cast<int>(idx);
    }
    return index(c);
}

Configuration::Configuration(std::vector<int> counts) : counts_(std::move(counts)) {
    total_ = 0;
    for (int c : counts_) {
        if (c < 0) throw std::invalid_argument("configuration counts must be non-negative");
        total_ += c;
    }
}

void Configuration::add_point(int cell) {
    ++counts_[static_cast<std::size_t>(cell)];
    ++total_;
}

void Configuration::remove_point(int cell) {
    int& c = counts_[static_cast<std::size_t>(cell)];
    if (c <= 0)
        throw Error("remove_point from empty cell " + std::to_string(cell) +
                    ": inconsistent dynamics step");
    --c;
    --total_;
}

void Configuration::hop_point(int from, int to) {
    remove_point(from);
    add_point(to);
}

GridSpec build_grid(int dimension, double side_length, int cells_per_side, bool torus) {
    return GridSpec(dimension, side_length, cells_per_side, torus);
}

Configuration add_point(Configuration gamma, int cell) {
    gamma.add_point(cell);
    return gamma;
}

Configuration remove_point(Configuration gamma, int cell) {
    gamma.remove_point(cell);
    return gamma;
}

Configuration hop_point(Configuration gamma, int from, int to) {
    gamma.hop_point(from, to);
    return gamma;
}

std::uint64_t config_hash(const Configuration& gamma) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (int c : gamma.counts()) {
        h ^= static_cast<std::uint64_t>(c) + 0x9E3779B97F4A7C15ULL;
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace permadyn
