#ifndef PERMADYN_GRID_HPP
#define PERMADYN_GRID_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace permadyn {

/// Uniform discretization of a cubic window [0, L)^d into M^d cells.
///
/// The reference measure is cell_volume times counting measure on the cell
/// centers; every integral in the library is cell_volume * sum over cells.
/// Immutable after construction and safe to share between threads.
class GridSpec {
public:
    GridSpec(int dimension, double side_length, int cells_per_side, bool torus);

    int dimension() const { return d_; }
    double side_length() const { return length_; }
    int cells_per_side() const { return m_; }
    bool torus() const { return torus_; }
    double spacing() const { return spacing_; }
    double cell_volume() const { return cell_volume_; }
    int total_cells() const { return n_cells_; }

    /// Center of cell `index` (row-major over axes).
    std::array<double, 3> center(int index) const;

    std::array<int, 3> coords(int index) const;
    int index(const std::array<int, 3>& coords) const;

    /// Displacement vector from cell i to cell j; minimum-image when torus.
    std::array<double, 3> displacement(int i, int j) const;

    /// Squared Euclidean length of displacement(i, j).
    double distance_sq(int i, int j) const;

    /// Canonical id of the displacement class of (i, j) on a torus; classes
    /// related by sign share an id, so values indexed by class are exactly
    /// symmetric. Only meaningful with torus = true.
    int displacement_class(int i, int j) const;

    /// Cell whose center is nearest to `point` (wrapped when torus).
    int nearest_cell(const std::array<double, 3>& point) const;

    static constexpr int kMaxCells = 4096;

private:
    int d_;
    double length_;
    int m_;
    bool torus_;
    double spacing_;
    double cell_volume_;
    int n_cells_;
};

/// Finite multiset of grid cells: the state of every dynamics.
///
/// Value type; each simulation replica owns its own copy.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(int n_cells) : counts_(n_cells, 0) {}
    explicit Configuration(std::vector<int> counts);

    int n_cells() const { return static_cast<int>(counts_.size()); }
    int count(int cell) const { return counts_[static_cast<std::size_t>(cell)]; }
    long total() const { return total_; }
    const std::vector<int>& counts() const { return counts_; }

    void add_point(int cell);
    void remove_point(int cell);     // throws on empty cell
    void hop_point(int from, int to); // throws on empty source

    bool operator==(const Configuration& other) const { return counts_ == other.counts_; }

private:
    std::vector<int> counts_;
    long total_ = 0;
};

GridSpec build_grid(int dimension, double side_length, int cells_per_side, bool torus);

Configuration add_point(Configuration gamma, int cell);
Configuration remove_point(Configuration gamma, int cell);
Configuration hop_point(Configuration gamma, int from, int to);

/// Hash of the count vector, for memo tables keyed by configuration.
std::uint64_t config_hash(const Configuration& gamma);

} // namespace permadyn

#endif
