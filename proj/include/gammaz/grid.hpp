#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "gammaz/expr.hpp"

namespace gammaz {

/// Cell-averaged nonnegative density on a rectangular box with uniform
/// spacing per axis, up to 3 axes. Storage is row-major (last axis fastest).
struct DensityGrid {
    int dims = 0;
    std::array<int, 3> shape{1, 1, 1};
    std::array<double, 3> lo{}, hi{}, h{};
    std::vector<double> rho;

    static DensityGrid zeros(std::span<const double> lo, std::span<const double> hi,
                             std::span<const int> cells);
    /// Fill from a positive expression of the grid coordinates, then normalize
    /// to unit mass. Throws BadInitial on nonpositive cells.
    static DensityGrid from_expression(std::span<const double> lo, std::span<const double> hi,
                                       std::span<const int> cells, const Expression& e);

    long total_cells() const { return static_cast<long>(shape[0]) * shape[1] * shape[2]; }
    double cell_volume() const;
    double mass() const;
    void normalize();
    std::array<double, 3> cell_center(long flat) const;
};

/// Flat binary snapshot (little-endian float64, row-major) plus a JSON
/// sidecar `<path>.json` carrying box and shape.
void save_density(const DensityGrid& g, const std::string& path);
DensityGrid load_density(const std::string& path);

} // namespace gammaz
