#pragma once

#include "torsionlab/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace torsionlab {

/// Regular cell-centred grid; axis 0 varies fastest.
struct GridSpec {
    Point origin;  ///< lower corner of cell 0
    double h = 0.0;
    Eigen::VectorXi extents;

    [[nodiscard]] int dim() const { return static_cast<int>(extents.size()); }
    [[nodiscard]] std::size_t cell_count() const;
    [[nodiscard]] double cell_volume() const;
    [[nodiscard]] std::ptrdiff_t stride(int axis) const;
    [[nodiscard]] Eigen::VectorXi multi_index(std::size_t index) const;
    [[nodiscard]] std::size_t linear_index(const Eigen::VectorXi& multi) const;
    [[nodiscard]] Point center(std::size_t index) const;
    /// Cell containing x, if any.
    [[nodiscard]] std::optional<std::size_t> locate(const Point& x) const;
};

/// Grid covering the bounding box of `domain` with `resolution` cells along
/// the longest side, rounded to an odd count per axis and padded by one
/// exterior cell on every side.
[[nodiscard]] GridSpec grid_for(const Domain& domain, int resolution);

/// Grid function sampled at cell centres. Values vanish where mask is false.
struct ScalarField {
    GridSpec grid;
    Eigen::VectorXd values;
    std::vector<std::uint8_t> mask;

    [[nodiscard]] int dim() const { return grid.dim(); }
    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(values.size()); }
    [[nodiscard]] double max_value() const;
    [[nodiscard]] double masked_volume() const;
    [[nodiscard]] std::size_t masked_count() const;
    /// Multilinear interpolation of cell-centre values; zero off the grid.
    [[nodiscard]] double value_at(const Point& x) const;
    /// Throws ValidationError unless values are finite, non-negative and zero off the mask.
    void validate() const;
};

/// Cell-centre mask of `domain` on `grid`.
[[nodiscard]] std::vector<std::uint8_t> domain_mask(const Domain& domain, const GridSpec& grid);

/// Samples fn at the centres of cells inside `domain`.
[[nodiscard]] ScalarField sample_field(const Domain& domain, const GridSpec& grid,
                                       const std::function<double(const Point&)>& fn);

/// Same grid and mask, values multiplied by c.
[[nodiscard]] ScalarField scaled(const ScalarField& field, double c);

/// CSV with header "x0,...,x{n-1},value,inside", one row per cell.
void write_field_csv(std::ostream& out, const ScalarField& field);
[[nodiscard]] ScalarField read_field_csv(std::istream& in);

/// One-line JSON header, then the values, then the mask as a 0/1 string.
void write_field_stream(std::ostream& out, const ScalarField& field);
[[nodiscard]] ScalarField read_field_stream(std::istream& in);

}  // namespace torsionlab
