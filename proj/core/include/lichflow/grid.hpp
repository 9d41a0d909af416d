#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace lichflow {

/// Uniform periodic lattice on the circle (dim 1) or the flat torus (dim 2).
///
/// Points are ordered with axis 0 varying fastest; the coordinate of point
/// i along an axis is i * spacing, so x = 0 is always a grid point.
class Grid {
 public:
  static constexpr int kMinPoints = 4;

  /// Throws lichflow::Error on dim outside {1,2}, fewer than 4 points on an
  /// axis, non-positive lengths or mismatched list sizes.
  static Grid make(int dim, std::span<const int> points_per_axis,
                   std::span<const double> axis_length);

  int dim() const noexcept { return dim_; }
  int points(int axis) const { return points_.at(static_cast<std::size_t>(axis)); }
  double length(int axis) const { return length_.at(static_cast<std::size_t>(axis)); }
  double spacing(int axis) const { return spacing_.at(static_cast<std::size_t>(axis)); }

  std::size_t size() const noexcept { return size_; }
  /// |M|, the product of axis lengths.
  double volume() const noexcept;
  /// Quadrature weight of one point: the product of spacings.
  double cell_volume() const noexcept;

  /// Per-axis lattice index of a flat index.
  std::array<int, 2> unflatten(std::size_t flat) const noexcept;
  std::size_t flatten(int i0, int i1 = 0) const noexcept;
  /// Physical coordinate of a flat index along an axis.
  double coordinate(std::size_t flat, int axis) const noexcept;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Grid() = default;

  int dim_ = 1;
  std::array<int, 2> points_{1, 1};
  std::array<double, 2> length_{1.0, 1.0};
  std::array<double, 2> spacing_{1.0, 1.0};
  std::size_t size_ = 0;
};

/// Convenience wrapper around Grid::make.
Grid make_grid(int dim, const std::vector<int>& points_per_axis,
               const std::vector<double>& axis_length);

}  // namespace lichflow
