#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lichflow/grid.hpp"

namespace lichflow {

/// Real values sampled on every point of a Grid, in the grid's point order.
class Field {
 public:
  explicit Field(Grid grid, double value = 0.0);
  /// Throws if the length does not match the grid or a value is not finite.
  Field(Grid grid, std::vector<double> values);

  /// Pointwise evaluation of fn(x, y) at grid coordinates (y = 0 in 1-d).
  static Field from_function(const Grid& grid, const std::function<double(double, double)>& fn);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  bool all_finite() const noexcept;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double scale) noexcept;

  friend bool operator==(const Field&, const Field&) = default;

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(Field lhs, const Field& rhs);
Field operator-(Field lhs, const Field& rhs);
Field operator*(Field lhs, double scale);
Field operator*(double scale, Field rhs);
/// Pointwise product.
Field hadamard(const Field& lhs, const Field& rhs);

/// Throws lichflow::Error naming `what` when the field has a NaN or Inf.
void require_finite(const Field& u, const char* what);
/// Throws if the two fields live on different grids.
void require_same_grid(const Field& a, const Field& b, const char* what);

struct FieldStats {
  double min = 0.0;
  double max = 0.0;
  double l2_norm = 0.0;
  double linf_norm = 0.0;
  double mean = 0.0;
  std::size_t argmin = 0;
  std::size_t argmax = 0;
};

FieldStats field_stats(const Field& u);

double min_value(const Field& u);
double max_value(const Field& u);
/// max |u|.
double linf_norm(const Field& u);
/// sqrt(integrate(u^2)).
double l2_norm(const Field& u);

/// Second-order periodic five/three-point Laplacian.
Field laplacian(const Field& u);
/// |grad u|^2 from central differences per axis.
Field gradient_sq(const Field& u);
/// Rectangle rule: cell volume times the sum of values, summed in point order.
double integrate(const Field& u);

/// Solves (alpha I - laplacian) w = rhs by diagonalising the discrete
/// stencil in the periodic Fourier basis. Throws for alpha <= 0.
Field helmholtz_solve(const Field& rhs, double alpha);

}  // namespace lichflow
