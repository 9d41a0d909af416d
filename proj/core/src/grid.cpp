#include "lichflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lichflow/error.hpp"
#include "lichflow/field.hpp"
#include "lichflow/spectral.hpp"

namespace lichflow {

Grid Grid::make(int dim, std::span<const int> points_per_axis,
                std::span<const double> axis_length) {
  if (dim != 1 && dim != 2) {
    throw Error("unsupported dimension " + std::to_string(dim) + " (expected 1 or 2)");
  }
  const auto axes = static_cast<std::size_t>(dim);
  if (points_per_axis.size() != axes || axis_length.size() != axes) {
    throw Error("grid needs exactly " + std::to_string(dim) + " point counts and lengths");
  }
  Grid g;
  g.dim_ = dim;
  g.size_ = 1;
  for (std::size_t a = 0; a < axes; ++a) {
    if (points_per_axis[a] < kMinPoints) {
      throw Error("grid axis " + std::to_string(a) + " needs at least " +
                  std::to_string(kMinPoints) + " points");
    }
    if (!(axis_length[a] > 0.0) || !std::isfinite(axis_length[a])) {
      throw Error("grid axis " + std::to_string(a) + " length must be positive and finite");
    }
    g.points_[a] = points_per_axis[a];
    g.length_[a] = axis_length[a];
    g.spacing_[a] = axis_length[a] / points_per_axis[a];
    g.size_ *= static_cast<std::size_t>(points_per_axis[a]);
  }
  return g;
}

double Grid::volume() const noexcept {
  double v = length_[0];
  if (dim_ == 2) v *= length_[1];
  return v;
}

double Grid::cell_volume() const noexcept {
  double v = spacing_[0];
  if (dim_ == 2) v *= spacing_[1];
  return v;
}

std::array<int, 2> Grid::unflatten(std::size_t flat) const noexcept {
  const auto n0 = static_cast<std::size_t>(points_[0]);
  return {static_cast<int>(flat % n0), static_cast<int>(flat / n0)};
}

std::size_t Grid::flatten(int i0, int i1) const noexcept {
  return static_cast<std::size_t>(i0) +
         static_cast<std::size_t>(points_[0]) * static_cast<std::size_t>(i1);
}

double Grid::coordinate(std::size_t flat, int axis) const noexcept {
  const auto idx = unflatten(flat);
  if (axis == 0) return idx[0] * spacing_[0];
  if (dim_ < 2) return 0.0;
  return idx[1] * spacing_[1];
}

Grid make_grid(int dim, const std::vector<int>& points_per_axis,
               const std::vector<double>& axis_length) {
  return Grid::make(dim, points_per_axis, axis_length);
}

// ---------------------------------------------------------------------------
// Field

Field::Field(Grid grid, double value) : grid_(grid), values_(grid.size(), value) {
  if (!std::isfinite(value)) throw Error("field value must be finite");
}

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    std::ostringstream os;
    os << "field has " << values_.size() << " values but the grid has " << grid_.size()
       << " points";
    throw Error(os.str());
  }
  require_finite(*this, "field");
}

Field Field::from_function(const Grid& grid, const std::function<double(double, double)>& fn) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = fn(grid.coordinate(i, 0), grid.coordinate(i, 1));
  }
  return Field(grid, std::move(v));
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other, "field addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other, "field subtraction");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double scale) noexcept {
  for (double& v : values_) v *= scale;
  return *this;
}

Field operator+(Field lhs, const Field& rhs) { return lhs += rhs; }
Field operator-(Field lhs, const Field& rhs) { return lhs -= rhs; }
Field operator*(Field lhs, double scale) { return lhs *= scale; }
Field operator*(double scale, Field rhs) { return rhs *= scale; }

Field hadamard(const Field& lhs, const Field& rhs) {
  require_same_grid(lhs, rhs, "pointwise product");
  Field out = lhs;
  auto o = out.values();
  const auto r = rhs.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= r[i];
  return out;
}

void require_finite(const Field& u, const char* what) {
  const auto v = u.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(std::string(what) + ": non-finite value at point " + std::to_string(i));
    }
  }
}

void require_same_grid(const Field& a, const Field& b, const char* what) {
  if (!(a.grid() == b.grid())) throw Error(std::string(what) + ": fields live on different grids");
}

// ---------------------------------------------------------------------------
// Reductions

FieldStats field_stats(const Field& u) {
  if (u.size() == 0) throw Error("field_stats: empty field");
  require_finite(u, "field_stats");
  const auto v = u.values();
  FieldStats s;
  s.min = v[0];
  s.max = v[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < s.min) {
      s.min = v[i];
      s.argmin = i;
    }
    if (v[i] > s.max) {
      s.max = v[i];
      s.argmax = i;
    }
  }
  s.linf_norm = std::max(std::abs(s.min), std::abs(s.max));
  s.l2_norm = l2_norm(u);
  s.mean = integrate(u) / u.grid().volume();
  return s;
}

double min_value(const Field& u) {
  const auto v = u.values();
  return *std::min_element(v.begin(), v.end());
}

double max_value(const Field& u) {
  const auto v = u.values();
  return *std::max_element(v.begin(), v.end());
}

double linf_norm(const Field& u) {
  double m = 0.0;
  for (double x : u.values()) m = std::max(m, std::abs(x));
  return m;
}

double l2_norm(const Field& u) {
  double sum = 0.0;
  for (double x : u.values()) sum += x * x;
  return std::sqrt(u.grid().cell_volume() * sum);
}

double integrate(const Field& u) {
  double sum = 0.0;
  for (double x : u.values()) sum += x;
  return u.grid().cell_volume() * sum;
}

// ---------------------------------------------------------------------------
// Stencils

namespace {

// Applies op(left, centre, right, inv_spacing) along every axis and sums.
template <typename Op>
Field axis_stencil_sum(const Field& u, Op op) {
  require_finite(u, "stencil input");
  const Grid& g = u.grid();
  const int n0 = g.points(0);
  const int n1 = g.dim() == 2 ? g.points(1) : 1;
  const auto in = u.values();
  std::vector<double> out(in.size(), 0.0);

  const double inv0 = 1.0 / g.spacing(0);
  for (int j = 0; j < n1; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * static_cast<std::size_t>(n0);
    for (int i = 0; i < n0; ++i) {
      const int l = i == 0 ? n0 - 1 : i - 1;
      const int r = i == n0 - 1 ? 0 : i + 1;
      out[row + static_cast<std::size_t>(i)] +=
          op(in[row + static_cast<std::size_t>(l)], in[row + static_cast<std::size_t>(i)],
             in[row + static_cast<std::size_t>(r)], inv0);
    }
  }
  if (g.dim() == 2) {
    const double inv1 = 1.0 / g.spacing(1);
    for (int j = 0; j < n1; ++j) {
      const int d = j == 0 ? n1 - 1 : j - 1;
      const int up = j == n1 - 1 ? 0 : j + 1;
      for (int i = 0; i < n0; ++i) {
        out[g.flatten(i, j)] += op(in[g.flatten(i, d)], in[g.flatten(i, j)], in[g.flatten(i, up)], inv1);
      }
    }
  }
  return Field(g, std::move(out));
}

}  // namespace

Field laplacian(const Field& u) {
  return axis_stencil_sum(u, [](double l, double c, double r, double inv) {
    return (l - 2.0 * c + r) * inv * inv;
  });
}

Field gradient_sq(const Field& u) {
  return axis_stencil_sum(u, [](double l, double, double r, double inv) {
    const double d = 0.5 * (r - l) * inv;
    return d * d;
  });
}

Field helmholtz_solve(const Field& rhs, double alpha) {
  return HelmholtzSolver(rhs.grid()).solve(rhs, alpha);
}

}  // namespace lichflow
