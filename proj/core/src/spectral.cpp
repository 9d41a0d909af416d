#include "lichflow/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "lichflow/error.hpp"

namespace lichflow {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct RealBuffer {
  explicit RealBuffer(std::size_t n) : data(fftw_alloc_real(n)) {
    if (data == nullptr) throw Error("fftw allocation failed");
  }
  ~RealBuffer() { fftw_free(data); }
  RealBuffer(const RealBuffer&) = delete;
  RealBuffer& operator=(const RealBuffer&) = delete;
  double* data;
};

struct ComplexBuffer {
  explicit ComplexBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
    if (data == nullptr) throw Error("fftw allocation failed");
  }
  ~ComplexBuffer() { fftw_free(data); }
  ComplexBuffer(const ComplexBuffer&) = delete;
  ComplexBuffer& operator=(const ComplexBuffer&) = delete;
  fftw_complex* data;
};

}  // namespace

struct HelmholtzSolver::Impl {
  Grid grid;
  std::size_t spectral_size = 0;
  // Eigenvalues of -laplacian per retained spectral coefficient.
  std::vector<double> eigen;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Impl(const Grid& g) : grid(g) {
    const int n0 = g.points(0);
    const int n1 = g.dim() == 2 ? g.points(1) : 1;
    const int half0 = n0 / 2 + 1;
    spectral_size = static_cast<std::size_t>(half0) * static_cast<std::size_t>(n1);

    eigen.resize(spectral_size);
    for (int j = 0; j < n1; ++j) {
      const double e1 = g.dim() == 2 ? stencil_eigenvalue(j, n1, g.spacing(1)) : 0.0;
      for (int i = 0; i < half0; ++i) {
        eigen[static_cast<std::size_t>(j) * static_cast<std::size_t>(half0) +
              static_cast<std::size_t>(i)] = stencil_eigenvalue(i, n0, g.spacing(0)) + e1;
      }
    }

    // FFTW expects row-major dims with the fastest axis last.
    int dims[2];
    if (g.dim() == 1) {
      dims[0] = n0;
    } else {
      dims[0] = n1;
      dims[1] = n0;
    }
    RealBuffer real(g.size());
    ComplexBuffer spec(spectral_size);
    std::lock_guard lock(planner_mutex());
    forward = fftw_plan_dft_r2c(g.dim(), dims, real.data, spec.data, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r(g.dim(), dims, spec.data, real.data, FFTW_ESTIMATE);
    if (forward == nullptr || backward == nullptr) throw Error("fftw planning failed");
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

HelmholtzSolver::HelmholtzSolver(const Grid& grid) : impl_(std::make_unique<Impl>(grid)) {}
HelmholtzSolver::~HelmholtzSolver() = default;
HelmholtzSolver::HelmholtzSolver(HelmholtzSolver&&) noexcept = default;
HelmholtzSolver& HelmholtzSolver::operator=(HelmholtzSolver&&) noexcept = default;

const Grid& HelmholtzSolver::grid() const noexcept { return impl_->grid; }

double HelmholtzSolver::stencil_eigenvalue(int k, int n, double h) noexcept {
  const double theta = 2.0 * std::numbers::pi * k / n;
  return (2.0 - 2.0 * std::cos(theta)) / (h * h);
}

Field HelmholtzSolver::solve(const Field& rhs, double alpha) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error("helmholtz_solve: operator not invertible (alpha must be positive)");
  }
  if (!(rhs.grid() == impl_->grid)) throw Error("helmholtz_solve: rhs lives on a different grid");
  require_finite(rhs, "helmholtz_solve rhs");

  const std::size_t n = impl_->grid.size();
  RealBuffer real(n);
  ComplexBuffer spec(impl_->spectral_size);
  const auto in = rhs.values();
  std::copy(in.begin(), in.end(), real.data);

  fftw_execute_dft_r2c(impl_->forward, real.data, spec.data);
  const double norm = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < impl_->spectral_size; ++k) {
    const double scale = norm / (alpha + impl_->eigen[k]);
    spec.data[k][0] *= scale;
    spec.data[k][1] *= scale;
  }
  fftw_execute_dft_c2r(impl_->backward, spec.data, real.data);

  return Field(impl_->grid, std::vector<double>(real.data, real.data + n));
}

}  // namespace lichflow
