#pragma once

#include <memory>

#include "lichflow/field.hpp"

namespace lichflow {

/// Reusable periodic Helmholtz solver for one grid.
///
/// Transform plans are built once; solve() allocates its own work buffers,
/// so a single instance may be shared between threads.
class HelmholtzSolver {
 public:
  explicit HelmholtzSolver(const Grid& grid);
  ~HelmholtzSolver();
  HelmholtzSolver(HelmholtzSolver&&) noexcept;
  HelmholtzSolver& operator=(HelmholtzSolver&&) noexcept;
  HelmholtzSolver(const HelmholtzSolver&) = delete;
  HelmholtzSolver& operator=(const HelmholtzSolver&) = delete;

  const Grid& grid() const noexcept;

  /// w with alpha * w - laplacian(w) = rhs.
  Field solve(const Field& rhs, double alpha) const;

  /// Eigenvalue of -laplacian for the 1-d stencil mode k on n points of spacing h.
  static double stencil_eigenvalue(int k, int n, double h) noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lichflow
