#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace polariton {

/// y = A x for a real symmetric operator.
using LinearMap = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& y)>;

struct LanczosOptions {
  double tol = 1e-9;          ///< absolute residual ||A v - lambda v||
  int max_iter = 20000;       ///< total operator applications
  std::uint64_t seed = 20240917;
  int krylov_dim = 64;        ///< restart window
  int keep = 12;              ///< Ritz vectors kept at a thick restart
  /// Optional start vector (used instead of a random one when non-empty).
  Eigen::VectorXd initial;
};

struct LanczosResult {
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Lowest eigenpair of a real symmetric operator by thick-restart Lanczos
/// with full reorthogonalization. The search runs in the orthogonal
/// complement of `deflate` (orthonormal vectors). Never throws on
/// non-convergence; inspect `converged`.
LanczosResult lanczos_lowest(const LinearMap& apply, Eigen::Index dimension,
                             const LanczosOptions& options,
                             std::span<const Eigen::VectorXd> deflate = {});

}  // namespace polariton
