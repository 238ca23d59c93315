#include "polariton/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace polariton {
namespace {

void project_out(std::span<const Eigen::VectorXd> deflate, Eigen::VectorXd& w) {
  for (const auto& d : deflate) w -= d.dot(w) * d;
}

Eigen::VectorXd random_start(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

LanczosResult lanczos_lowest(const LinearMap& apply, Eigen::Index n,
                             const LanczosOptions& options,
                             std::span<const Eigen::VectorXd> deflate) {
  LanczosResult result;
  const Eigen::Index available = n - static_cast<Eigen::Index>(deflate.size());
  if (available <= 0) return result;

  const int m = static_cast<int>(std::min<Eigen::Index>(std::max(options.krylov_dim, 3), available));
  const int keep = std::clamp(options.keep, 1, std::max(1, m - 2));

  Eigen::VectorXd start = options.initial.size() == n ? options.initial : random_start(n, options.seed);
  project_out(deflate, start);
  if (start.norm() < 1e-10) {
    start = random_start(n, options.seed + 1);
    project_out(deflate, start);
  }
  start.normalize();

  Eigen::MatrixXd V(n, m + 1);
  V.col(0) = start;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd w(n);
  Eigen::VectorXd x(n);
  double best_residual = std::numeric_limits<double>::infinity();
  int k_start = 0;

  auto finish = [&](double value, const Eigen::VectorXd& vec, double residual, bool converged) {
    result.value = value;
    result.vector = vec;
    result.residual = residual;
    result.converged = converged;
    return result;
  };

  while (true) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz;
    double beta = 0.0;
    for (int j = k_start; j < m; ++j) {
      apply(V.col(j), w);
      ++result.iterations;
      // Classical Gram-Schmidt, applied twice.
      Eigen::VectorXd h = V.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * h;
      Eigen::VectorXd h2 = V.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * h2;
      h += h2;
      project_out(deflate, w);
      T.col(j).head(j + 1) = h;
      T.row(j).head(j + 1) = h.transpose();
      beta = w.norm();

      ritz.compute(T.topLeftCorner(j + 1, j + 1));
      const double theta = ritz.eigenvalues()(0);
      const double estimate = beta * std::abs(ritz.eigenvectors()(j, 0));
      const double scale = std::max(1.0, ritz.eigenvalues().cwiseAbs().maxCoeff());
      const bool breakdown = beta <= 1e-13 * scale;
      const bool exhausted = j + 1 == available;
      if (estimate <= options.tol || breakdown || exhausted) {
        x.noalias() = V.leftCols(j + 1) * ritz.eigenvectors().col(0);
        x.normalize();
        apply(x, w);
        ++result.iterations;
        const double residual = (w - theta * x).norm();
        best_residual = std::min(best_residual, residual);
        if (residual <= options.tol || breakdown || exhausted) {
          return finish(theta, x, residual, residual <= options.tol);
        }
      }
      if (result.iterations >= options.max_iter) {
        x.noalias() = V.leftCols(j + 1) * ritz.eigenvectors().col(0);
        x.normalize();
        return finish(theta, x, std::min(best_residual, estimate), false);
      }
      V.col(j + 1) = w / beta;
    }

    // Thick restart: keep the lowest Ritz vectors plus the residual direction.
    const Eigen::MatrixXd Y = ritz.eigenvectors().leftCols(keep);
    V.leftCols(keep) = (V.leftCols(m) * Y).eval();
    V.col(keep) = V.col(m);
    T.setZero();
    for (int i = 0; i < keep; ++i) T(i, i) = ritz.eigenvalues()(i);
    k_start = keep;
  }
}

}  // namespace polariton
