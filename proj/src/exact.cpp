#include "polariton/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>

#include "polariton/error.hpp"

namespace polariton {
namespace {

void check_state(const ManyBodyState& state, const FockBasis& basis) {
  if (static_cast<std::size_t>(state.amplitudes.size()) != basis.size()) {
    throw MismatchError("state and basis dimensions differ");
  }
}

int species_offset(const FockBasis& basis, Species species) {
  if (species == Species::exciton && basis.species() != 2) {
    throw MismatchError("exciton observable on a single-species basis");
  }
  return species == Species::photon ? 0 : basis.sites();
}

// Amplitude matrix of a bipartition, one dense block per kept-side particle number.
struct SchmidtBlocks {
  std::vector<Eigen::MatrixXd> blocks;
};

SchmidtBlocks schmidt_blocks(const ManyBodyState& state, const FockBasis& basis,
                             Partition partition, std::size_t dense_limit) {
  check_state(state, basis);
  const int L = basis.sites();
  std::vector<char> kept(basis.modes(), 0);
  if (partition.kind == Partition::Kind::light_matter) {
    if (basis.species() != 2) throw MismatchError("light-matter cut needs a ladder basis");
    for (int j = 0; j < L; ++j) kept[j] = 1;
  } else {
    if (partition.cut_site < 0 || partition.cut_site >= L) {
      throw RangeError("cut site outside the chain");
    }
    for (int s = 0; s < basis.species(); ++s) {
      for (int j = 0; j <= partition.cut_site; ++j) kept[s * L + j] = 1;
    }
  }

  struct Block {
    std::unordered_map<std::string, int> rows, cols;
    std::vector<std::tuple<int, int, double>> entries;
  };
  std::map<int, Block> by_count;
  std::size_t kept_states = 0;
  std::string a_key, b_key;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double amp = state.amplitudes(static_cast<Eigen::Index>(i));
    auto occ = basis.occupations(i);
    a_key.clear();
    b_key.clear();
    int count = 0;
    for (int p = 0; p < basis.modes(); ++p) {
      if (kept[p]) {
        a_key.push_back(static_cast<char>(occ[p]));
        count += occ[p];
      } else {
        b_key.push_back(static_cast<char>(occ[p]));
      }
    }
    Block& block = by_count[count];
    auto [row_it, new_row] = block.rows.try_emplace(a_key, static_cast<int>(block.rows.size()));
    if (new_row && ++kept_states > dense_limit) {
      throw CapacityError("kept subsystem exceeds the dense limit");
    }
    auto col_it = block.cols.try_emplace(b_key, static_cast<int>(block.cols.size())).first;
    block.entries.emplace_back(row_it->second, col_it->second, amp);
  }

  SchmidtBlocks out;
  for (auto& [count, block] : by_count) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(block.rows.size()),
                                              static_cast<Eigen::Index>(block.cols.size()));
    for (auto [r, c, v] : block.entries) m(r, c) = v;
    out.blocks.push_back(std::move(m));
  }
  return out;
}

}  // namespace

GroundStateResult lanczos_ground_state(const SparseOperator& H, const GroundStateOptions& options) {
  const auto n = static_cast<Eigen::Index>(H.dimension());
  if (n == 0) throw CapacityError("cannot diagonalize a dimension-0 operator");
  LinearMap apply = [&H](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    y.resize(x.size());
    H.apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
            std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
  };
  LanczosOptions lanczos;
  lanczos.tol = options.tol;
  lanczos.max_iter = options.max_iter;
  lanczos.seed = options.seed;
  lanczos.krylov_dim = options.krylov_dim;
  LanczosResult ground = lanczos_lowest(apply, n, lanczos);
  if (!ground.converged) {
    throw ConvergenceError("Lanczos did not converge (best residual " +
                               std::to_string(ground.residual) + ")",
                           ground.residual);
  }
  GroundStateResult result;
  result.energy = ground.value;
  result.state.amplitudes = std::move(ground.vector);
  result.residual_norm = ground.residual;
  result.iterations = ground.iterations;
  result.gap = std::numeric_limits<double>::quiet_NaN();

  if (options.detect_degeneracy && n > 1) {
    // Second level from a deflated run; eigenvalue error is quadratic in the
    // residual, so a looser tolerance still resolves the 1e-8 threshold.
    LanczosOptions second = lanczos;
    second.tol = std::max(options.tol, 1e-6);
    second.seed = options.seed + 1;
    const Eigen::VectorXd deflate[] = {result.state.amplitudes};
    LanczosResult excited = lanczos_lowest(apply, n, second, deflate);
    result.iterations += excited.iterations;
    result.gap = excited.value - result.energy;
    result.degenerate = result.gap < kDegeneracyThreshold;
  }
  return result;
}

GroundStateResult lanczos_ground_state(const SparseOperator& H, double tol, int max_iter,
                                       std::uint64_t seed) {
  GroundStateOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  options.seed = seed;
  return lanczos_ground_state(H, options);
}

DenseSpectrum dense_spectrum(const Eigen::MatrixXd& H, std::size_t dense_limit) {
  if (static_cast<std::size_t>(H.rows()) > dense_limit) {
    throw CapacityError("dimension " + std::to_string(H.rows()) + " exceeds dense limit " +
                        std::to_string(dense_limit));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

DenseSpectrum dense_spectrum(const SparseOperator& H, std::size_t dense_limit) {
  if (H.dimension() > dense_limit) {
    throw CapacityError("dimension " + std::to_string(H.dimension()) + " exceeds dense limit " +
                        std::to_string(dense_limit));
  }
  return dense_spectrum(H.to_dense(), dense_limit);
}

GroundStateResult ground_state(const SparseOperator& H, const GroundStateOptions& options,
                               std::size_t dense_limit) {
  if (H.dimension() == 0) throw CapacityError("cannot diagonalize a dimension-0 operator");
  if (H.dimension() > dense_limit) return lanczos_ground_state(H, options);
  const DenseSpectrum spectrum = dense_spectrum(H, dense_limit);
  GroundStateResult result;
  result.energy = spectrum.values(0);
  result.state.amplitudes = spectrum.vectors.col(0);
  result.residual_norm = (H.apply(result.state.amplitudes) - result.energy * result.state.amplitudes).norm();
  result.gap = spectrum.values.size() > 1 ? spectrum.values(1) - spectrum.values(0)
                                          : std::numeric_limits<double>::quiet_NaN();
  result.degenerate = spectrum.values.size() > 1 && result.gap < kDegeneracyThreshold;
  return result;
}

std::vector<double> site_densities(const ManyBodyState& state, const FockBasis& basis,
                                   Species species) {
  check_state(state, basis);
  const int offset = species_offset(basis, species);
  std::vector<double> density(basis.sites(), 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double p = state.amplitudes(static_cast<Eigen::Index>(i)) *
                     state.amplitudes(static_cast<Eigen::Index>(i));
    auto occ = basis.occupations(i);
    for (int j = 0; j < basis.sites(); ++j) density[j] += p * occ[offset + j];
  }
  return density;
}

double photonic_fraction(const ManyBodyState& state, const FockBasis& basis) {
  if (basis.particles() == 0) return 0.0;
  double photons = 0.0;
  for (double n : site_densities(state, basis, Species::photon)) photons += n;
  return photons / basis.particles();
}

CorrelationResult g2(const ManyBodyState& state, const FockBasis& basis, Species kind, int j0) {
  check_state(state, basis);
  const int L = basis.sites();
  if (j0 < 0 || j0 >= L) throw RangeError("reference site outside the chain");
  const int offset = species_offset(basis, kind);
  CorrelationResult result;
  result.kind = kind;
  result.reference_site = j0;
  result.density = static_cast<double>(basis.particles()) / L;
  result.values.assign(L, 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double p = state.amplitudes(static_cast<Eigen::Index>(i)) *
                     state.amplitudes(static_cast<Eigen::Index>(i));
    auto occ = basis.occupations(i);
    const int n0 = occ[offset + j0];
    if (n0 == 0) continue;
    // c_j^+ c_{j0}^+ c_{j0} c_j is diagonal: n_j n_j0 off-site, n (n - 1) on-site.
    for (int j = 0; j < L; ++j) {
      const int nj = occ[offset + j];
      result.values[j] += p * (j == j0 ? nj * (nj - 1) : nj * n0);
    }
  }
  const double norm = result.density * result.density;
  for (double& v : result.values) v = norm > 0.0 ? v / norm : 0.0;
  return result;
}

CorrelationResult g2_from_density_correlations(const ManyBodyState& state, const FockBasis& basis,
                                               Species kind, int j0) {
  check_state(state, basis);
  const int L = basis.sites();
  if (j0 < 0 || j0 >= L) throw RangeError("reference site outside the chain");
  const Eigen::MatrixXd cov = density_covariance(state, basis, kind);
  const std::vector<double> n = site_densities(state, basis, kind);
  CorrelationResult result;
  result.kind = kind;
  result.reference_site = j0;
  result.density = static_cast<double>(basis.particles()) / L;
  result.values.assign(L, 0.0);
  const double norm = result.density * result.density;
  for (int j = 0; j < L; ++j) {
    const double nn = cov(j, j0) + n[j] * n[j0];
    const double contact = j == j0 ? n[j] : 0.0;
    result.values[j] = norm > 0.0 ? (nn - contact) / norm : 0.0;
  }
  return result;
}

Eigen::MatrixXd density_covariance(const ManyBodyState& state, const FockBasis& basis,
                                   Species species) {
  check_state(state, basis);
  const int L = basis.sites();
  const int offset = species_offset(basis, species);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(L, L);
  Eigen::VectorXd first = Eigen::VectorXd::Zero(L);
  Eigen::VectorXd n(L);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double p = state.amplitudes(static_cast<Eigen::Index>(i)) *
                     state.amplitudes(static_cast<Eigen::Index>(i));
    auto occ = basis.occupations(i);
    for (int j = 0; j < L; ++j) n(j) = occ[offset + j];
    first += p * n;
    second.noalias() += p * n * n.transpose();
  }
  return second - first * first.transpose();
}

std::vector<double> reduced_density_spectrum(const ManyBodyState& state, const FockBasis& basis,
                                             Partition partition, Subsystem side,
                                             std::size_t dense_limit) {
  const SchmidtBlocks sb = schmidt_blocks(state, basis, partition, dense_limit);
  std::vector<double> spectrum;
  for (const auto& m : sb.blocks) {
    const Eigen::MatrixXd rho =
        side == Subsystem::kept ? Eigen::MatrixXd(m * m.transpose()) : Eigen::MatrixXd(m.transpose() * m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(rho, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
      spectrum.push_back(std::max(0.0, solver.eigenvalues()(i)));
    }
  }
  std::sort(spectrum.rbegin(), spectrum.rend());
  return spectrum;
}

std::vector<double> schmidt_spectrum(const ManyBodyState& state, const FockBasis& basis,
                                     Partition partition, std::size_t dense_limit) {
  const SchmidtBlocks sb = schmidt_blocks(state, basis, partition, dense_limit);
  std::vector<double> spectrum;
  for (const auto& m : sb.blocks) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      const double s = svd.singularValues()(i);
      spectrum.push_back(s * s);
    }
  }
  std::sort(spectrum.rbegin(), spectrum.rend());
  return spectrum;
}

double entropy_of(const std::vector<double>& probabilities) {
  double s = 0.0;
  for (double p : probabilities) {
    if (p > 1e-300) s -= p * std::log(p);
  }
  return s;
}

double von_neumann_entropy(const ManyBodyState& state, const FockBasis& basis, Partition partition,
                           std::size_t dense_limit) {
  return entropy_of(schmidt_spectrum(state, basis, partition, dense_limit));
}

}  // namespace polariton
