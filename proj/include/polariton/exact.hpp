#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "polariton/basis.hpp"
#include "polariton/lanczos.hpp"
#include "polariton/model.hpp"
#include "polariton/sparse_operator.hpp"

namespace polariton {

/// Real amplitude vector over a FockBasis, unit norm.
struct ManyBodyState {
  Eigen::VectorXd amplitudes;
};

struct GroundStateResult {
  double energy = 0.0;
  ManyBodyState state;
  double residual_norm = 0.0;
  int iterations = 0;
  /// Set when the second-lowest level lies within 1e-8 of the ground energy;
  /// observables of a degenerate ground state depend on the solver's choice.
  bool degenerate = false;
  double gap = 0.0;  ///< E_1 - E_0 when degeneracy detection ran, else NaN
};

struct GroundStateOptions {
  double tol = 1e-9;
  int max_iter = 20000;
  std::uint64_t seed = 20240917;
  int krylov_dim = 64;
  bool detect_degeneracy = true;
};

inline constexpr double kDegeneracyThreshold = 1e-8;
inline constexpr std::size_t kDefaultDenseLimit = 4096;

/// Lowest eigenpair of H by restarted Lanczos with full reorthogonalization.
/// Throws ConvergenceError (carrying the best residual) after `max_iter`
/// operator applications and CapacityError for an empty operator.
GroundStateResult lanczos_ground_state(const SparseOperator& H, const GroundStateOptions& options = {});

GroundStateResult lanczos_ground_state(const SparseOperator& H, double tol, int max_iter,
                                       std::uint64_t seed);

/// Dense eigensolver up to this dimension in `ground_state`.
inline constexpr std::size_t kAutoDenseLimit = 2000;

struct DenseSpectrum {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< columns are eigenvectors
};

/// Full Hermitian eigendecomposition; CapacityError above `dense_limit`.
DenseSpectrum dense_spectrum(const SparseOperator& H, std::size_t dense_limit = kDefaultDenseLimit);
DenseSpectrum dense_spectrum(const Eigen::MatrixXd& H, std::size_t dense_limit = kDefaultDenseLimit);

/// Ground state by dense diagonalization when dim <= dense_limit, otherwise
/// by Lanczos. Large on-site repulsion stretches the spectrum and slows
/// Lanczos badly, so small sectors are always solved densely.
GroundStateResult ground_state(const SparseOperator& H, const GroundStateOptions& options = {},
                               std::size_t dense_limit = kAutoDenseLimit);

/// sum_j <n^a_j> / N.
double photonic_fraction(const ManyBodyState& state, const FockBasis& basis);

/// <n_j> of one species on every site.
std::vector<double> site_densities(const ManyBodyState& state, const FockBasis& basis,
                                   Species species);

struct CorrelationResult {
  Species kind = Species::photon;
  int reference_site = 0;
  std::vector<double> values;  ///< g2(j, j0) for j = 0..L-1
  double density = 0.0;        ///< total density N / L used for normalization
  bool degenerate_warning = false;
};

/// g2(j, j0) = <c_j^+ c_{j0}^+ c_{j0} c_j> / rho^2 (sites are 0-based),
/// evaluated from the normal-ordered four-operator expectation.
CorrelationResult g2(const ManyBodyState& state, const FockBasis& basis, Species kind, int j0);

/// Same quantity from density-density correlations minus the contact term,
/// (<n_j n_j0> - delta_{j j0} <n_j>) / rho^2.
CorrelationResult g2_from_density_correlations(const ManyBodyState& state, const FockBasis& basis,
                                               Species kind, int j0);

/// <n_j n_k> - <n_j><n_k> for every pair.
Eigen::MatrixXd density_covariance(const ManyBodyState& state, const FockBasis& basis,
                                   Species species);

struct Partition {
  enum class Kind { light_matter, left_right };
  Kind kind = Kind::light_matter;
  int cut_site = 0;  ///< left_right keeps rungs 0..cut_site

  static Partition light_matter() { return {Kind::light_matter, 0}; }
  static Partition left_right(int cut_site) { return {Kind::left_right, cut_site}; }
};

/// Which side's reduced density matrix to diagonalize.
enum class Subsystem { kept, traced };

/// Eigenvalues of the reduced density matrix of one side of the bipartition,
/// descending. Built block by block in the kept-side particle number.
std::vector<double> reduced_density_spectrum(const ManyBodyState& state, const FockBasis& basis,
                                             Partition partition, Subsystem side,
                                             std::size_t dense_limit = kDefaultDenseLimit);

/// Squared Schmidt coefficients from singular values of the amplitude matrix.
std::vector<double> schmidt_spectrum(const ManyBodyState& state, const FockBasis& basis,
                                     Partition partition,
                                     std::size_t dense_limit = kDefaultDenseLimit);

/// -sum p log p over the Schmidt spectrum, in nats.
double von_neumann_entropy(const ManyBodyState& state, const FockBasis& basis, Partition partition,
                           std::size_t dense_limit = kDefaultDenseLimit);

double entropy_of(const std::vector<double>& probabilities);

}  // namespace polariton
