#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "polariton/basis.hpp"
#include "polariton/sparse_operator.hpp"

namespace polariton {

enum class Boundary { open, periodic };

std::string to_string(Boundary boundary);
Boundary boundary_from_string(const std::string& text);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Couplings and geometry of the exciton-photon ladder. Energies are in the
/// same unit as `Omega` (conventionally Omega = 1).
struct ModelParams {
  double omega_x = 0.0;  ///< exciton detuning
  double J = 0.0;        ///< photon hopping
  double Omega = 1.0;    ///< Rabi coupling
  double U = 1.0;        ///< on-site exciton repulsion; kInfinity for hard-core
  int L = 1;
  int N = 0;
  double ell = 1.0;  ///< inter-dot distance, only used for continuum conversions
  Boundary boundary = Boundary::open;
  std::optional<int> cap_photon;   ///< default min(N, 5)
  std::optional<int> cap_exciton;  ///< default min(N, 5), forced to 1 when hard-core
  /// Treat U >= 1e3 * Omega as hard-core. Off by default: large finite U is
  /// kept as finite-U arithmetic.
  bool hard_core_large_u = false;

  bool hard_core() const;
  int resolved_cap_photon() const;
  int resolved_cap_exciton() const;
  /// Throws RangeError on inadmissible couplings or geometry.
  void validate() const;
  /// Copy with a different excitation number (caps re-resolved for that sector).
  ModelParams with_particles(int particles) const;
};

/// Basis of the (L, N) sector with the resolved caps of `params`.
FockBasis make_basis(const ModelParams& params,
                     std::uint64_t max_dimension = kDefaultMaxDimension);

/// Full ladder Hamiltonian
///   H = sum_j [ w_X n^x_j - J (a_j^+ a_{j+1} + h.c. - 2 n^a_j)
///               - Omega (x_j^+ a_j + a_j^+ x_j) + U/2 x_j^+ x_j^+ x_j x_j ].
/// The 2J n^a_j term is kept on every site for open chains as well.
SparseOperator build_ladder_hamiltonian(const ModelParams& params, const FockBasis& basis);

/// Effective lower-polariton chain with J_pol = J/2:
///   H = -J_pol sum_j (b_j^+ b_{j+1} + h.c.) + (2 J_pol - Omega) sum_j n_j
///       + U_pol/2 sum_j n_j (n_j - 1).
SparseOperator build_polariton_hamiltonian(const ModelParams& params, double U_pol,
                                           const FockBasis& basis);

/// Two-boson on-site block in the order (|2 ph>, |1 ph 1 X>, |2 X>).
Eigen::Matrix3d born_oppenheimer_matrix(double U, double Omega);

/// U_pol = E_BO + 2 Omega, with E_BO the lowest eigenvalue of the two-boson
/// block; exactly (2 - sqrt 2) Omega for infinite U.
double born_oppenheimer_upol(double U, double Omega);

/// Tavis-Cummings block in the maximal Dicke multiplet S = L/2, basis
/// |n_ph = N - m> (x) |S_z = -L/2 + m>, m = 0..N.
Eigen::MatrixXd build_tavis_cummings_block(int L, int N, double Omega);

/// Lowest eigenvalue of the Tavis-Cummings block.
double tavis_cummings_ground_energy(int L, int N, double Omega);

/// Diagonal number operators used by observables.
enum class Species { photon, exciton };
std::string to_string(Species species);

}  // namespace polariton
