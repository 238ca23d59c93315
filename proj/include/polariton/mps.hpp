#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polariton/exact.hpp"
#include "polariton/model.hpp"

namespace polariton::mps {

using Matrix = Eigen::MatrixXd;

/// Merged rung space: s = n_photon * (cap_exciton + 1) + n_exciton.
struct LocalSpace {
  int cap_photon = 1;
  int cap_exciton = 1;

  int dim() const { return (cap_photon + 1) * (cap_exciton + 1); }
  int photons(int s) const { return s / (cap_exciton + 1); }
  int excitons(int s) const { return s % (cap_exciton + 1); }
  int index(int n_photon, int n_exciton) const { return n_photon * (cap_exciton + 1) + n_exciton; }
};

/// Charge sectors of one virtual bond: particles to the left -> multiplicity.
using BondSectors = std::map<int, int>;

/// Block-sparse matrix product state with an additive U(1) label.
///
/// Bond b (b = 0..L) sits left of site b and is labelled by the number of
/// particles on sites 0..b-1. Site tensor `tensors[j][s]` maps a left charge
/// q to the block of shape (dim_b(q), dim_{b+1}(q + charge(s))).
class MPSState {
 public:
  MPSState() = default;
  MPSState(int length, LocalSpace local, int target_charge, std::vector<int> local_charges);

  int length() const { return length_; }
  const LocalSpace& local() const { return local_; }
  int target_charge() const { return target_charge_; }
  int charge(int s) const { return local_charges_[s]; }
  const std::vector<int>& local_charges() const { return local_charges_; }
  int center() const { return center_; }
  void set_center(int site) { center_ = site; }

  const BondSectors& bond(int b) const { return bonds_[b]; }
  BondSectors& bond(int b) { return bonds_[b]; }
  int bond_dim(int b, int q) const;
  int bond_dim(int b) const;
  /// Total dimension of bonds 1..L-1.
  std::vector<int> bond_dims() const;

  std::map<int, Matrix>& tensor(int site, int s) { return tensors_[site][s]; }
  const std::map<int, Matrix>& tensor(int site, int s) const { return tensors_[site][s]; }
  /// Block for (site, s, left charge) or nullptr when absent.
  const Matrix* block(int site, int s, int q_left) const;

  /// Moves the orthogonality center with exact (untruncated) SVDs.
  void move_center(int site);
  /// Brings every site into right-canonical form and normalizes.
  void right_canonicalize();
  double norm() const;

  /// Random state with all admissible charges present on every bond.
  static MPSState random(int length, LocalSpace local, int target_charge,
                         std::vector<int> local_charges, int sector_dim, std::uint64_t seed);

 private:
  void left_normalize_site(int site);
  void right_normalize_site(int site);

  int length_ = 0;
  LocalSpace local_;
  int target_charge_ = 0;
  std::vector<int> local_charges_;
  int center_ = 0;
  std::vector<BondSectors> bonds_;
  std::vector<std::vector<std::map<int, Matrix>>> tensors_;
};

/// Sparse local operator entries <s| O |t>.
struct LocalOperator {
  struct Entry {
    int bra;
    int ket;
    double value;
  };
  std::vector<Entry> entries;
  int shift = 0;  ///< charge(bra) - charge(ket) for every entry
};

/// W[site] holds terms (left state, right state, operator). State 0 is the
/// left boundary and state `width - 1` the right boundary.
struct MPO {
  struct Term {
    int left;
    int right;
    LocalOperator op;
  };
  int width = 0;
  std::vector<std::vector<Term>> sites;
  /// Net charge carried by the operator string ending in each MPO state.
  std::vector<int> state_shift;
};

/// MPO of the ladder Hamiltonian on the merged-rung chain (open boundary).
/// With `penalty > 0`, adds penalty * (N_total - N)^2.
MPO ladder_mpo(const ModelParams& params, const LocalSpace& local, double penalty = 0.0);

/// Dense d^L x d^L matrix of an MPO (small L only), site 0 most significant.
Matrix mpo_to_dense(const MPO& mpo, int local_dim);

/// <psi|O|psi> for an MPO.
double mpo_expectation(const MPSState& state, const MPO& mpo);

struct DmrgOptions {
  int chi_max = 64;
  int n_sweeps = 12;
  int min_sweeps = 3;
  double truncation_cutoff = 1e-10;  ///< discarded weight per bond
  double energy_tol = 1e-10;         ///< per-sweep energy change for convergence
  int lanczos_iter = 60;
  double lanczos_tol = 1e-10;
  int max_local_dim = 64;
  std::uint64_t seed = 20240917;
  int initial_sector_dim = 2;
  /// Replace structural number conservation by penalty * (N - N0)^2.
  bool number_penalty = false;
  double penalty = 10.0;
  /// Start from this state instead of a random one (e.g. a checkpoint).
  std::optional<MPSState> initial_state;
};

struct SweepReport {
  int sweep = 0;
  double energy = 0.0;
  double max_discarded = 0.0;
  double total_discarded = 0.0;
  int max_bond = 0;
};

struct DmrgResult {
  double energy = 0.0;
  MPSState state;
  std::vector<SweepReport> sweeps;
  bool converged = false;
};

/// Two-site DMRG ground state of the ladder on an open chain.
DmrgResult dmrg_ground_state(const ModelParams& params, const DmrgOptions& options = {});

/// Local space used by DMRG for `params`; CapacityError above `max_local_dim`.
LocalSpace local_space_for(const ModelParams& params, int max_local_dim = 64);

// Measurements. All local operators involved are diagonal in occupations.

std::vector<double> mps_site_densities(const MPSState& state, Species species);
double mps_total_number(const MPSState& state);
double mps_photonic_fraction(const MPSState& state);
CorrelationResult mps_measure_g2(const MPSState& state, Species kind, int j0);

/// Squared Schmidt values across bond b (1..L-1); moves the center to b-1.
std::vector<double> mps_schmidt_spectrum(MPSState& state, int bond);
/// Entanglement entropy (nats) across bond b; moves the center to b-1.
double mps_bond_entropy(MPSState& state, int bond);

/// Amplitudes of the MPS on the ED basis of the same sector (small L only).
ManyBodyState mps_to_vector(const MPSState& state, const FockBasis& basis);

// Checkpoints: "POLMPS01" magic, little-endian u64 header length, JSON header,
// then every block's doubles in column-major order, in header order.

/// Stable FNV-1a hash of the physical parameters, as 16 hex digits.
std::string params_hash(const ModelParams& params);
void write_checkpoint(const std::filesystem::path& path, const MPSState& state,
                      const ModelParams& params);
struct Checkpoint {
  MPSState state;
  std::string params_hash;
};
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace polariton::mps
