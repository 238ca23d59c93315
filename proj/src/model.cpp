#include "polariton/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "polariton/error.hpp"

namespace polariton {
namespace {

constexpr int kDefaultCap = 5;
constexpr double kHardCoreThreshold = 1e3;

std::vector<std::pair<int, int>> hopping_bonds(int L, Boundary boundary) {
  std::vector<std::pair<int, int>> bonds;
  for (int j = 0; j + 1 < L; ++j) bonds.emplace_back(j, j + 1);
  if (boundary == Boundary::periodic && L >= 3) bonds.emplace_back(L - 1, 0);
  return bonds;
}

using Row = std::vector<std::pair<std::uint32_t, double>>;

// Adds `amplitude * sqrt(n_from) * sqrt(n_to + 1)` for moving one boson from
// mode `from` to mode `to`, if the target state is inside the basis.
void add_transfer(const FockBasis& basis, std::vector<std::uint8_t>& occ, int from, int to,
                  double amplitude, int cap_to, Row& row) {
  const int n_from = occ[from];
  const int n_to = occ[to];
  if (n_from == 0 || n_to >= cap_to || amplitude == 0.0) return;
  occ[from] = static_cast<std::uint8_t>(n_from - 1);
  occ[to] = static_cast<std::uint8_t>(n_to + 1);
  if (auto target = basis.find(occ)) {
    row.emplace_back(static_cast<std::uint32_t>(*target),
                     amplitude * std::sqrt(static_cast<double>(n_from) * (n_to + 1)));
  }
  occ[from] = static_cast<std::uint8_t>(n_from);
  occ[to] = static_cast<std::uint8_t>(n_to);
}

}  // namespace

std::string to_string(Boundary boundary) {
  return boundary == Boundary::open ? "open" : "periodic";
}

Boundary boundary_from_string(const std::string& text) {
  if (text == "open" || text == "obc") return Boundary::open;
  if (text == "periodic" || text == "pbc") return Boundary::periodic;
  throw RangeError("unknown boundary condition '" + text + "'");
}

std::string to_string(Species species) {
  return species == Species::photon ? "photon" : "exciton";
}

bool ModelParams::hard_core() const {
  return std::isinf(U) || (hard_core_large_u && U >= kHardCoreThreshold * Omega);
}

int ModelParams::resolved_cap_photon() const {
  return cap_photon.value_or(std::min(N, kDefaultCap));
}

int ModelParams::resolved_cap_exciton() const {
  if (hard_core()) return 1;
  return cap_exciton.value_or(std::min(N, kDefaultCap));
}

void ModelParams::validate() const {
  if (!(J >= 0.0)) throw RangeError("J must be non-negative");
  if (!(Omega > 0.0)) throw RangeError("Omega must be positive");
  if (!(U >= 0.0)) throw RangeError("U must be non-negative or infinite");
  if (L < 1) throw RangeError("L must be at least 1");
  if (N < 0) throw RangeError("N must be non-negative");
  if (!(ell > 0.0)) throw RangeError("ell must be positive");
  if (boundary == Boundary::periodic && L < 3) {
    throw RangeError("periodic boundary needs L >= 3");
  }
}

ModelParams ModelParams::with_particles(int particles) const {
  ModelParams copy = *this;
  copy.N = particles;
  return copy;
}

FockBasis make_basis(const ModelParams& params, std::uint64_t max_dimension) {
  params.validate();
  // A zero cap only arises for N = 0, where any cap >= 1 gives the same basis.
  return FockBasis::ladder(params.L, params.N, std::max(1, params.resolved_cap_photon()),
                           std::max(1, params.resolved_cap_exciton()), max_dimension);
}

SparseOperator build_ladder_hamiltonian(const ModelParams& params, const FockBasis& basis) {
  params.validate();
  if (basis.species() != 2 || basis.sites() != params.L || basis.particles() != params.N ||
      basis.cap_photon() != std::max(1, params.resolved_cap_photon()) ||
      basis.cap_exciton() != std::max(1, params.resolved_cap_exciton())) {
    throw MismatchError("basis does not match model parameters");
  }
  const int L = params.L;
  const bool hard_core = params.hard_core();
  const auto bonds = hopping_bonds(L, params.boundary);
  SparseOperator H(basis.size());
  std::vector<std::uint8_t> occ(basis.modes());
  Row row;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    auto src = basis.occupations(i);
    std::copy(src.begin(), src.end(), occ.begin());
    row.clear();
    double diagonal = 0.0;
    for (int j = 0; j < L; ++j) {
      const int na = occ[j];
      const int nx = occ[L + j];
      diagonal += params.omega_x * nx + 2.0 * params.J * na;
      if (!hard_core) diagonal += 0.5 * params.U * nx * (nx - 1);
    }
    row.emplace_back(static_cast<std::uint32_t>(i), diagonal);
    for (auto [a, b] : bonds) {
      add_transfer(basis, occ, b, a, -params.J, basis.cap_photon(), row);
      add_transfer(basis, occ, a, b, -params.J, basis.cap_photon(), row);
    }
    for (int j = 0; j < L; ++j) {
      add_transfer(basis, occ, j, L + j, -params.Omega, basis.cap_exciton(), row);
      add_transfer(basis, occ, L + j, j, -params.Omega, basis.cap_photon(), row);
    }
    H.push_row(row);
  }
  return H;
}

SparseOperator build_polariton_hamiltonian(const ModelParams& params, double U_pol,
                                           const FockBasis& basis) {
  params.validate();
  if (basis.species() != 1 || basis.sites() != params.L || basis.particles() != params.N) {
    throw MismatchError("polariton Hamiltonian needs a single-species basis of the same sector");
  }
  const double J_pol = 0.5 * params.J;
  const auto bonds = hopping_bonds(params.L, params.boundary);
  SparseOperator H(basis.size());
  std::vector<std::uint8_t> occ(basis.modes());
  Row row;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    auto src = basis.occupations(i);
    std::copy(src.begin(), src.end(), occ.begin());
    row.clear();
    double diagonal = 0.0;
    for (int j = 0; j < params.L; ++j) {
      const int n = occ[j];
      diagonal += (2.0 * J_pol - params.Omega) * n + 0.5 * U_pol * n * (n - 1);
    }
    row.emplace_back(static_cast<std::uint32_t>(i), diagonal);
    for (auto [a, b] : bonds) {
      add_transfer(basis, occ, b, a, -J_pol, basis.cap_photon(), row);
      add_transfer(basis, occ, a, b, -J_pol, basis.cap_photon(), row);
    }
    H.push_row(row);
  }
  return H;
}

Eigen::Matrix3d born_oppenheimer_matrix(double U, double Omega) {
  const double c = -std::sqrt(2.0) * Omega;
  Eigen::Matrix3d H;
  H << 0.0, c, 0.0,
       c, 0.0, c,
       0.0, c, U;
  return H;
}

double born_oppenheimer_upol(double U, double Omega) {
  if (std::isinf(U)) return (2.0 - std::sqrt(2.0)) * Omega;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(born_oppenheimer_matrix(U, Omega),
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0) + 2.0 * Omega;
}

Eigen::MatrixXd build_tavis_cummings_block(int L, int N, double Omega) {
  if (L < 1 || N < 0) throw RangeError("Tavis-Cummings block needs L >= 1, N >= 0");
  if (N > L) throw RangeError("Tavis-Cummings block needs N <= L");
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N + 1, N + 1);
  const double g = Omega / std::sqrt(static_cast<double>(L));
  for (int m = 0; m < N; ++m) {
    // a_0 lowers n_ph = N - m, S_+ raises S_z = -L/2 + m: sqrt((m + 1)(L - m)).
    const double element =
        -g * std::sqrt(static_cast<double>(N - m)) * std::sqrt(static_cast<double>(m + 1) * (L - m));
    H(m, m + 1) = element;
    H(m + 1, m) = element;
  }
  return H;
}

double tavis_cummings_ground_energy(int L, int N, double Omega) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(build_tavis_cummings_block(L, N, Omega),
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

}  // namespace polariton
