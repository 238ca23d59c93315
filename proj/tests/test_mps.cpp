#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracle.hpp"
#include "polariton/error.hpp"
#include "polariton/exact.hpp"
#include "polariton/mps.hpp"

using namespace polariton;

namespace {

ModelParams ladder(int L, int N, double J, double U, Boundary b = Boundary::open) {
  ModelParams p;
  p.L = L;
  p.N = N;
  p.J = J;
  p.U = U;
  p.boundary = b;
  return p;
}

// Index of an occupation vector in the MPO's product space (site 0 most significant).
int product_index(const oracle::Occ& occ, const mps::LocalSpace& local, int L) {
  int index = 0;
  for (int j = 0; j < L; ++j) index = index * local.dim() + local.index(occ[j], occ[L + j]);
  return index;
}

// Largest deviation of the dense MPO from the reference Hamiltonian inside the N sector.
double mpo_deviation(const ModelParams& p, double penalty = 0.0) {
  const mps::LocalSpace local = mps::local_space_for(p);
  const Eigen::MatrixXd dense = mps::mpo_to_dense(mps::ladder_mpo(p, local, penalty), local.dim());
  const auto s = oracle::make_space(p.L, p.N, local.cap_photon, local.cap_exciton);
  const Eigen::MatrixXd H = oracle::ladder_hamiltonian(p, s, local.cap_photon, local.cap_exciton);
  double worst = 0.0;
  for (std::size_t r = 0; r < s.states.size(); ++r) {
    for (std::size_t c = 0; c < s.states.size(); ++c) {
      const double v = dense(product_index(s.states[r], local, p.L), product_index(s.states[c], local, p.L));
      worst = std::max(worst, std::abs(v - H(r, c)));
    }
  }
  return worst;
}

std::vector<int> charges(const mps::LocalSpace& local) {
  std::vector<int> q;
  for (int s = 0; s < local.dim(); ++s) q.push_back(local.photons(s) + local.excitons(s));
  return q;
}

mps::MPSState random_state(const ModelParams& p, int sector_dim, std::uint64_t seed) {
  const mps::LocalSpace local = mps::local_space_for(p);
  return mps::MPSState::random(p.L, local, p.N, charges(local), sector_dim, seed);
}

mps::DmrgOptions tight() {
  mps::DmrgOptions o;
  o.chi_max = 64;
  o.n_sweeps = 20;
  o.energy_tol = 1e-12;
  o.truncation_cutoff = 1e-14;
  return o;
}

}  // namespace

TEST_CASE("MPO reproduces the ladder Hamiltonian") {
  for (int L : {1, 2, 3, 4}) {
    for (double U : {0.0, 1.3, kInfinity}) {
      ModelParams p = ladder(L, 2, 0.4, U);
      p.omega_x = 0.1;
      CHECK(mpo_deviation(p) < 1e-12);
      if (L >= 3) {
        p.boundary = Boundary::periodic;
        CHECK(mpo_deviation(p) < 1e-12);
      }
    }
  }
}

TEST_CASE("number penalty vanishes inside the target sector") {
  CHECK(mpo_deviation(ladder(3, 2, 0.4, 1.0), 5.0) < 1e-11);
  // Outside the sector the penalty lifts states by lambda (n - N)^2.
  const ModelParams p = ladder(2, 1, 0.0, 1.0);
  const mps::LocalSpace local = mps::local_space_for(p);
  const Eigen::MatrixXd dense = mps::mpo_to_dense(mps::ladder_mpo(p, local, 5.0), local.dim());
  CHECK(dense(0, 0) == doctest::Approx(5.0));
}

TEST_CASE("DMRG matches exact diagonalization") {
  for (double J : {0.01, 0.1, 1.0}) {
    const ModelParams p = ladder(6, 2, J, 1.0);
    const FockBasis basis = make_basis(p);
    const auto ed = ground_state(build_ladder_hamiltonian(p, basis));
    auto r = mps::dmrg_ground_state(p, tight());
    CHECK(r.converged);
    CHECK(std::abs(r.energy - ed.energy) < 1e-8);
    CHECK(std::abs(mps::mpo_expectation(r.state, mps::ladder_mpo(p, r.state.local())) - r.energy) < 1e-9);
    CHECK(mps::mps_total_number(r.state) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(mps::mps_photonic_fraction(r.state) ==
          doctest::Approx(photonic_fraction(ed.state, basis)).epsilon(1e-7));
    for (Species kind : {Species::photon, Species::exciton}) {
      const auto a = mps::mps_measure_g2(r.state, kind, 3);
      const auto b = g2(ed.state, basis, kind, 3);
      for (int j = 0; j < p.L; ++j) CHECK(std::abs(a.values[j] - b.values[j]) < 1e-6);
      const auto da = mps::mps_site_densities(r.state, kind);
      const auto db = site_densities(ed.state, basis, kind);
      for (int j = 0; j < p.L; ++j) CHECK(std::abs(da[j] - db[j]) < 1e-7);
    }
    // Same state up to a sign.
    const ManyBodyState v = mps::mps_to_vector(r.state, basis);
    CHECK(std::abs(v.amplitudes.dot(ed.state.amplitudes)) == doctest::Approx(1.0).epsilon(1e-7));
    for (int bond = 1; bond < p.L; ++bond) {
      const double S = mps::mps_bond_entropy(r.state, bond);
      CHECK(std::abs(S - von_neumann_entropy(ed.state, basis, Partition::left_right(bond - 1))) < 1e-6);
    }
  }
}

TEST_CASE("DMRG handles hard-core excitons") {
  const ModelParams p = ladder(6, 3, 0.2, kInfinity);
  const auto ed = ground_state(build_ladder_hamiltonian(p, make_basis(p)));
  const auto r = mps::dmrg_ground_state(p, tight());
  CHECK(std::abs(r.energy - ed.energy) < 1e-8);
  CHECK(r.state.local().cap_exciton == 1);
}

TEST_CASE("number-penalty mode reaches the same ground state") {
  const ModelParams p = ladder(5, 2, 0.3, 1.0);
  const auto ed = ground_state(build_ladder_hamiltonian(p, make_basis(p)));
  mps::DmrgOptions o = tight();
  o.number_penalty = true;
  const auto r = mps::dmrg_ground_state(p, o);
  CHECK(std::abs(r.energy - ed.energy) < 1e-7);
  CHECK(mps::mps_total_number(r.state) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("sweep energies never increase and bonds respect chi_max") {
  const ModelParams p = ladder(10, 4, 0.3, 1.0);
  mps::DmrgOptions o;
  o.chi_max = 12;
  o.n_sweeps = 6;
  o.min_sweeps = 6;
  const auto r = mps::dmrg_ground_state(p, o);
  for (std::size_t i = 1; i < r.sweeps.size(); ++i) CHECK(r.sweeps[i].energy <= r.sweeps[i - 1].energy + 1e-9);
  for (int d : r.state.bond_dims()) CHECK(d <= 12);
  for (const auto& s : r.sweeps) CHECK(s.max_bond <= 12);
}

TEST_CASE("larger bond dimension lowers the energy") {
  const ModelParams p = ladder(10, 4, 0.5, 1.0);
  double previous = 1e9;
  for (int chi : {2, 4, 8, 24}) {
    mps::DmrgOptions o;
    o.chi_max = chi;
    o.n_sweeps = 8;
    const double e = mps::dmrg_ground_state(p, o).energy;
    CHECK(e <= previous + 1e-9);
    previous = e;
  }
}

TEST_CASE("canonical forms are isometries") {
  const ModelParams p = ladder(6, 3, 0.3, 1.0);
  mps::MPSState st = random_state(p, 4, 9);
  CHECK(st.norm() == doctest::Approx(1.0).epsilon(1e-12));
  st.move_center(3);
  CHECK(st.center() == 3);
  CHECK(st.norm() == doctest::Approx(1.0).epsilon(1e-12));
  // Left of the centre: sum_s A^s^T A^s = 1 on every right charge sector.
  for (int j = 0; j < 3; ++j) {
    std::map<int, Eigen::MatrixXd> gram;
    for (int s = 0; s < st.local().dim(); ++s) {
      for (const auto& [q, m] : st.tensor(j, s)) {
        const int right = q + st.charge(s);
        auto& g = gram[right];
        if (g.size() == 0) g = Eigen::MatrixXd::Zero(m.cols(), m.cols());
        g += m.transpose() * m;
      }
    }
    for (const auto& [q, g] : gram) CHECK((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).norm() < 1e-12);
  }
  // Right of the centre: sum_s B^s B^s^T = 1 on every left charge sector.
  for (int j = 4; j < 6; ++j) {
    std::map<int, Eigen::MatrixXd> gram;
    for (int s = 0; s < st.local().dim(); ++s) {
      for (const auto& [q, m] : st.tensor(j, s)) {
        auto& g = gram[q];
        if (g.size() == 0) g = Eigen::MatrixXd::Zero(m.rows(), m.rows());
        g += m * m.transpose();
      }
    }
    for (const auto& [q, g] : gram) CHECK((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).norm() < 1e-12);
  }
}

TEST_CASE("moving the centre preserves the state") {
  const ModelParams p = ladder(5, 2, 0.3, 1.0);
  const FockBasis basis = make_basis(p);
  mps::MPSState st = random_state(p, 3, 4);
  const Eigen::VectorXd before = mps::mps_to_vector(st, basis).amplitudes;
  st.move_center(4);
  st.move_center(1);
  const Eigen::VectorXd after = mps::mps_to_vector(st, basis).amplitudes;
  CHECK((before - after).norm() < 1e-12);
  const auto schmidt = mps::mps_schmidt_spectrum(st, 2);
  double total = 0.0;
  for (double w : schmidt) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("checkpoint round trip") {
  const ModelParams p = ladder(6, 2, 0.1, 1.0);
  const auto r = mps::dmrg_ground_state(p, tight());
  const auto path = std::filesystem::temp_directory_path() / "polariton_test_checkpoint.mps";
  mps::write_checkpoint(path, r.state, p);
  const mps::Checkpoint back = mps::read_checkpoint(path);
  CHECK(back.params_hash == mps::params_hash(p));
  CHECK(back.state.bond_dims() == r.state.bond_dims());
  CHECK(back.state.center() == r.state.center());
  const FockBasis basis = make_basis(p);
  CHECK((mps::mps_to_vector(back.state, basis).amplitudes - mps::mps_to_vector(r.state, basis).amplitudes).norm() ==
        0.0);
  // Resuming from the checkpoint converges immediately to the same energy.
  mps::DmrgOptions o = tight();
  o.initial_state = back.state;
  const auto resumed = mps::dmrg_ground_state(p, o);
  CHECK(std::abs(resumed.energy - r.energy) < 1e-10);
  std::filesystem::remove(path);

  ModelParams q = p;
  q.J = 0.2;
  CHECK(mps::params_hash(q) != mps::params_hash(p));
}

TEST_CASE("corrupt checkpoints are rejected") {
  const auto path = std::filesystem::temp_directory_path() / "polariton_test_corrupt.mps";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTANMPS and some bytes";
  }
  CHECK_THROWS_AS(mps::read_checkpoint(path), Error);
  std::filesystem::remove(path);
}

TEST_CASE("DMRG rejects unsupported requests") {
  CHECK_THROWS_AS(mps::dmrg_ground_state(ladder(6, 2, 0.1, 1.0, Boundary::periodic)), RangeError);
  ModelParams p = ladder(6, 20, 0.1, 1.0);
  p.cap_photon = 20;
  p.cap_exciton = 20;
  CHECK_THROWS_AS(mps::local_space_for(p), CapacityError);
  mps::DmrgOptions o;
  o.initial_state = random_state(ladder(5, 2, 0.1, 1.0), 2, 1);
  CHECK_THROWS_AS(mps::dmrg_ground_state(ladder(6, 2, 0.1, 1.0), o), MismatchError);
}

TEST_CASE("single-site chain") {
  const ModelParams p = ladder(1, 2, 0.0, 1.0);
  const auto r = mps::dmrg_ground_state(p);
  CHECK(r.energy == doctest::Approx(born_oppenheimer_upol(1.0, 1.0) - 2.0).epsilon(1e-10));
}
