#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "polariton/analytic.hpp"
#include "polariton/error.hpp"

using namespace polariton;
using namespace polariton::analytic;

TEST_CASE("lattice Fermi sea equals the lowest free-fermion levels") {
  for (int L : {5, 8, 12}) {
    for (int N = 0; N <= L; ++N) {
      const double J_pol = 0.37;
      CHECK(tg_energy_discrete(N, L, J_pol, 1.0) ==
            doctest::Approx(-N + oracle::free_fermion_energy(N, L, J_pol, true)).epsilon(1e-12));
      CHECK(tg_energy_open(N, L, J_pol, 1.0) ==
            doctest::Approx(-N + oracle::free_fermion_energy(N, L, J_pol, false)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(tg_energy_discrete(9, 8, 0.1, 1.0), RangeError);
}

TEST_CASE("TG energy is linear in J_pol and shifts by -N Omega") {
  const double a = tg_energy_discrete(3, 8, 0.1, 1.0) + 3.0;
  const double b = tg_energy_discrete(3, 8, 0.2, 1.0) + 3.0;
  CHECK(b == doctest::Approx(2.0 * a).epsilon(1e-14));
  CHECK(tg_energy_discrete(3, 8, 0.1, 2.0) + 6.0 == doctest::Approx(a).epsilon(1e-14));
}

TEST_CASE("lattice Fermi sea approaches the continuum at low density") {
  // At fixed rho the lattice blueshift per particle tends to the continuum
  // value as rho -> 0, with relative corrections of order k_F^2.
  const double J_pol = 0.5;
  for (double rho : {0.05, 0.02}) {
    const int L = 2001;
    const int N = static_cast<int>(std::lround(rho * L)) | 1;
    const double lattice = tg_energy_discrete(N, L, J_pol, 1.0) / N + 1.0;
    const double continuum = tg_energy_continuum(double(N) / L, 1.0, J_pol, 1.0) + 1.0;
    const double kF = M_PI * N / L;
    CHECK(std::abs(lattice / continuum - 1.0) < kF * kF);
  }
}

TEST_CASE("small-density TC law and Bogoliubov energy") {
  CHECK(tc_energy_small_rho(0.375, 1.0) == doctest::Approx(0.09375));
  CHECK(tc_energy_small_rho(0.2, 2.0) == doctest::Approx(0.1));
  CHECK(bogoliubov_energy(3, 8, 0.2, 1.0) == doctest::Approx(-3.0 + 0.1 * 3 * 2 / 8.0));
  CHECK(bogoliubov_energy(1, 8, 0.2, 1.0) == doctest::Approx(-1.0));
}

TEST_CASE("crossover coupling") {
  CHECK(crossover_coupling(0.25, 1.0) == doctest::Approx(3.0 * 16.0 / (2.0 * std::pow(M_PI, 3))));
  CHECK(crossover_coupling(0.5, 1.0) == doctest::Approx(crossover_coupling(0.25, 1.0) / 4.0));
}

TEST_CASE("polariton bands diagonalize the one-particle block") {
  for (double q : {0.0, 0.4, 1.3, M_PI}) {
    for (double wx : {0.0, 0.3, -0.2}) {
      const double J = 0.7, Omega = 0.9;
      Eigen::Matrix2d h;
      h << 2.0 * J * (1.0 - std::cos(q)), -Omega, -Omega, wx;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
      const auto [lo, hi] = polariton_bands(q, J, Omega, wx);
      CHECK(lo == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-13));
      CHECK(hi == doctest::Approx(es.eigenvalues()(1)).epsilon(1e-13));
    }
  }
  const auto [lo, hi] = polariton_bands(0.0, 0.1, 1.0);
  CHECK(lo == doctest::Approx(-1.0));
  CHECK(hi == doctest::Approx(1.0));
}

TEST_CASE("Lindhard support encloses every particle-hole excitation") {
  // Brute force on a finite ring: all pairs with |k| <= k_F occupied and the
  // target |k + q| > k_F empty.
  const int L = 400;
  const int N = 101;
  const double J_pol = 0.05;
  const double kF = M_PI * (N - 1) / L;
  for (int m : {10, 50, 100, 150, 200}) {
    const double q = 2.0 * M_PI * m / L;
    const LindhardBand band = lindhard_support(q, kF, J_pol);
    double lo = 1e9, hi = -1e9;
    for (int a = -(N - 1) / 2; a <= (N - 1) / 2; ++a) {
      int b = a + m;
      b = ((b + L / 2) % L + L) % L - L / 2;
      if (std::abs(b) <= (N - 1) / 2) continue;
      const double w = lattice_dispersion(2.0 * M_PI * b / L, J_pol) - lattice_dispersion(2.0 * M_PI * a / L, J_pol);
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
    CHECK(band.q == q);
    CHECK(band.omega_lower <= lo + 1e-12);
    CHECK(band.omega_upper >= hi - 1e-12);
    // Tight up to the ring's momentum resolution.
    const double slack = 2.0 * J_pol * 2.0 * M_PI / L * 2.0;
    CHECK(band.omega_lower >= lo - slack);
    CHECK(band.omega_upper <= hi + slack);
  }
}

TEST_CASE("lattice dispersion") {
  CHECK(lattice_dispersion(0.0, 0.3) == 0.0);
  CHECK(lattice_dispersion(M_PI, 0.3) == doctest::Approx(1.2));
  CHECK(lattice_dispersion(0.7, 0.3) == doctest::Approx(lattice_dispersion(-0.7, 0.3)));
}
