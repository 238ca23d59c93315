#include "polariton/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "polariton/error.hpp"

namespace polariton::analytic {

using std::numbers::pi;

double tg_energy_discrete(int N, int L, double J_pol, double Omega) {
  if (L < 1 || N < 0) throw RangeError("need L >= 1 and N >= 0");
  if (N > L) throw RangeError("Fermi sea needs N <= L");
  int m_low = -(N / 2);
  int m_high = N / 2;
  if (N % 2 == 0) m_low = -(N / 2) + 1;
  double kinetic = 0.0;
  if (N > 0) {
    for (int m = m_low; m <= m_high; ++m) {
      kinetic += 2.0 - 2.0 * std::cos(2.0 * pi * m / L);
    }
  }
  return -N * Omega + J_pol * kinetic;
}

double tg_energy_open(int N, int L, double J_pol, double Omega) {
  if (L < 1 || N < 0) throw RangeError("need L >= 1 and N >= 0");
  if (N > L) throw RangeError("Fermi sea needs N <= L");
  double kinetic = 0.0;
  for (int m = 1; m <= N; ++m) kinetic += 2.0 - 2.0 * std::cos(pi * m / (L + 1));
  return -N * Omega + J_pol * kinetic;
}

double tg_energy_continuum(double rho, double ell, double J_pol, double Omega) {
  const double k_F = pi * rho / ell;
  const double inverse_mass = 2.0 * ell * ell * J_pol;
  return -Omega + k_F * k_F * inverse_mass / 6.0;
}

double tc_energy_small_rho(double rho, double Omega) { return 0.25 * Omega * rho; }

double bogoliubov_energy(int N, int L, double U_pol, double Omega) {
  return -Omega * N + 0.5 * U_pol * N * (N - 1.0) / L;
}

double crossover_coupling(double rho, double Omega) {
  return 3.0 * Omega / (2.0 * pi * pi * pi * rho * rho);
}

double lattice_dispersion(double k, double J_pol) { return 2.0 * J_pol * (1.0 - std::cos(k)); }

LindhardBand lindhard_support(double q, double k_F, double J_pol, int grid_points) {
  LindhardBand band{q, 0.0, 0.0};
  grid_points = std::max(grid_points, 2);
  constexpr double kSlack = 1e-12;
  double lower = std::numeric_limits<double>::infinity();
  double upper = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double k = -k_F + 2.0 * k_F * i / (grid_points - 1);
    double target = std::remainder(k + q, 2.0 * pi);  // in [-pi, pi]
    if (std::abs(target) < k_F - kSlack) continue;    // still inside the sea
    const double energy = lattice_dispersion(target, J_pol) - lattice_dispersion(k, J_pol);
    lower = std::min(lower, energy);
    upper = std::max(upper, energy);
  }
  if (upper < lower) return band;
  band.omega_lower = std::max(0.0, lower);
  band.omega_upper = std::max(band.omega_lower, upper);
  return band;
}

std::pair<double, double> polariton_bands(double q, double J, double Omega, double omega_x) {
  const double photon = 2.0 * J * (1.0 - std::cos(q));
  const double mean = 0.5 * (photon + omega_x);
  const double half_gap = std::sqrt(0.25 * (photon - omega_x) * (photon - omega_x) + Omega * Omega);
  return {mean - half_gap, mean + half_gap};
}

}  // namespace polariton::analytic
