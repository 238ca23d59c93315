#pragma once

#include <utility>

namespace polariton::analytic {

/// Lattice Fermi-sea energy of N impenetrable polaritons on a ring:
///   E = -N Omega + J_pol sum_m [2 - 2 cos(2 pi m / L)].
/// Odd N fills m = -M..M; even N fills m = -N/2+1..N/2 (one of the two
/// degenerate seas). Throws RangeError if N > L.
double tg_energy_discrete(int N, int L, double J_pol, double Omega);

/// Same on an open chain: standing waves k_m = pi m / (L + 1), m = 1..N.
double tg_energy_open(int N, int L, double J_pol, double Omega);

/// Continuum Fermi-gas energy per particle: -Omega + k_F^2 / (6 m_pol) with
/// k_F = pi rho / ell and 1/m_pol = 2 ell^2 J_pol.
double tg_energy_continuum(double rho, double ell, double J_pol, double Omega);

/// Leading small-density Tavis-Cummings blueshift per particle, (Omega/4) rho.
double tc_energy_small_rho(double rho, double Omega);

/// Mean-field ground energy -Omega N + (U_pol/2) N (N-1) / L.
double bogoliubov_energy(int N, int L, double U_pol, double Omega);

/// Hopping at which the Fermi-sea and Tavis-Cummings blueshifts cross,
/// 3 Omega / (2 pi^3 rho^2).
double crossover_coupling(double rho, double Omega);

/// Energy window of free-fermion particle-hole pairs at momentum transfer q.
struct LindhardBand {
  double q = 0.0;
  double omega_lower = 0.0;
  double omega_upper = 0.0;
};

/// Lattice dispersion 2 J_pol (1 - cos k).
double lattice_dispersion(double k, double J_pol);

/// Extremizes eps(k+q) - eps(k) over a dense grid of the occupied sea
/// |k| <= k_F with |k+q| >= k_F (folded into (-pi, pi]); both Fermi points are
/// included on each side so the band is the closure of the continuum.
LindhardBand lindhard_support(double q, double k_F, double J_pol, int grid_points = 20001);

/// Lower/upper single-particle polariton energies for photon energy
/// omega_ph(q) = 2 J (1 - cos q) coupled to an exciton at omega_x.
std::pair<double, double> polariton_bands(double q, double J, double Omega, double omega_x = 0.0);

}  // namespace polariton::analytic
