#pragma once

// Reference implementations used only by the tests. They share no code with
// the library: states are enumerated by plain recursion and indexed through
// a std::map, and operators act on occupation vectors directly.

#include <cmath>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "polariton/model.hpp"

namespace oracle {

using Occ = std::vector<int>;  // photons 0..L-1 then excitons 0..L-1

struct Space {
  std::vector<Occ> states;
  std::map<Occ, int> index;
};

inline void fill(Space& space, Occ& occ, int mode, int remaining, int L, int cp, int cx) {
  if (mode == static_cast<int>(occ.size())) {
    if (remaining == 0) {
      space.index[occ] = static_cast<int>(space.states.size());
      space.states.push_back(occ);
    }
    return;
  }
  const int cap = mode < L ? cp : cx;
  for (int n = 0; n <= std::min(cap, remaining); ++n) {
    occ[mode] = n;
    fill(space, occ, mode + 1, remaining - n, L, cp, cx);
  }
  occ[mode] = 0;
}

inline Space make_space(int L, int N, int cp, int cx) {
  Space space;
  Occ occ(2 * L, 0);
  fill(space, occ, 0, N, L, cp, cx);
  return space;
}

// Adds amplitude * c_to^+ c_from |occ> into column `col` of H.
inline void hop(const Space& s, Eigen::MatrixXd& H, int col, const Occ& occ, int from, int to,
                double amplitude, int cap_to) {
  if (occ[from] == 0) return;
  Occ next = occ;
  double factor = std::sqrt(double(next[from]));
  next[from] -= 1;
  if (next[to] + 1 > cap_to) return;
  factor *= std::sqrt(double(next[to] + 1));
  next[to] += 1;
  H(s.index.at(next), col) += amplitude * factor;
}

/// Dense ladder Hamiltonian on `space` written straight from the model definition.
inline Eigen::MatrixXd ladder_hamiltonian(const polariton::ModelParams& p, const Space& s, int cp, int cx) {
  const int L = p.L;
  const int dim = static_cast<int>(s.states.size());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  const bool hard = std::isinf(p.U);
  for (int c = 0; c < dim; ++c) {
    const Occ& occ = s.states[c];
    for (int j = 0; j < L; ++j) {
      const int a = occ[j], x = occ[L + j];
      H(c, c) += p.omega_x * x + 2.0 * p.J * a;
      if (!hard) H(c, c) += 0.5 * p.U * x * (x - 1);
      const int bonds = p.boundary == polariton::Boundary::periodic ? L : L - 1;
      if (j < bonds) {
        const int k = (j + 1) % L;
        hop(s, H, c, occ, k, j, -p.J, cp);
        hop(s, H, c, occ, j, k, -p.J, cp);
      }
      hop(s, H, c, occ, L + j, j, -p.Omega, cp);
      hop(s, H, c, occ, j, L + j, -p.Omega, cx);
    }
  }
  return H;
}

/// Lowest eigenpair by dense diagonalization.
inline std::pair<double, Eigen::VectorXd> lowest(const Eigen::MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

/// Sum of the N lowest single-particle levels of a tight-binding chain with
/// on-site 2t and hopping -t (free fermions).
inline double free_fermion_energy(int N, int L, double t, bool periodic) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(L, L);
  for (int j = 0; j < L; ++j) {
    h(j, j) = 2.0 * t;
    if (j + 1 < L || periodic) {
      const int k = (j + 1) % L;
      h(j, k) -= t;
      h(k, j) -= t;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  double e = 0.0;
  for (int m = 0; m < N; ++m) e += es.eigenvalues()(m);
  return e;
}

}  // namespace oracle
