#include <algorithm>
#include <cmath>

#include "polariton/error.hpp"
#include "polariton/mps.hpp"

namespace polariton::mps {
namespace {

// Transfer environments for diagonal operators: blocks keyed by bond charge
// (bra and ket charges coincide).
using DiagEnv = std::map<int, Matrix>;

std::vector<double> weights(const LocalSpace& local, auto&& f) {
  std::vector<double> w(local.dim());
  for (int s = 0; s < local.dim(); ++s) w[s] = f(local.photons(s), local.excitons(s));
  return w;
}

std::vector<double> ones(const LocalSpace& local) {
  return std::vector<double>(local.dim(), 1.0);
}

std::vector<double> number_weights(const LocalSpace& local, Species species) {
  return weights(local, [species](int n, int x) { return double(species == Species::photon ? n : x); });
}

DiagEnv step_left(const DiagEnv& env, const MPSState& state, int site, const std::vector<double>& w) {
  DiagEnv out;
  for (int s = 0; s < state.local().dim(); ++s) {
    if (w[s] == 0.0) continue;
    for (const auto& [ql, a] : state.tensor(site, s)) {
      auto it = env.find(ql);
      if (it == env.end()) continue;
      Matrix contrib = w[s] * (a.transpose() * it->second * a);
      auto [pos, inserted] = out.try_emplace(ql + state.charge(s), contrib);
      if (!inserted) pos->second += contrib;
    }
  }
  return out;
}

DiagEnv step_right(const DiagEnv& env, const MPSState& state, int site, const std::vector<double>& w) {
  DiagEnv out;
  for (int s = 0; s < state.local().dim(); ++s) {
    if (w[s] == 0.0) continue;
    for (const auto& [ql, a] : state.tensor(site, s)) {
      auto it = env.find(ql + state.charge(s));
      if (it == env.end()) continue;
      Matrix contrib = w[s] * (a * it->second * a.transpose());
      auto [pos, inserted] = out.try_emplace(ql, contrib);
      if (!inserted) pos->second += contrib;
    }
  }
  return out;
}

double contract(const DiagEnv& left, const DiagEnv& right) {
  double total = 0.0;
  for (const auto& [q, m] : left) {
    auto it = right.find(q);
    if (it != right.end()) total += m.cwiseProduct(it->second).sum();
  }
  return total;
}

struct Environments {
  std::vector<DiagEnv> left;   // left[b]: sites 0..b-1
  std::vector<DiagEnv> right;  // right[b]: sites b..L-1
  double norm2 = 0.0;
};

Environments identity_environments(const MPSState& state) {
  const int L = state.length();
  const auto id = ones(state.local());
  Environments env;
  env.left.resize(L + 1);
  env.right.resize(L + 1);
  env.left[0][0] = Matrix::Identity(1, 1);
  for (int j = 0; j < L; ++j) env.left[j + 1] = step_left(env.left[j], state, j, id);
  env.right[L][state.target_charge()] = Matrix::Identity(1, 1);
  for (int j = L - 1; j >= 0; --j) env.right[j] = step_right(env.right[j + 1], state, j, id);
  env.norm2 = contract(env.left[L], env.right[L]);
  if (env.norm2 <= 0.0) throw Error("MPS has zero norm");
  return env;
}

}  // namespace

std::vector<double> mps_site_densities(const MPSState& state, Species species) {
  const Environments env = identity_environments(state);
  const auto w = number_weights(state.local(), species);
  std::vector<double> density(state.length());
  for (int j = 0; j < state.length(); ++j) {
    density[j] = contract(step_left(env.left[j], state, j, w), env.right[j + 1]) / env.norm2;
  }
  return density;
}

double mps_total_number(const MPSState& state) {
  double total = 0.0;
  for (double n : mps_site_densities(state, Species::photon)) total += n;
  for (double n : mps_site_densities(state, Species::exciton)) total += n;
  return total;
}

double mps_photonic_fraction(const MPSState& state) {
  double photons = 0.0;
  for (double n : mps_site_densities(state, Species::photon)) photons += n;
  const double total = mps_total_number(state);
  return total > 0.0 ? photons / total : 0.0;
}

CorrelationResult mps_measure_g2(const MPSState& state, Species kind, int j0) {
  const int L = state.length();
  if (j0 < 0 || j0 >= L) throw RangeError("reference site outside the chain");
  const Environments env = identity_environments(state);
  const auto id = ones(state.local());
  const auto n = number_weights(state.local(), kind);
  const auto pair = weights(state.local(), [kind](int p, int x) {
    const int c = kind == Species::photon ? p : x;
    return double(c * (c - 1));
  });

  CorrelationResult result;
  result.kind = kind;
  result.reference_site = j0;
  result.density = mps_total_number(state) / L;
  result.values.assign(L, 0.0);

  // On-site term.
  result.values[j0] = contract(step_left(env.left[j0], state, j0, pair), env.right[j0 + 1]);
  // j > j0: carry n_{j0} to the right.
  DiagEnv carry = step_left(env.left[j0], state, j0, n);
  for (int j = j0 + 1; j < L; ++j) {
    result.values[j] = contract(step_left(carry, state, j, n), env.right[j + 1]);
    carry = step_left(carry, state, j, id);
  }
  // j < j0: carry n_{j0} to the left.
  carry = step_right(env.right[j0 + 1], state, j0, n);
  for (int j = j0 - 1; j >= 0; --j) {
    result.values[j] = contract(env.left[j], step_right(carry, state, j, n));
    carry = step_right(carry, state, j, id);
  }
  const double norm = result.density * result.density * env.norm2;
  for (double& v : result.values) v = norm > 0.0 ? std::max(0.0, v / norm) : 0.0;
  return result;
}

std::vector<double> mps_schmidt_spectrum(MPSState& state, int bond) {
  const int L = state.length();
  if (bond < 1 || bond >= L) throw RangeError("bond must lie between 1 and L-1");
  const int site = bond - 1;
  state.move_center(site);
  std::vector<double> spectrum;
  double total = 0.0;
  for (auto [qr, dim_r] : state.bond(bond)) {
    std::vector<const Matrix*> parts;
    Eigen::Index rows = 0;
    for (int s = 0; s < state.local().dim(); ++s) {
      if (const Matrix* m = state.block(site, s, qr - state.charge(s))) {
        parts.push_back(m);
        rows += m->rows();
      }
    }
    if (rows == 0) continue;
    Matrix stacked(rows, dim_r);
    Eigen::Index offset = 0;
    for (const Matrix* m : parts) {
      stacked.middleRows(offset, m->rows()) = *m;
      offset += m->rows();
    }
    Eigen::BDCSVD<Matrix> svd(stacked);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      const double p = svd.singularValues()(i) * svd.singularValues()(i);
      spectrum.push_back(p);
      total += p;
    }
  }
  if (total > 0.0) {
    for (double& p : spectrum) p /= total;
  }
  std::sort(spectrum.rbegin(), spectrum.rend());
  return spectrum;
}

double mps_bond_entropy(MPSState& state, int bond) {
  return entropy_of(mps_schmidt_spectrum(state, bond));
}

ManyBodyState mps_to_vector(const MPSState& state, const FockBasis& basis) {
  const int L = state.length();
  if (basis.sites() != L || basis.species() != 2) throw MismatchError("basis does not match the MPS");
  const LocalSpace& local = state.local();
  ManyBodyState out;
  out.amplitudes = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    auto occ = basis.occupations(i);
    Matrix acc = Matrix::Identity(1, 1);
    int q = 0;
    bool present = true;
    for (int j = 0; j < L && present; ++j) {
      const int n = occ[j];
      const int x = occ[L + j];
      if (n > local.cap_photon || x > local.cap_exciton) {
        present = false;
        break;
      }
      const int s = local.index(n, x);
      const Matrix* a = state.block(j, s, q);
      if (!a) {
        present = false;
        break;
      }
      acc = acc * *a;
      q += state.charge(s);
    }
    if (present) out.amplitudes(static_cast<Eigen::Index>(i)) = acc(0, 0);
  }
  const double n = out.amplitudes.norm();
  if (n > 0.0) out.amplitudes /= n;
  return out;
}

}  // namespace polariton::mps
