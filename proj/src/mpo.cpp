#include <cmath>

#include "mps_env.hpp"
#include "polariton/error.hpp"

namespace polariton::mps {
namespace {

LocalOperator identity_op(const LocalSpace& local) {
  LocalOperator op;
  for (int s = 0; s < local.dim(); ++s) op.entries.push_back({s, s, 1.0});
  return op;
}

LocalOperator diagonal_op(const LocalSpace& local, auto&& f) {
  LocalOperator op;
  for (int s = 0; s < local.dim(); ++s) {
    const double v = f(local.photons(s), local.excitons(s));
    if (v != 0.0) op.entries.push_back({s, s, v});
  }
  return op;
}

// Photon creation (dagger) or annihilation, scaled.
LocalOperator photon_op(const LocalSpace& local, bool dagger, double scale, int shift) {
  LocalOperator op;
  op.shift = shift;
  for (int s = 0; s < local.dim(); ++s) {
    const int n = local.photons(s);
    const int x = local.excitons(s);
    if (dagger && n < local.cap_photon) {
      op.entries.push_back({local.index(n + 1, x), s, scale * std::sqrt(n + 1.0)});
    } else if (!dagger && n > 0) {
      op.entries.push_back({local.index(n - 1, x), s, scale * std::sqrt(static_cast<double>(n))});
    }
  }
  return op;
}

LocalOperator scaled(LocalOperator op, double factor) {
  for (auto& e : op.entries) e.value *= factor;
  return op;
}

Matrix dense_op(const LocalOperator& op, int d) {
  Matrix m = Matrix::Zero(d, d);
  for (const auto& e : op.entries) m(e.bra, e.ket) += e.value;
  return m;
}

}  // namespace

MPO ladder_mpo(const ModelParams& params, const LocalSpace& local, double penalty) {
  params.validate();
  const int L = params.L;
  const bool use_penalty = penalty > 0.0;
  const bool periodic = params.boundary == Boundary::periodic;
  const int charge_step = use_penalty ? 0 : 1;

  // MPO states: 0 start, 1 a^+ placed, 2 a placed, then optional number
  // string, optional periodic carries, and "done" last.
  int next = 3;
  const int s_number = use_penalty ? next++ : -1;
  const int s_wrap_create = periodic ? next++ : -1;
  const int s_wrap_destroy = periodic ? next++ : -1;
  const int done = next++;

  MPO mpo;
  mpo.width = next;
  mpo.state_shift.assign(next, 0);
  mpo.state_shift[1] = charge_step;
  mpo.state_shift[2] = -charge_step;
  if (periodic) {
    mpo.state_shift[s_wrap_create] = charge_step;
    mpo.state_shift[s_wrap_destroy] = -charge_step;
  }

  const double J = params.J;
  const double N0 = params.N;
  const bool hard_core = params.hard_core();
  LocalOperator onsite;
  {
    // x^+ a + a^+ x and the diagonal part.
    for (int s = 0; s < local.dim(); ++s) {
      const int n = local.photons(s);
      const int x = local.excitons(s);
      double diag = params.omega_x * x + 2.0 * J * n;
      if (!hard_core) diag += 0.5 * params.U * x * (x - 1);
      if (use_penalty) {
        const double tot = n + x;
        diag += penalty * (tot * tot - 2.0 * N0 * tot) + penalty * N0 * N0 / L;
      }
      if (diag != 0.0) onsite.entries.push_back({s, s, diag});
      if (n > 0 && x < local.cap_exciton) {
        onsite.entries.push_back(
            {local.index(n - 1, x + 1), s, -params.Omega * std::sqrt(static_cast<double>(n) * (x + 1))});
      }
      if (x > 0 && n < local.cap_photon) {
        onsite.entries.push_back(
            {local.index(n + 1, x - 1), s, -params.Omega * std::sqrt(static_cast<double>(x) * (n + 1))});
      }
    }
  }
  const LocalOperator id = identity_op(local);
  const LocalOperator number = diagonal_op(local, [](int n, int x) { return double(n + x); });

  mpo.sites.resize(L);
  for (int j = 0; j < L; ++j) {
    auto& terms = mpo.sites[j];
    terms.push_back({0, 0, id});
    terms.push_back({done, done, id});
    terms.push_back({0, done, onsite});
    if (j + 1 < L && J != 0.0) {
      terms.push_back({0, 1, photon_op(local, true, 1.0, charge_step)});
      terms.push_back({0, 2, photon_op(local, false, 1.0, -charge_step)});
    }
    if (j > 0 && J != 0.0) {
      terms.push_back({1, done, photon_op(local, false, -J, -charge_step)});
      terms.push_back({2, done, photon_op(local, true, -J, charge_step)});
    }
    if (use_penalty) {
      if (j + 1 < L) terms.push_back({0, s_number, number});
      if (j > 0 && j + 1 < L) terms.push_back({s_number, s_number, id});
      if (j > 0) terms.push_back({s_number, done, scaled(number, 2.0 * penalty)});
    }
    if (periodic && J != 0.0) {
      if (j == 0) {
        terms.push_back({0, s_wrap_create, photon_op(local, true, 1.0, charge_step)});
        terms.push_back({0, s_wrap_destroy, photon_op(local, false, 1.0, -charge_step)});
      } else if (j + 1 < L) {
        terms.push_back({s_wrap_create, s_wrap_create, id});
        terms.push_back({s_wrap_destroy, s_wrap_destroy, id});
      } else {
        terms.push_back({s_wrap_create, done, photon_op(local, false, -J, -charge_step)});
        terms.push_back({s_wrap_destroy, done, photon_op(local, true, -J, charge_step)});
      }
    }
  }
  return mpo;
}

Matrix mpo_to_dense(const MPO& mpo, int local_dim) {
  std::vector<Matrix> acc(mpo.width);
  acc[0] = Matrix::Identity(1, 1);
  for (const auto& terms : mpo.sites) {
    std::vector<Matrix> next(mpo.width);
    for (const auto& t : terms) {
      if (acc[t.left].size() == 0) continue;
      const Matrix op = dense_op(t.op, local_dim);
      const Matrix& prev = acc[t.left];
      Matrix k(prev.rows() * local_dim, prev.cols() * local_dim);
      for (Eigen::Index r = 0; r < prev.rows(); ++r) {
        for (Eigen::Index c = 0; c < prev.cols(); ++c) {
          k.block(r * local_dim, c * local_dim, local_dim, local_dim) = prev(r, c) * op;
        }
      }
      if (next[t.right].size() == 0) {
        next[t.right] = std::move(k);
      } else {
        next[t.right] += k;
      }
    }
    acc = std::move(next);
  }
  if (acc[mpo.width - 1].size() == 0) throw Error("MPO has no complete operator string");
  return acc[mpo.width - 1];
}

double mpo_expectation(const MPSState& state, const MPO& mpo) {
  if (static_cast<int>(mpo.sites.size()) != state.length()) {
    throw MismatchError("MPO and MPS lengths differ");
  }
  detail::Env env = detail::left_boundary(mpo);
  for (int j = 0; j < state.length(); ++j) env = detail::extend_left(env, state, j, mpo);
  const auto& last = env[mpo.width - 1];
  auto it = last.find({state.target_charge(), state.target_charge()});
  const double value = it == last.end() ? 0.0 : it->second(0, 0);
  const double n = state.norm();
  return value / (n * n);
}

namespace detail {

Env left_boundary(const MPO& mpo) {
  Env env(mpo.width);
  env[0][{0, 0}] = Matrix::Identity(1, 1);
  return env;
}

Env right_boundary(const MPO& mpo, int target_charge) {
  Env env(mpo.width);
  env[mpo.width - 1][{target_charge, target_charge}] = Matrix::Identity(1, 1);
  return env;
}

Env extend_left(const Env& env, const MPSState& state, int site, const MPO& mpo) {
  const int d = state.local().dim();
  Env out(mpo.width);
  // Terms grouped by left MPO state.
  std::vector<std::vector<const MPO::Term*>> by_left(mpo.width);
  for (const auto& t : mpo.sites[site]) by_left[t.left].push_back(&t);

  for (int a = 0; a < mpo.width; ++a) {
    if (env[a].empty() || by_left[a].empty()) continue;
    for (const auto& [key, X] : env[a]) {
      const auto [qb, qk] = key;
      for (int t = 0; t < d; ++t) {
        const Matrix* ket = state.block(site, t, qk);
        if (!ket) continue;
        const Matrix XA = X * *ket;
        const int qk_out = qk + state.charge(t);
        for (const auto* term : by_left[a]) {
          for (const auto& e : term->op.entries) {
            if (e.ket != t) continue;
            const Matrix* bra = state.block(site, e.bra, qb);
            if (!bra) continue;
            const std::pair<int, int> out_key{qb + state.charge(e.bra), qk_out};
            Matrix contrib = e.value * (bra->transpose() * XA);
            auto [it, inserted] = out[term->right].try_emplace(out_key, contrib);
            if (!inserted) it->second += contrib;
          }
        }
      }
    }
  }
  return out;
}

Env extend_right(const Env& env, const MPSState& state, int site, const MPO& mpo) {
  const int d = state.local().dim();
  Env out(mpo.width);
  std::vector<std::vector<const MPO::Term*>> by_right(mpo.width);
  for (const auto& t : mpo.sites[site]) by_right[t.right].push_back(&t);

  for (int c = 0; c < mpo.width; ++c) {
    if (env[c].empty() || by_right[c].empty()) continue;
    for (const auto& [key, Y] : env[c]) {
      const auto [qb, qk] = key;
      for (int t = 0; t < d; ++t) {
        const int qk_in = qk - state.charge(t);
        const Matrix* ket = state.block(site, t, qk_in);
        if (!ket) continue;
        const Matrix AY = *ket * Y.transpose();  // (D_k_left, D_b_right)
        for (const auto* term : by_right[c]) {
          for (const auto& e : term->op.entries) {
            if (e.ket != t) continue;
            const int qb_in = qb - state.charge(e.bra);
            const Matrix* bra = state.block(site, e.bra, qb_in);
            if (!bra) continue;
            const std::pair<int, int> out_key{qb_in, qk_in};
            Matrix contrib = e.value * (*bra * AY.transpose());
            auto [it, inserted] = out[term->left].try_emplace(out_key, contrib);
            if (!inserted) it->second += contrib;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace detail
}  // namespace polariton::mps
