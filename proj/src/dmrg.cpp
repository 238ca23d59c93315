#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "mps_env.hpp"
#include "polariton/error.hpp"
#include "polariton/lanczos.hpp"

namespace polariton::mps {
namespace {

using detail::Env;

struct ThetaBlock {
  int s1, s2, ql, qr;
  int rows, cols;
  Eigen::Index offset;
};

// Two-site wave function layout for sites (j, j+1) with fixed outer bonds.
struct ThetaLayout {
  std::vector<ThetaBlock> blocks;
  std::map<std::tuple<int, int, int>, int> index;  // (s1, s2, ql) -> block
  Eigen::Index size = 0;
};

ThetaLayout make_layout(const MPSState& state, int j) {
  ThetaLayout layout;
  const int d = state.local().dim();
  for (auto [ql, dl] : state.bond(j)) {
    for (int s1 = 0; s1 < d; ++s1) {
      for (int s2 = 0; s2 < d; ++s2) {
        const int qr = ql + state.charge(s1) + state.charge(s2);
        const int dr = state.bond_dim(j + 2, qr);
        if (dr == 0) continue;
        layout.index[{s1, s2, ql}] = static_cast<int>(layout.blocks.size());
        layout.blocks.push_back({s1, s2, ql, qr, dl, dr, layout.size});
        layout.size += static_cast<Eigen::Index>(dl) * dr;
      }
    }
  }
  return layout;
}

Eigen::VectorXd initial_theta(const MPSState& state, int j, const ThetaLayout& layout) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(layout.size);
  for (const auto& b : layout.blocks) {
    const Matrix* a = state.block(j, b.s1, b.ql);
    const Matrix* c = state.block(j + 1, b.s2, b.ql + state.charge(b.s1));
    if (!a || !c) continue;
    Eigen::Map<Matrix>(theta.data() + b.offset, b.rows, b.cols) = *a * *c;
  }
  return theta;
}

// Effective two-site Hamiltonian, contracted as L * theta, local operator, * R^T.
class TwoSiteOperator {
 public:
  TwoSiteOperator(const Env& left, const Env& right, const MPO& mpo, int j,
                  const ThetaLayout& layout)
      : layout_(layout), width_(mpo.width) {
    const int nb = static_cast<int>(layout.blocks.size());
    left_.assign(width_ * nb, nullptr);
    right_.assign(width_ * nb, nullptr);
    left_identity_.assign(width_, false);
    right_identity_.assign(width_, false);
    left_bra_.assign(width_ * nb, 0);

    for (int a = 0; a < width_; ++a) {
      bool identity = !left[a].empty();
      for (const auto& [key, m] : left[a]) {
        if (key.first != key.second || !m.isIdentity(1e-13)) identity = false;
      }
      left_identity_[a] = identity;
      for (int b = 0; b < nb; ++b) {
        for (const auto& [key, m] : left[a]) {
          if (key.second == layout.blocks[b].ql) {
            left_[a * nb + b] = &m;
            left_bra_[a * nb + b] = key.first;
          }
        }
      }
    }
    for (int c = 0; c < width_; ++c) {
      bool identity = !right[c].empty();
      for (const auto& [key, m] : right[c]) {
        if (key.first != key.second || !m.isIdentity(1e-13)) identity = false;
      }
      right_identity_[c] = identity;
    }

    // Merge the two sites' MPO terms into (a, c) pair operators, then expand
    // them over theta blocks.
    for (const auto& t1 : mpo.sites[j]) {
      if (left[t1.left].empty()) continue;
      for (const auto& t2 : mpo.sites[j + 1]) {
        if (t2.left != t1.right || right[t2.right].empty()) continue;
        for (const auto& e1 : t1.op.entries) {
          for (const auto& e2 : t2.op.entries) {
            const double v = e1.value * e2.value;
            // Ket blocks with physical indices (e1.ket, e2.ket).
            for (int kb = 0; kb < nb; ++kb) {
              const auto& k = layout.blocks[kb];
              if (k.s1 != e1.ket || k.s2 != e2.ket) continue;
              if (!left_[t1.left * nb + kb]) continue;
              const int qlb = left_bra_[t1.left * nb + kb];
              auto it = layout.index.find({e1.bra, e2.bra, qlb});
              if (it == layout.index.end()) continue;
              const int bb = it->second;
              // The right environment must connect bra and ket right charges.
              const auto rit = right[t2.right].find({layout.blocks[bb].qr, k.qr});
              if (rit == right[t2.right].end()) continue;
              right_[t2.right * nb + bb] = &rit->second;
              ops_.push_back({t1.left, t2.right, v, kb, bb});
            }
          }
        }
      }
    }
    std::sort(ops_.begin(), ops_.end(), [](const Op& x, const Op& y) {
      return std::tie(x.a, x.kb, x.c, x.bb) < std::tie(y.a, y.kb, y.c, y.bb);
    });
    // Merge duplicates.
    std::vector<Op> merged;
    for (const auto& op : ops_) {
      if (!merged.empty() && merged.back().a == op.a && merged.back().kb == op.kb &&
          merged.back().c == op.c && merged.back().bb == op.bb) {
        merged.back().v += op.v;
      } else {
        merged.push_back(op);
      }
    }
    ops_ = std::move(merged);
    x_.resize(width_ * nb);
    y_.resize(width_ * nb);
  }

  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    const int nb = static_cast<int>(layout_.blocks.size());
    out.setZero(in.size());
    for (auto& m : y_) m.resize(0, 0);
    int last_a = -1, last_kb = -1;
    const Matrix* x_current = nullptr;
    for (const auto& op : ops_) {
      const auto& kb = layout_.blocks[op.kb];
      const auto& bb = layout_.blocks[op.bb];
      if (op.a != last_a || op.kb != last_kb) {
        last_a = op.a;
        last_kb = op.kb;
        Eigen::Map<const Matrix> xin(in.data() + kb.offset, kb.rows, kb.cols);
        Matrix& x = x_[op.a * nb + op.kb];
        if (left_identity_[op.a]) {
          x = xin;
        } else {
          x.noalias() = *left_[op.a * nb + op.kb] * xin;
        }
        x_current = &x;
      }
      Matrix& y = y_[op.c * nb + op.bb];
      if (y.size() == 0) {
        y = Matrix::Zero(bb.rows, kb.cols);
      }
      if (y.cols() != kb.cols) {
        throw Error("inconsistent ket dimension in effective Hamiltonian");
      }
      y += op.v * *x_current;
    }
    for (int c = 0; c < width_; ++c) {
      for (int b = 0; b < nb; ++b) {
        const Matrix& y = y_[c * nb + b];
        if (y.size() == 0) continue;
        const auto& bb = layout_.blocks[b];
        Eigen::Map<Matrix> yout(out.data() + bb.offset, bb.rows, bb.cols);
        if (right_identity_[c]) {
          yout += y;
        } else {
          yout.noalias() += y * right_[c * nb + b]->transpose();
        }
      }
    }
  }

 private:
  struct Op {
    int a, c;
    double v;
    int kb, bb;
  };
  const ThetaLayout& layout_;
  int width_;
  std::vector<const Matrix*> left_, right_;
  std::vector<int> left_bra_;
  std::vector<bool> left_identity_, right_identity_;
  std::vector<Op> ops_;
  std::vector<Matrix> x_, y_;
};

struct SplitResult {
  double discarded = 0.0;
};

// SVD of theta grouped by the middle charge; writes truncated tensors back.
SplitResult split_theta(MPSState& state, int j, const ThetaLayout& layout,
                        const Eigen::VectorXd& theta, const DmrgOptions& options, bool move_right) {
  const int d = state.local().dim();
  struct Sector {
    std::vector<std::pair<int, int>> rows;  // (s1, ql)
    std::vector<std::pair<int, int>> cols;  // (s2, qr)
    std::map<std::pair<int, int>, int> row_offset, col_offset;
    int n_rows = 0, n_cols = 0;
    Matrix m;
    Eigen::VectorXd s;
    Matrix u, vt;
    int kept = 0;
  };
  std::map<int, Sector> sectors;
  for (const auto& b : layout.blocks) {
    Sector& sec = sectors[b.ql + state.charge(b.s1)];
    if (sec.row_offset.try_emplace({b.s1, b.ql}, sec.n_rows).second) sec.n_rows += b.rows;
    if (sec.col_offset.try_emplace({b.s2, b.qr}, sec.n_cols).second) sec.n_cols += b.cols;
  }
  for (auto& [qm, sec] : sectors) sec.m = Matrix::Zero(sec.n_rows, sec.n_cols);
  for (const auto& b : layout.blocks) {
    Sector& sec = sectors[b.ql + state.charge(b.s1)];
    sec.m.block(sec.row_offset[{b.s1, b.ql}], sec.col_offset[{b.s2, b.qr}], b.rows, b.cols) =
        Eigen::Map<const Matrix>(theta.data() + b.offset, b.rows, b.cols);
  }

  std::vector<std::pair<double, int>> values;  // (singular value, middle charge)
  double total = 0.0;
  for (auto& [qm, sec] : sectors) {
    Eigen::BDCSVD<Matrix> svd(sec.m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    sec.s = svd.singularValues();
    sec.u = svd.matrixU();
    sec.vt = svd.matrixV().transpose();
    for (Eigen::Index i = 0; i < sec.s.size(); ++i) {
      values.emplace_back(sec.s(i), qm);
      total += sec.s(i) * sec.s(i);
    }
  }
  std::sort(values.begin(), values.end(), [](auto& x, auto& y) { return x.first > y.first; });

  // Smallest k whose discarded tail is below the cutoff, capped by chi_max.
  std::vector<double> tail(values.size() + 1, 0.0);
  for (std::size_t i = values.size(); i-- > 0;) tail[i] = tail[i + 1] + values[i].first * values[i].first;
  std::size_t keep = values.size();
  for (std::size_t k = 1; k <= values.size(); ++k) {
    if (tail[k] <= options.truncation_cutoff * total) {
      keep = k;
      break;
    }
  }
  keep = std::min<std::size_t>(keep, static_cast<std::size_t>(options.chi_max));
  // Drop exact zeros that would only add null directions.
  while (keep > 1 && values[keep - 1].first <= 1e-15 * values[0].first) --keep;
  keep = std::max<std::size_t>(keep, 1);
  for (std::size_t i = 0; i < keep; ++i) ++sectors[values[i].second].kept;
  const double kept_weight = total - tail[keep];
  const double scale = 1.0 / std::sqrt(kept_weight);

  for (int s = 0; s < d; ++s) {
    state.tensor(j, s).clear();
    state.tensor(j + 1, s).clear();
  }
  BondSectors middle;
  for (auto& [qm, sec] : sectors) {
    const int r = sec.kept;
    if (r == 0) continue;
    middle[qm] = r;
    Matrix u = sec.u.leftCols(r);
    Matrix vt = sec.vt.topRows(r);
    const Eigen::VectorXd sv = sec.s.head(r) * scale;
    if (move_right) {
      vt = sv.asDiagonal() * vt;
    } else {
      u = u * sv.asDiagonal();
    }
    for (const auto& [key, off] : sec.row_offset) {
      const auto [s1, ql] = key;
      state.tensor(j, s1)[ql] = u.middleRows(off, state.bond_dim(j, ql));
    }
    for (const auto& [key, off] : sec.col_offset) {
      const auto [s2, qr] = key;
      state.tensor(j + 1, s2)[qm] = vt.middleCols(off, state.bond_dim(j + 2, qr));
    }
  }
  state.bond(j + 1) = std::move(middle);
  return {total > 0.0 ? tail[keep] / total : 0.0};
}

}  // namespace

LocalSpace local_space_for(const ModelParams& params, int max_local_dim) {
  LocalSpace local;
  local.cap_photon = std::max(1, params.resolved_cap_photon());
  local.cap_exciton = std::max(1, params.resolved_cap_exciton());
  if (local.dim() > max_local_dim) {
    throw CapacityError("local rung dimension " + std::to_string(local.dim()) + " exceeds " +
                        std::to_string(max_local_dim));
  }
  return local;
}

DmrgResult dmrg_ground_state(const ModelParams& params, const DmrgOptions& options) {
  params.validate();
  if (params.boundary != Boundary::open) throw RangeError("DMRG supports open chains only");
  const int L = params.L;
  const LocalSpace local = local_space_for(params, options.max_local_dim);
  std::vector<int> charges(local.dim(), 0);
  if (!options.number_penalty) {
    for (int s = 0; s < local.dim(); ++s) charges[s] = local.photons(s) + local.excitons(s);
  }
  const int target = options.number_penalty ? 0 : params.N;
  const MPO mpo = ladder_mpo(params, local, options.number_penalty ? options.penalty : 0.0);

  DmrgResult result;
  if (options.initial_state) {
    result.state = *options.initial_state;
    if (result.state.length() != L || result.state.local().dim() != local.dim() ||
        result.state.target_charge() != target || result.state.local_charges() != charges) {
      throw MismatchError("initial MPS does not match the model");
    }
    result.state.right_canonicalize();
  } else {
    result.state = MPSState::random(L, local, target, charges,
                                    std::max(1, options.initial_sector_dim), options.seed);
  }
  MPSState& state = result.state;

  if (L == 1) {
    // Single rung: diagonalize the on-site block directly.
    const Matrix h = mpo_to_dense(mpo, local.dim());
    std::vector<int> idx;
    for (int s = 0; s < local.dim(); ++s) {
      if (charges[s] == target) idx.push_back(s);
    }
    if (idx.empty()) throw CapacityError("no local state with the requested charge");
    Matrix sub(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = 0; b < idx.size(); ++b) sub(a, b) = h(idx[a], idx[b]);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sub);
    for (int s = 0; s < local.dim(); ++s) state.tensor(0, s).clear();
    for (std::size_t a = 0; a < idx.size(); ++a) {
      state.tensor(0, idx[a])[0] = Matrix::Constant(1, 1, solver.eigenvectors()(a, 0));
    }
    result.energy = solver.eigenvalues()(0);
    result.sweeps.push_back({1, result.energy, 0.0, 0.0, 1});
    result.converged = true;
    return result;
  }

  std::vector<Env> left(L + 1), right(L + 1);
  left[0] = detail::left_boundary(mpo);
  right[L] = detail::right_boundary(mpo, target);
  for (int j = L - 1; j >= 2; --j) right[j] = detail::extend_right(right[j + 1], state, j, mpo);

  double previous = std::numeric_limits<double>::infinity();
  double energy = 0.0;
  auto optimize = [&](int j, bool move_right, SweepReport& report) {
    const ThetaLayout layout = make_layout(state, j);
    if (layout.size == 0) throw Error("empty two-site space in DMRG");
    TwoSiteOperator heff(left[j], right[j + 2], mpo, j, layout);
    LanczosOptions lo;
    lo.tol = options.lanczos_tol;
    lo.max_iter = options.lanczos_iter;
    lo.krylov_dim = static_cast<int>(std::min<Eigen::Index>(options.lanczos_iter, layout.size));
    lo.keep = 4;
    lo.seed = options.seed + static_cast<std::uint64_t>(j);
    lo.initial = initial_theta(state, j, layout);
    if (lo.initial.norm() < 1e-12) lo.initial.resize(0);
    const LanczosResult ground = lanczos_lowest(
        [&heff](const Eigen::VectorXd& x, Eigen::VectorXd& y) { heff.apply(x, y); }, layout.size, lo);
    energy = ground.value;
    const SplitResult split = split_theta(state, j, layout, ground.vector, options, move_right);
    report.max_discarded = std::max(report.max_discarded, split.discarded);
    report.total_discarded += split.discarded;
    report.max_bond = std::max(report.max_bond, state.bond_dim(j + 1));
  };

  for (int sweep = 1; sweep <= options.n_sweeps; ++sweep) {
    SweepReport report;
    report.sweep = sweep;
    for (int j = 0; j + 1 < L; ++j) {
      optimize(j, true, report);
      left[j + 1] = detail::extend_left(left[j], state, j, mpo);
    }
    for (int j = L - 2; j >= 0; --j) {
      optimize(j, false, report);
      right[j + 1] = detail::extend_right(right[j + 2], state, j + 1, mpo);
    }
    state.set_center(0);
    report.energy = energy;
    result.sweeps.push_back(report);
    result.energy = energy;
    if (sweep >= options.min_sweeps && std::abs(previous - energy) < options.energy_tol) {
      result.converged = true;
      break;
    }
    previous = energy;
  }
  return result;
}

}  // namespace polariton::mps
