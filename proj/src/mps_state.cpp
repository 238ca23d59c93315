#include <algorithm>
#include <cmath>
#include <random>

#include "polariton/error.hpp"
#include "polariton/mps.hpp"

namespace polariton::mps {
namespace {

// Singular values below this (relative to the largest) are dropped when
// moving the center; such directions carry no weight.
constexpr double kRankTolerance = 1e-14;

int numerical_rank(const Eigen::VectorXd& singular_values) {
  if (singular_values.size() == 0) return 0;
  const double largest = singular_values(0);
  int r = 0;
  while (r < singular_values.size() && singular_values(r) > kRankTolerance * std::max(largest, 1e-300)) ++r;
  return r;
}

}  // namespace

MPSState::MPSState(int length, LocalSpace local, int target_charge, std::vector<int> local_charges)
    : length_(length),
      local_(local),
      target_charge_(target_charge),
      local_charges_(std::move(local_charges)),
      bonds_(length + 1),
      tensors_(length, std::vector<std::map<int, Matrix>>(local.dim())) {
  if (length < 1) throw RangeError("MPS needs at least one site");
  if (static_cast<int>(local_charges_.size()) != local.dim()) {
    throw MismatchError("one charge per local state required");
  }
}

int MPSState::bond_dim(int b, int q) const {
  auto it = bonds_[b].find(q);
  return it == bonds_[b].end() ? 0 : it->second;
}

int MPSState::bond_dim(int b) const {
  int total = 0;
  for (auto [q, d] : bonds_[b]) total += d;
  return total;
}

std::vector<int> MPSState::bond_dims() const {
  std::vector<int> dims;
  for (int b = 1; b < length_; ++b) dims.push_back(bond_dim(b));
  return dims;
}

const Matrix* MPSState::block(int site, int s, int q_left) const {
  const auto& blocks = tensors_[site][s];
  auto it = blocks.find(q_left);
  return it == blocks.end() ? nullptr : &it->second;
}

void MPSState::left_normalize_site(int site) {
  const int d = local_.dim();
  const BondSectors right = bonds_[site + 1];
  BondSectors new_right;
  for (auto [qr, dim_r] : right) {
    // Stack all blocks ending in right charge qr.
    std::vector<std::pair<int, int>> rows;  // (s, ql)
    int total_rows = 0;
    for (int s = 0; s < d; ++s) {
      const int ql = qr - local_charges_[s];
      if (const Matrix* m = block(site, s, ql)) {
        rows.emplace_back(s, ql);
        total_rows += static_cast<int>(m->rows());
      }
    }
    if (total_rows == 0) {
      for (int s = 0; s < d; ++s) tensors_[site + 1][s].erase(qr);
      continue;
    }
    Matrix stacked(total_rows, dim_r);
    int offset = 0;
    for (auto [s, ql] : rows) {
      const Matrix& m = *block(site, s, ql);
      stacked.middleRows(offset, m.rows()) = m;
      offset += static_cast<int>(m.rows());
    }
    Eigen::BDCSVD<Matrix> svd(stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const int r = numerical_rank(svd.singularValues());
    if (r == 0) {
      for (auto [s, ql] : rows) tensors_[site][s].erase(ql);
      for (int s = 0; s < d; ++s) tensors_[site + 1][s].erase(qr);
      continue;
    }
    offset = 0;
    for (auto [s, ql] : rows) {
      Matrix& m = tensors_[site][s][ql];
      const auto n = m.rows();
      m = svd.matrixU().block(offset, 0, n, r);
      offset += static_cast<int>(n);
    }
    const Matrix carry = svd.singularValues().head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
    for (int s = 0; s < d; ++s) {
      auto it = tensors_[site + 1][s].find(qr);
      if (it != tensors_[site + 1][s].end()) it->second = carry * it->second;
    }
    new_right[qr] = r;
  }
  bonds_[site + 1] = std::move(new_right);
}

void MPSState::right_normalize_site(int site) {
  const int d = local_.dim();
  const BondSectors left = bonds_[site];
  BondSectors new_left;
  for (auto [ql, dim_l] : left) {
    std::vector<int> cols_s;
    int total_cols = 0;
    for (int s = 0; s < d; ++s) {
      if (const Matrix* m = block(site, s, ql)) {
        cols_s.push_back(s);
        total_cols += static_cast<int>(m->cols());
      }
    }
    if (total_cols == 0) {
      if (site > 0) {
        for (int s = 0; s < d; ++s) tensors_[site - 1][s].erase(ql - local_charges_[s]);
      }
      continue;
    }
    Matrix wide(dim_l, total_cols);
    int offset = 0;
    for (int s : cols_s) {
      const Matrix& m = *block(site, s, ql);
      wide.middleCols(offset, m.cols()) = m;
      offset += static_cast<int>(m.cols());
    }
    Eigen::BDCSVD<Matrix> svd(wide, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const int r = numerical_rank(svd.singularValues());
    if (r == 0) {
      for (int s : cols_s) tensors_[site][s].erase(ql);
      if (site > 0) {
        for (int s = 0; s < d; ++s) tensors_[site - 1][s].erase(ql - local_charges_[s]);
      }
      continue;
    }
    const Matrix vt = svd.matrixV().leftCols(r).transpose();
    offset = 0;
    for (int s : cols_s) {
      Matrix& m = tensors_[site][s][ql];
      const auto n = m.cols();
      m = vt.middleCols(offset, n);
      offset += static_cast<int>(n);
    }
    const Matrix carry = svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal();
    if (site > 0) {
      for (int s = 0; s < d; ++s) {
        auto it = tensors_[site - 1][s].find(ql - local_charges_[s]);
        if (it != tensors_[site - 1][s].end()) it->second = it->second * carry;
      }
      new_left[ql] = r;
    } else {
      // Left edge: the carry is the 1x1 norm factor, absorb it back.
      for (int s : cols_s) tensors_[site][s][ql] = carry * tensors_[site][s][ql];
      new_left[ql] = dim_l;
    }
  }
  bonds_[site] = std::move(new_left);
}

void MPSState::move_center(int site) {
  if (site < 0 || site >= length_) throw RangeError("center outside the chain");
  while (center_ < site) {
    left_normalize_site(center_);
    ++center_;
  }
  while (center_ > site) {
    right_normalize_site(center_);
    --center_;
  }
}

void MPSState::right_canonicalize() {
  for (int j = length_ - 1; j >= 1; --j) right_normalize_site(j);
  center_ = 0;
  const double n = norm();
  if (n <= 0.0) throw Error("MPS has zero norm");
  for (auto& blocks : tensors_[0]) {
    for (auto& [q, m] : blocks) m /= n;
  }
}

double MPSState::norm() const {
  std::map<int, Matrix> env;
  env[0] = Matrix::Identity(1, 1);
  for (int j = 0; j < length_; ++j) {
    std::map<int, Matrix> next;
    for (int s = 0; s < local_.dim(); ++s) {
      for (const auto& [ql, a] : tensors_[j][s]) {
        auto it = env.find(ql);
        if (it == env.end()) continue;
        const int qr = ql + local_charges_[s];
        Matrix contrib = a.transpose() * it->second * a;
        auto [pos, inserted] = next.try_emplace(qr, contrib);
        if (!inserted) pos->second += contrib;
      }
    }
    env = std::move(next);
  }
  double total = 0.0;
  for (const auto& [q, m] : env) total += m.trace();
  return std::sqrt(std::max(0.0, total));
}

MPSState MPSState::random(int length, LocalSpace local, int target_charge,
                          std::vector<int> local_charges, int sector_dim, std::uint64_t seed) {
  MPSState state(length, local, target_charge, std::move(local_charges));
  const auto [min_it, max_it] =
      std::minmax_element(state.local_charges_.begin(), state.local_charges_.end());
  const int cmin = *min_it;
  const int cmax = *max_it;
  for (int b = 0; b <= length; ++b) {
    const int lo = std::max(cmin * b, target_charge - cmax * (length - b));
    const int hi = std::min(cmax * b, target_charge - cmin * (length - b));
    for (int q = lo; q <= hi; ++q) {
      state.bonds_[b][q] = (b == 0 || b == length) ? 1 : sector_dim;
    }
  }
  if (state.bonds_[length].empty() || state.bonds_[0].empty()) {
    throw CapacityError("no MPS with the requested charge fits the local space");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int j = 0; j < length; ++j) {
    for (int s = 0; s < local.dim(); ++s) {
      for (auto [ql, dl] : state.bonds_[j]) {
        const int qr = ql + state.local_charges_[s];
        auto it = state.bonds_[j + 1].find(qr);
        if (it == state.bonds_[j + 1].end()) continue;
        Matrix m(dl, it->second);
        for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal(rng);
        state.tensors_[j][s][ql] = std::move(m);
      }
    }
  }
  state.right_canonicalize();
  return state;
}

}  // namespace polariton::mps
