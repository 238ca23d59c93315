#include "polariton/sparse_operator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polariton {

SparseOperator::SparseOperator(std::size_t dimension) : dimension_(dimension) {
  row_offsets_.reserve(dimension + 1);
}

void SparseOperator::push_row(std::vector<std::pair<std::uint32_t, double>>& entries) {
  if (row_offsets_.size() > dimension_) throw std::logic_error("too many rows pushed");
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < entries.size();) {
    std::uint32_t col = entries[i].first;
    double sum = 0.0;
    for (; i < entries.size() && entries[i].first == col; ++i) sum += entries[i].second;
    if (sum != 0.0) {
      columns_.push_back(col);
      values_.push_back(sum);
    }
  }
  row_offsets_.push_back(values_.size());
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t r = 0; r < dimension_; ++r) {
    double acc = 0.0;
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      acc += values_[k] * x[columns_[k]];
    }
    y[r] = acc;
  }
}

void SparseOperator::apply(std::span<const std::complex<double>> x,
                           std::span<std::complex<double>> y) const {
  for (std::size_t r = 0; r < dimension_; ++r) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      acc += values_[k] * x[columns_[k]];
    }
    y[r] = acc;
  }
}

Eigen::VectorXd SparseOperator::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(dimension_));
  apply(std::span<const double>(x.data(), dimension_), std::span<double>(y.data(), dimension_));
  return y;
}

double SparseOperator::element(std::size_t row, std::size_t col) const {
  const auto begin = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[row]);
  const auto end = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[row + 1]);
  auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(col));
  if (it == end || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - columns_.begin())];
}

double SparseOperator::trace() const {
  double t = 0.0;
  for (std::size_t r = 0; r < dimension_; ++r) t += element(r, r);
  return t;
}

Eigen::MatrixXd SparseOperator::to_dense() const {
  const auto n = static_cast<Eigen::Index>(dimension_);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < dimension_; ++r) {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      dense(static_cast<Eigen::Index>(r), columns_[k]) += values_[k];
    }
  }
  return dense;
}

double SparseOperator::hermiticity_defect() const {
  double defect = 0.0;
  for (std::size_t r = 0; r < dimension_; ++r) {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      defect = std::max(defect, std::abs(values_[k] - element(columns_[k], r)));
    }
  }
  return defect;
}

}  // namespace polariton
