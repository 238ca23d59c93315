#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace polariton {

/// Real sparse matrix in compressed-row form.
///
/// Every operator this library assembles (ladder, polariton chain, number
/// operators) has real matrix elements in the occupation basis, so values are
/// stored as doubles; complex vectors are still accepted by `apply`.
class SparseOperator {
 public:
  SparseOperator() = default;
  explicit SparseOperator(std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  std::size_t nonzeros() const { return values_.size(); }

  /// Appends the next row. Entries may be unsorted and contain duplicates.
  void push_row(std::vector<std::pair<std::uint32_t, double>>& entries);

  void apply(std::span<const double> x, std::span<double> y) const;
  void apply(std::span<const std::complex<double>> x, std::span<std::complex<double>> y) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  double element(std::size_t row, std::size_t col) const;
  double trace() const;
  Eigen::MatrixXd to_dense() const;

  /// Largest |H_ij - H_ji| over all stored entries.
  double hermiticity_defect() const;
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() <= tol; }

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::uint32_t> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t dimension_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::uint32_t> columns_;
  std::vector<double> values_;
};

}  // namespace polariton
