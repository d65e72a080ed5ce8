#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sibp {

/// Dense N x K binary matrix stored by column, with cached column sums.
///
/// Used for the latent feature matrix Z, observed hash bits H and retrieval
/// codes. Column storage keeps feature insertion and removal cheap.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols);

  static BinaryMatrix from_rows(const std::vector<std::vector<std::uint8_t>>& rows,
                                std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return columns_.size(); }

  std::uint8_t operator()(std::size_t r, std::size_t c) const {
    return columns_[c][r];
  }
  void set(std::size_t r, std::size_t c, bool value);
  void flip(std::size_t r, std::size_t c) { set(r, c, !columns_[c][r]); }

  /// Number of ones in column c.
  std::size_t column_count(std::size_t c) const { return counts_[c]; }
  std::span<const std::uint8_t> column(std::size_t c) const { return columns_[c]; }

  void append_column();
  void append_column(std::vector<std::uint8_t> values);
  void remove_column(std::size_t c);
  /// Removes all-zero columns; returns the original indices of the kept ones.
  std::vector<std::size_t> prune_empty_columns();
  /// Keeps only the listed columns, in the listed order.
  void select_columns(const std::vector<std::size_t>& keep);

  /// Appends zero rows or removes trailing rows.
  void resize_rows(std::size_t rows);

  std::vector<std::uint8_t> row(std::size_t r) const;
  std::size_t row_count(std::size_t r) const;

  /// Horizontal concatenation [a b]; row counts must agree.
  static BinaryMatrix hconcat(const BinaryMatrix& a, const BinaryMatrix& b);

  Eigen::MatrixXd to_dense() const;

  bool operator==(const BinaryMatrix& other) const {
    return rows_ == other.rows_ && columns_ == other.columns_;
  }

 private:
  std::size_t rows_ = 0;
  std::vector<std::vector<std::uint8_t>> columns_;
  std::vector<std::size_t> counts_;
};

}  // namespace sibp
