#include "sibp/binary_matrix.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace sibp {

BinaryMatrix::BinaryMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows),
      columns_(cols, std::vector<std::uint8_t>(rows, 0)),
      counts_(cols, 0) {}

BinaryMatrix BinaryMatrix::from_rows(
    const std::vector<std::vector<std::uint8_t>>& rows, std::size_t cols) {
  BinaryMatrix out(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw std::invalid_argument("BinaryMatrix::from_rows: ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (rows[r][c] > 1) throw std::invalid_argument("BinaryMatrix: non-binary entry");
      out.set(r, c, rows[r][c] != 0);
    }
  }
  return out;
}

void BinaryMatrix::set(std::size_t r, std::size_t c, bool value) {
  std::uint8_t& cell = columns_[c][r];
  const std::uint8_t v = value ? 1 : 0;
  if (cell == v) return;
  cell = v;
  if (v) {
    ++counts_[c];
  } else {
    --counts_[c];
  }
}

void BinaryMatrix::append_column() {
  columns_.emplace_back(rows_, 0);
  counts_.push_back(0);
}

void BinaryMatrix::append_column(std::vector<std::uint8_t> values) {
  if (values.size() != rows_) {
    throw std::invalid_argument("BinaryMatrix::append_column: length mismatch");
  }
  std::size_t count = 0;
  for (auto& v : values) {
    if (v > 1) throw std::invalid_argument("BinaryMatrix: non-binary entry");
    count += v;
  }
  columns_.push_back(std::move(values));
  counts_.push_back(count);
}

void BinaryMatrix::remove_column(std::size_t c) {
  columns_.erase(columns_.begin() + static_cast<std::ptrdiff_t>(c));
  counts_.erase(counts_.begin() + static_cast<std::ptrdiff_t>(c));
}

std::vector<std::size_t> BinaryMatrix::prune_empty_columns() {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < cols(); ++c) {
    if (counts_[c] > 0) keep.push_back(c);
  }
  select_columns(keep);
  return keep;
}

void BinaryMatrix::select_columns(const std::vector<std::size_t>& keep) {
  std::vector<std::vector<std::uint8_t>> columns;
  std::vector<std::size_t> counts;
  columns.reserve(keep.size());
  counts.reserve(keep.size());
  for (const std::size_t c : keep) {
    columns.push_back(columns_.at(c));
    counts.push_back(counts_[c]);
  }
  columns_ = std::move(columns);
  counts_ = std::move(counts);
}

void BinaryMatrix::resize_rows(std::size_t rows) {
  for (std::size_t c = 0; c < cols(); ++c) {
    if (rows < rows_) {
      for (std::size_t r = rows; r < rows_; ++r) counts_[c] -= columns_[c][r];
    }
    columns_[c].resize(rows, 0);
  }
  rows_ = rows;
}

std::vector<std::uint8_t> BinaryMatrix::row(std::size_t r) const {
  std::vector<std::uint8_t> out(cols());
  for (std::size_t c = 0; c < cols(); ++c) out[c] = columns_[c][r];
  return out;
}

std::size_t BinaryMatrix::row_count(std::size_t r) const {
  std::size_t total = 0;
  for (const auto& col : columns_) total += col[r];
  return total;
}

BinaryMatrix BinaryMatrix::hconcat(const BinaryMatrix& a, const BinaryMatrix& b) {
  if (a.cols() > 0 && b.cols() > 0 && a.rows() != b.rows()) {
    throw std::invalid_argument("BinaryMatrix::hconcat: row mismatch");
  }
  BinaryMatrix out = a.cols() > 0 ? a : BinaryMatrix(b.rows(), 0);
  for (std::size_t c = 0; c < b.cols(); ++c) {
    out.append_column(std::vector<std::uint8_t>(b.column(c).begin(), b.column(c).end()));
  }
  return out;
}

Eigen::MatrixXd BinaryMatrix::to_dense() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols()));
  for (std::size_t c = 0; c < cols(); ++c) {
    for (std::size_t r = 0; r < rows_; ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = columns_[c][r];
    }
  }
  return out;
}

}  // namespace sibp
