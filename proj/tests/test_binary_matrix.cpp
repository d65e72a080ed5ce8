#include <doctest.h>

#include <stdexcept>

#include "sibp/binary_matrix.hpp"

using namespace sibp;

TEST_CASE("set, flip and column counts") {
  BinaryMatrix Z(4, 3);
  CHECK(Z.rows() == 4);
  CHECK(Z.cols() == 3);
  Z.set(0, 1, true);
  Z.set(2, 1, true);
  Z.flip(3, 2);
  CHECK(Z.column_count(0) == 0);
  CHECK(Z.column_count(1) == 2);
  CHECK(Z.column_count(2) == 1);
  Z.set(2, 1, true);
  CHECK(Z.column_count(1) == 2);
  CHECK(Z.row_count(2) == 1);
  CHECK(Z.row(0) == std::vector<std::uint8_t>{0, 1, 0});
}

TEST_CASE("prune, select and append") {
  auto Z = BinaryMatrix::from_rows({{0, 1, 0, 1}, {0, 0, 0, 1}}, 4);
  const auto kept = Z.prune_empty_columns();
  CHECK(kept == std::vector<std::size_t>{1, 3});
  CHECK(Z.cols() == 2);
  CHECK(Z.column_count(1) == 2);
  Z.append_column({1, 0});
  Z.select_columns({2, 0});
  CHECK(Z == BinaryMatrix::from_rows({{1, 1}, {0, 0}}, 2));
  Z.remove_column(0);
  CHECK(Z.cols() == 1);
  Z.resize_rows(3);
  CHECK(Z.rows() == 3);
  CHECK(Z(2, 0) == 0);
  Z.append_column();
  CHECK(Z.column_count(1) == 0);
}

TEST_CASE("hconcat and dense view") {
  const auto a = BinaryMatrix::from_rows({{1}, {0}}, 1);
  const auto b = BinaryMatrix::from_rows({{0, 1}, {1, 1}}, 2);
  const auto c = BinaryMatrix::hconcat(a, b);
  CHECK(c == BinaryMatrix::from_rows({{1, 0, 1}, {0, 1, 1}}, 3));
  const auto d = c.to_dense();
  CHECK(d(1, 2) == 1.0);
  CHECK(d.sum() == 4.0);
  CHECK_THROWS(BinaryMatrix::hconcat(a, BinaryMatrix(3, 1)));
}
