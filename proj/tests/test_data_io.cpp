#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "sibp/data_io.hpp"
#include "sibp/gauss_model.hpp"
#include "test_util.hpp"

using namespace sibp;

TEST_CASE("synthetic mixture") {
  RngStream rng(1);
  const auto data = generate_synthetic(SyntheticSpec{}, rng);
  CHECK(data.size() == 150);
  CHECK(data.dim() == 2);
  REQUIRE(data.labels);
  std::map<int, int> counts;
  for (int l : *data.labels) ++counts[l];
  CHECK(counts.size() == 10);
  for (const auto& [label, c] : counts) CHECK(c == 15);
  CHECK(data.num_classes() == 10);

  SyntheticSpec flat;
  flat.std_hi = 0.0;
  RngStream r2(2);
  const auto mixture = draw_mixture(flat, r2);
  const auto fixed = sample_mixture(mixture, 30, r2);
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    const int label = (*fixed.labels)[i];
    CHECK((fixed.X.row(static_cast<Eigen::Index>(i)) - mixture.means.row(label)).norm() == 0.0);
  }
  CHECK(mixture.means.maxCoeff() <= 1.0);
  CHECK(mixture.means.minCoeff() >= -1.0);

  SyntheticSpec one;
  one.num_classes = 1;
  one.num_points = 2000;
  RngStream r3(3);
  const auto m1 = draw_mixture(one, r3);
  const auto d1 = sample_mixture(m1, 2000, r3);
  for (Eigen::Index c = 0; c < 2; ++c) {
    std::vector<double> col(d1.X.col(c).data(), d1.X.col(c).data() + d1.X.rows());
    CHECK(std::abs(testing::mean(col) - m1.means(0, c)) < 3.0 * testing::std_error(col));
  }
  SyntheticSpec bad;
  bad.num_classes = 0;
  CHECK_THROWS(generate_synthetic(bad, r3));
}

TEST_CASE("triplet generation") {
  RngStream rng(4);
  const auto data = generate_synthetic(SyntheticSpec{}, rng);
  const auto& labels = *data.labels;
  const auto T = generate_triplets(labels, 15, rng);
  CHECK(T.size() == 2250);
  std::map<std::size_t, std::set<std::size_t>> partners;
  for (const auto& t : T.triples()) {
    CHECK(labels[t.i] == labels[t.j]);
    CHECK(labels[t.i] != labels[t.l]);
    partners[t.i].insert(t.j);
  }
  // Only 14 same-class partners exist, so each is used at least once.
  for (const auto& [i, js] : partners) CHECK(js.size() == 14);
  CHECK(generate_triplets(labels, 0, rng).empty());
  const auto small = generate_triplets(labels, 5, rng);
  std::map<std::size_t, std::set<std::size_t>> distinct;
  for (const auto& t : small.triples()) distinct[t.i].insert(t.l);
  for (const auto& [i, ls] : distinct) CHECK(ls.size() == 5);

  const std::vector<int> two{0, 0, 0, 1, 1, 1};
  const auto forced = generate_triplets(two, 2, rng);
  for (const auto& t : forced.triples()) CHECK(two[t.l] != two[t.i]);
  CHECK_THROWS(generate_triplets(std::vector<int>{0, 0, 0}, 1, rng));
  CHECK_THROWS(generate_triplets(std::vector<int>{0, 1, 1}, 1, rng));
}

TEST_CASE("class hash fixture") {
  const auto H = class_hash_fixture({0, 1, 2, 3, 9});
  CHECK(H.row(0) == std::vector<std::uint8_t>{0, 1, 1, 0, 1});
  CHECK(H.row(0) == H.row(1));
  CHECK(H.row(2) == std::vector<std::uint8_t>{1, 0, 1, 0, 1});
  CHECK(H.row(4) == std::vector<std::uint8_t>{1, 0, 0, 1, 0});
  CHECK_THROWS(class_hash_fixture({10}));
}

TEST_CASE("dataset files") {
  const auto dir = testing::scratch_dir("dataset");
  RngStream rng(5);
  auto data = generate_synthetic(SyntheticSpec{}, rng);
  data.hash = class_hash_fixture(*data.labels);
  write_dataset(data, dir / "d.csv");
  const auto back = read_dataset(dir / "d.csv");
  CHECK(back.X == data.X);
  CHECK(back.labels == data.labels);
  REQUIRE(back.hash);
  CHECK(*back.hash == *data.hash);

  Dataset bare{Eigen::MatrixXd::Random(3, 2), std::nullopt, std::nullopt};
  write_dataset(bare, dir / "bare.csv");
  const auto b2 = read_dataset(dir / "bare.csv");
  CHECK(b2.X == bare.X);
  CHECK(!b2.labels);
  CHECK(!b2.hash);

  std::ofstream(dir / "bad.csv") << "2,2,0,0\n1.0,2.0\n3.0\n";
  try {
    read_dataset(dir / "bad.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::ofstream(dir / "bad2.csv") << "1,2,0,0\n1.0,abc\n";
  try {
    read_dataset(dir / "bad2.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 5);
  }
  CHECK_THROWS(read_dataset(dir / "missing.csv"));
}

TEST_CASE("code files") {
  const auto dir = testing::scratch_dir("codes");
  const auto codes = BinaryMatrix::from_rows({{1, 0, 1}, {0, 0, 0}}, 3);
  write_codes(codes, dir / "c.txt");
  CHECK(read_codes(dir / "c.txt") == codes);
  std::ofstream(dir / "bad.txt") << "1,3\n102\n";
  CHECK_THROWS_AS(read_codes(dir / "bad.txt"), ParseError);
}

TEST_CASE("trace files") {
  const auto dir = testing::scratch_dir("trace");
  Trace empty;
  write_trace(empty, dir / "empty.jsonl");
  const auto e2 = read_trace(dir / "empty.jsonl");
  CHECK(e2.samples.empty());
  CHECK(e2.model == ModelKind::gaussian);

  RngStream rng(6);
  Eigen::MatrixXd X(10, 2);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
  ChainConfig cfg;
  cfg.sweeps = 9;
  cfg.burn_in = 2;
  cfg.thin = 1;
  const auto trace = run_gaussian_chain(X, TripletSet(10, {{0, 1, 2}}), nullptr, cfg);
  CHECK(trace.samples.size() == 10);
  write_trace(trace, dir / "g.jsonl");
  const auto back = read_trace(dir / "g.jsonl");
  REQUIRE(back.samples.size() == trace.samples.size());
  CHECK(back.config.sweeps == 9);
  CHECK(back.config.init_features == cfg.init_features);
  CHECK(back.preprocessing.mean == trace.preprocessing.mean);
  for (std::size_t s = 0; s < back.samples.size(); ++s) {
    CHECK(back.samples[s].log_posterior == trace.samples[s].log_posterior);
    CHECK(back.samples[s].Z == trace.samples[s].Z);
    CHECK(back.samples[s].w == trace.samples[s].w);
    CHECK(back.samples[s].sigma_x == trace.samples[s].sigma_x);
    CHECK(back.samples[s].alpha == trace.samples[s].alpha);
  }

  std::ifstream in(dir / "g.jsonl");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  text.resize(text.size() - 20);
  std::ofstream(dir / "cut.jsonl") << text;
  try {
    read_trace(dir / "cut.jsonl");
    FAIL("expected a truncated trace error");
  } catch (const TruncatedTraceError& e) {
    CHECK(e.partial().samples.size() == trace.samples.size() - 1);
  }
  std::string versioned = ss.str();
  const auto pos = versioned.find("\"version\":1");
  REQUIRE(pos != std::string::npos);
  versioned.replace(pos, 11, "\"version\":7");
  std::ofstream(dir / "v.jsonl") << versioned;
  CHECK_THROWS_AS(read_trace(dir / "v.jsonl"), ParseError);
}
