#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sibp/cli.hpp"
#include "sibp/data_io.hpp"
#include "test_util.hpp"

using namespace sibp;

namespace {

int run(const std::vector<std::string>& args) { return run_cli(args); }

}  // namespace

TEST_CASE("end-to-end command pipeline") {
  const auto dir = testing::scratch_dir("cli");
  const auto p = [&](const char* name) { return (dir / name).string(); };
  REQUIRE(run({"generate", "--out", p("train.csv"), "--seed", "3", "--with-hash", "--test-out",
               p("test.csv"), "--test-points", "50"}) == kExitOk);
  const auto train = read_dataset(p("train.csv"));
  CHECK(train.size() == 150);
  CHECK(train.hash.has_value());
  CHECK(read_dataset(p("test.csv")).size() == 50);

  REQUIRE(run({"triplets", "--data", p("train.csv"), "--out", p("t.txt"), "--L", "3"}) == kExitOk);
  CHECK(read_triplets(p("t.txt")).size() == 450);

  for (const char* model : {"gaussian", "probit"}) {
    const std::string trace = p(model) + std::string(".jsonl");
    REQUIRE(run({"train", "--data", p("train.csv"), "--triplets", p("t.txt"), "--model", model,
                 "--sweeps", "6", "--burn-in", "2", "--thin", "1", "--out", trace}) == kExitOk);
    const auto tr = read_trace(trace);
    CHECK(tr.samples.size() == 7);
    CHECK(to_string(tr.model) == model);
    REQUIRE(run({"predict", "--trace", trace, "--train-data", p("train.csv"), "--data",
                 p("test.csv"), "--out", p("codes.txt")}) == kExitOk);
    CHECK(read_codes(p("codes.txt")).rows() == 50);
    REQUIRE(run({"evaluate", "--trace", trace, "--train-data", p("train.csv"), "--test-data",
                 p("test.csv"), "--triplets", p("t.txt"), "--mode", "average", "--S", "3", "--k",
                 "1,3", "--out", p("report.csv")}) == kExitOk);
    std::ifstream in(p("report.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header == "k,mean,std");
  }

  REQUIRE(run({"extend-hash", "--data", p("train.csv"), "--triplets", p("t.txt"), "--model",
               "gaussian", "--sweeps", "4", "--burn-in", "1", "--thin", "1", "--out",
               p("ext.jsonl"), "--codes", p("ext.txt")}) == kExitOk);
  const auto ext = read_codes(p("ext.txt"));
  CHECK(ext.rows() == 150);
  CHECK(ext.cols() >= 5);

  REQUIRE(run({"train", "--data", p("train.csv"), "--triplets", p("t.txt"), "--sweeps", "3",
               "--burn-in", "0", "--chains", "2", "--out", p("multi.jsonl")}) == kExitOk);
  CHECK(std::filesystem::exists(p("multi.chain0.jsonl")));
  CHECK(std::filesystem::exists(p("multi.chain1.jsonl")));
  CHECK(read_trace(p("multi.chain0.jsonl")).config.seed !=
        read_trace(p("multi.chain1.jsonl")).config.seed);
}

TEST_CASE("deterministic outputs") {
  const auto dir = testing::scratch_dir("cli_det");
  const auto p = [&](const char* name) { return (dir / name).string(); };
  REQUIRE(run({"generate", "--out", p("a.csv"), "--seed", "11"}) == kExitOk);
  REQUIRE(run({"generate", "--out", p("b.csv"), "--seed", "11"}) == kExitOk);
  auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(p("a.csv")) == slurp(p("b.csv")));
}

TEST_CASE("exit codes") {
  const auto dir = testing::scratch_dir("cli_err");
  const auto p = [&](const char* name) { return (dir / name).string(); };
  CHECK(run({}) == kExitUsage);
  CHECK(run({"frobnicate"}) == kExitUsage);
  CHECK(run({"train", "--data"}) == kExitUsage);
  CHECK(run({"train", "--data", p("none.csv"), "--triplets", p("none.txt"), "--out",
             p("o.jsonl")}) == kExitData);
  CHECK(!std::filesystem::exists(p("o.jsonl")));
  REQUIRE(run({"generate", "--out", p("d.csv")}) == kExitOk);
  REQUIRE(run({"triplets", "--data", p("d.csv"), "--out", p("t.txt"), "--L", "2"}) == kExitOk);
  CHECK(run({"train", "--data", p("d.csv"), "--triplets", p("t.txt"), "--model", "tree", "--out",
             p("o.jsonl")}) == kExitUsage);
  CHECK(run({"train", "--data", p("d.csv"), "--triplets", p("t.txt"), "--sweeps", "5",
             "--burn-in", "5", "--out", p("o.jsonl")}) == kExitUsage);
  std::ofstream(p("broken.csv")) << "2,2,1,0\n1,2,0\nx,1,1\n";
  CHECK(run({"triplets", "--data", p("broken.csv"), "--out", p("t2.txt")}) == kExitData);
  CHECK(!std::filesystem::exists(p("t2.txt")));
}
