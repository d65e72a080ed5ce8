#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sibp/binary_matrix.hpp"
#include "sibp/chain.hpp"
#include "sibp/distributions.hpp"
#include "sibp/errors.hpp"
#include "sibp/preference.hpp"

namespace sibp {

struct Dataset {
  Eigen::MatrixXd X;
  std::optional<std::vector<int>> labels;
  std::optional<BinaryMatrix> hash;

  std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(X.cols()); }
  /// 1 + largest label, or 0 without labels.
  std::size_t num_classes() const;
};

/// Per-class means and per-axis standard deviations of a Gaussian mixture.
struct Mixture {
  Eigen::MatrixXd means;  // classes x dim
  Eigen::MatrixXd stds;   // classes x dim
};

struct SyntheticSpec {
  std::size_t num_points = 150;
  std::size_t num_classes = 10;
  std::size_t dim = 2;
  double mean_lo = -1.0;
  double mean_hi = 1.0;
  double std_lo = 0.0;
  double std_hi = 1.0;
};

Mixture draw_mixture(const SyntheticSpec& spec, RngStream& rng);
/// Points split evenly over the classes (remainder to the lowest ids),
/// ordered by class.
Dataset sample_mixture(const Mixture& mixture, std::size_t num_points, RngStream& rng);
Dataset generate_synthetic(const SyntheticSpec& spec, RngStream& rng);

/// For each i: L same-class partners j and L other-class partners l, paired
/// into L triples (i, j_m, l_m). Partners are drawn without replacement; a
/// pool smaller than L is exhausted and then reused.
TripletSet generate_triplets(const std::vector<int>& labels, std::size_t L, RngStream& rng);

/// The 5-bit observed hash where classes 0-1, 2-3, 4-5 and 6-9 collide.
BinaryMatrix class_hash_fixture(const std::vector<int>& labels);

/// Text format: header "N,M,has_labels,D", then one line per object with M
/// values, the label (if any) and D hash bits, comma separated.
Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& data, const std::filesystem::path& path);

/// Code file: header "N,K", then one line of K '0'/'1' characters per object.
BinaryMatrix read_codes(const std::filesystem::path& path);
void write_codes(const BinaryMatrix& codes, const std::filesystem::path& path);

inline constexpr int kTraceVersion = 1;

/// Thrown when the last record of a trace is cut off; carries the intact part.
class TruncatedTraceError : public ParseError {
 public:
  TruncatedTraceError(const std::string& what, std::size_t line, Trace partial)
      : ParseError(what, line, 0), partial_(std::move(partial)) {}
  const Trace& partial() const { return partial_; }

 private:
  Trace partial_;
};

/// JSON Lines: a header record followed by one record per sample.
class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& path, const Trace& meta);
  void append(const ModelSample& sample);

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

void write_trace(const Trace& trace, const std::filesystem::path& path);
Trace read_trace(const std::filesystem::path& path);

}  // namespace sibp
