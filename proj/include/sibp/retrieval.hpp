#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "sibp/binary_matrix.hpp"
#include "sibp/preference.hpp"

namespace sibp {

/// Number of differing positions; throws std::invalid_argument on a length mismatch.
std::size_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

struct CodeDatabase {
  BinaryMatrix codes;
  std::vector<int> labels;

  CodeDatabase() = default;
  CodeDatabase(BinaryMatrix codes, std::vector<int> labels);
  std::size_t size() const { return labels.size(); }
};

/// Majority label among the k nearest codes. Equal distances at the k-th
/// place go to the lower row index; tied votes go to the class with the
/// smaller mean distance, then the smaller label.
int knn_classify(std::span<const std::uint8_t> query, const CodeDatabase& db, std::size_t k);

inline const std::vector<std::size_t> kDefaultKList{1, 3, 15, 30};

struct AccuracySummary {
  double mean = 0.0;
  double std = 0.0;
};

struct EvalReport {
  std::map<std::size_t, AccuracySummary> per_k;
  double triplet_satisfaction = -1.0;  // negative when not computed
};

/// k-NN accuracy of every query row against the database.
std::vector<double> knn_accuracy(const BinaryMatrix& queries, const std::vector<int>& labels,
                                 const CodeDatabase& db, const std::vector<std::size_t>& k_list);

/// One code set: mean accuracy per k, std 0.
EvalReport evaluate(const BinaryMatrix& test_codes, const std::vector<int>& test_labels,
                    const CodeDatabase& db, const std::vector<std::size_t>& k_list);

/// One (test codes, database) pair per posterior sample; the report holds
/// the mean and standard deviation of the per-sample accuracies.
struct SampleCodes {
  BinaryMatrix test_codes;
  CodeDatabase db;
};
EvalReport evaluate_average(const std::vector<SampleCodes>& samples,
                            const std::vector<int>& test_labels,
                            const std::vector<std::size_t>& k_list);

/// Fraction of triples with d(z_i, z_j) < d(z_i, z_l); ties count 1/2.
/// An empty set gives 1/2.
double triplet_satisfaction(const BinaryMatrix& codes, const TripletSet& triplets);

/// "k,mean,std" rows, followed by the satisfaction as a comment line when set.
void write_report(const EvalReport& report, const std::filesystem::path& path);

}  // namespace sibp
