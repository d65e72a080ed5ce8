#include "sibp/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace sibp {

std::size_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != 0) != (b[i] != 0) ? 1 : 0;
  return d;
}

CodeDatabase::CodeDatabase(BinaryMatrix codes_, std::vector<int> labels_)
    : codes(std::move(codes_)), labels(std::move(labels_)) {
  if (codes.rows() != labels.size()) {
    throw std::invalid_argument("CodeDatabase: one label per code is required");
  }
}

namespace {

std::vector<std::size_t> distances_to(std::span<const std::uint8_t> query, const CodeDatabase& db) {
  if (query.size() != db.codes.cols()) throw std::invalid_argument("knn: code length mismatch");
  std::vector<std::size_t> dist(db.size(), 0);
  for (std::size_t c = 0; c < db.codes.cols(); ++c) {
    const auto column = db.codes.column(c);
    const bool q = query[c] != 0;
    for (std::size_t r = 0; r < dist.size(); ++r) dist[r] += (column[r] != 0) != q ? 1 : 0;
  }
  return dist;
}

int vote(const std::vector<std::size_t>& order, const std::vector<std::size_t>& dist,
         const std::vector<int>& labels, std::size_t k) {
  struct Tally {
    std::size_t votes = 0;
    std::size_t total_distance = 0;
  };
  std::map<int, Tally> tally;
  for (std::size_t i = 0; i < k; ++i) {
    Tally& t = tally[labels[order[i]]];
    ++t.votes;
    t.total_distance += dist[order[i]];
  }
  int best = tally.begin()->first;
  Tally best_tally = tally.begin()->second;
  for (const auto& [label, t] : tally) {
    if (t.votes > best_tally.votes) {
      best = label;
      best_tally = t;
    } else if (t.votes == best_tally.votes) {
      // Same vote count: compare mean distances without dividing.
      const std::size_t lhs = t.total_distance * best_tally.votes;
      const std::size_t rhs = best_tally.total_distance * t.votes;
      if (lhs < rhs) {
        best = label;
        best_tally = t;
      }
    }
  }
  return best;
}

std::vector<std::size_t> nearest_order(const std::vector<std::size_t>& dist, std::size_t k) {
  std::vector<std::size_t> order(dist.size());
  std::iota(order.begin(), order.end(), 0);
  const auto cmp = [&](std::size_t a, std::size_t b) {
    return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), cmp);
  return order;
}

}  // namespace

int knn_classify(std::span<const std::uint8_t> query, const CodeDatabase& db, std::size_t k) {
  if (k == 0 || k > db.size()) throw std::out_of_range("knn_classify: need 1 <= k <= N");
  const auto dist = distances_to(query, db);
  return vote(nearest_order(dist, k), dist, db.labels, k);
}

std::vector<double> knn_accuracy(const BinaryMatrix& queries, const std::vector<int>& labels,
                                 const CodeDatabase& db, const std::vector<std::size_t>& k_list) {
  if (queries.rows() != labels.size()) {
    throw std::invalid_argument("knn_accuracy: one label per query is required");
  }
  if (queries.cols() != db.codes.cols()) throw std::invalid_argument("knn_accuracy: code length mismatch");
  std::size_t k_max = 0;
  for (const std::size_t k : k_list) {
    if (k == 0 || k > db.size()) throw std::out_of_range("knn_accuracy: need 1 <= k <= N");
    k_max = std::max(k_max, k);
  }
  std::vector<double> correct(k_list.size(), 0.0);
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    const auto row = queries.row(q);
    const auto dist = distances_to(row, db);
    const auto order = nearest_order(dist, k_max);
    for (std::size_t a = 0; a < k_list.size(); ++a) {
      if (vote(order, dist, db.labels, k_list[a]) == labels[q]) correct[a] += 1.0;
    }
  }
  if (queries.rows() > 0) {
    for (auto& c : correct) c /= static_cast<double>(queries.rows());
  }
  return correct;
}

EvalReport evaluate(const BinaryMatrix& test_codes, const std::vector<int>& test_labels,
                    const CodeDatabase& db, const std::vector<std::size_t>& k_list) {
  const auto acc = knn_accuracy(test_codes, test_labels, db, k_list);
  EvalReport report;
  for (std::size_t a = 0; a < k_list.size(); ++a) report.per_k[k_list[a]] = {acc[a], 0.0};
  return report;
}

EvalReport evaluate_average(const std::vector<SampleCodes>& samples,
                            const std::vector<int>& test_labels,
                            const std::vector<std::size_t>& k_list) {
  if (samples.empty()) throw std::invalid_argument("evaluate_average: no samples");
  std::vector<std::vector<double>> acc;
  acc.reserve(samples.size());
  for (const auto& s : samples) acc.push_back(knn_accuracy(s.test_codes, test_labels, s.db, k_list));
  EvalReport report;
  const double count = static_cast<double>(samples.size());
  for (std::size_t a = 0; a < k_list.size(); ++a) {
    double mean = 0.0;
    for (const auto& v : acc) mean += v[a];
    mean /= count;
    double var = 0.0;
    for (const auto& v : acc) var += (v[a] - mean) * (v[a] - mean);
    report.per_k[k_list[a]] = {mean, samples.size() > 1 ? std::sqrt(var / (count - 1.0)) : 0.0};
  }
  return report;
}

double triplet_satisfaction(const BinaryMatrix& codes, const TripletSet& triplets) {
  if (triplets.num_objects() > codes.rows()) {
    throw std::out_of_range("triplet_satisfaction: triplets refer to missing objects");
  }
  if (triplets.empty()) return 0.5;
  double score = 0.0;
  for (const Triplet& t : triplets.triples()) {
    std::size_t dj = 0;
    std::size_t dl = 0;
    for (std::size_t c = 0; c < codes.cols(); ++c) {
      const auto col = codes.column(c);
      dj += col[t.i] != col[t.j] ? 1 : 0;
      dl += col[t.i] != col[t.l] ? 1 : 0;
    }
    score += dj < dl ? 1.0 : (dj == dl ? 0.5 : 0.0);
  }
  return score / static_cast<double>(triplets.size());
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report " + path.string());
  out << "k,mean,std\n";
  char buf[128];
  for (const auto& [k, acc] : report.per_k) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f\n", k, acc.mean, acc.std);
    out << buf;
  }
  if (report.triplet_satisfaction >= 0.0) {
    std::snprintf(buf, sizeof buf, "# triplet_satisfaction,%.6f\n", report.triplet_satisfaction);
    out << buf;
  }
  if (!out) throw std::runtime_error("error writing report " + path.string());
}

}  // namespace sibp
