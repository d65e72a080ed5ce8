#include "sibp/pipeline.hpp"

#include <stdexcept>

#include "sibp/gauss_model.hpp"
#include "sibp/probit_model.hpp"

namespace sibp {

Trace train_model(ModelKind model, const Dataset& data, const TripletSet& triplets, bool use_hash,
                  const ChainConfig& config, const SampleCallback& on_sample) {
  if (use_hash && !data.hash) throw std::invalid_argument("the dataset has no hash bits");
  const BinaryMatrix* hash = use_hash ? &*data.hash : nullptr;
  if (model == ModelKind::gaussian) return run_gaussian_chain(data.X, triplets, hash, config, on_sample);
  return run_probit_chain(data.X, triplets, hash, config, on_sample);
}

BinaryMatrix predict_codes(const Trace& trace, const ModelSample& sample,
                           const Eigen::MatrixXd& X_train, const Eigen::MatrixXd& X_query) {
  const Eigen::MatrixXd query = trace.preprocessing.apply(X_query);
  if (trace.model == ModelKind::probit) return probit_codes(sample, query);
  if (static_cast<std::size_t>(X_train.rows()) != sample.Z.rows()) {
    throw std::invalid_argument("training data does not match the trace");
  }
  return gaussian_codes(sample, trace.preprocessing.apply(X_train), query);
}

SampleCodes sample_codes(const Trace& trace, const ModelSample& sample, const Dataset& train,
                         const Dataset& test, bool use_hash) {
  if (!train.labels) throw std::invalid_argument("training data needs labels");
  BinaryMatrix db = sample.Z;
  BinaryMatrix queries = predict_codes(trace, sample, train.X, test.X);
  if (use_hash) {
    if (!train.hash || !test.hash) throw std::invalid_argument("hash bits missing from a dataset");
    db = BinaryMatrix::hconcat(*train.hash, db);
    queries = BinaryMatrix::hconcat(*test.hash, queries);
  }
  return SampleCodes{std::move(queries), CodeDatabase(std::move(db), *train.labels)};
}

EvalReport evaluate_trace(const Trace& trace, const Dataset& train, const Dataset& test,
                          const std::vector<std::size_t>& k_list, EvalMode mode,
                          std::size_t num_samples, bool use_hash) {
  if (trace.samples.empty()) throw std::invalid_argument("the trace has no samples");
  if (!test.labels) throw std::invalid_argument("test data needs labels");
  if (mode == EvalMode::last) {
    const auto codes = sample_codes(trace, trace.samples.back(), train, test, use_hash);
    return evaluate(codes.test_codes, *test.labels, codes.db, k_list);
  }
  const auto retained = trace.post_burn_in();
  if (num_samples == 0 || num_samples > retained.size()) {
    throw std::invalid_argument("average mode needs " + std::to_string(num_samples) +
                                " post-burn-in samples, the trace has " +
                                std::to_string(retained.size()));
  }
  std::vector<SampleCodes> per_sample;
  per_sample.reserve(num_samples);
  for (std::size_t i = retained.size() - num_samples; i < retained.size(); ++i) {
    per_sample.push_back(sample_codes(trace, *retained[i], train, test, use_hash));
  }
  return evaluate_average(per_sample, *test.labels, k_list);
}

}  // namespace sibp
