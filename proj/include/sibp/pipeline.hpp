#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "sibp/chain.hpp"
#include "sibp/data_io.hpp"
#include "sibp/retrieval.hpp"

namespace sibp {

/// Runs the chosen model; `use_hash` couples the dataset's hash bits into the
/// preference likelihood.
Trace train_model(ModelKind model, const Dataset& data, const TripletSet& triplets, bool use_hash,
                  const ChainConfig& config, const SampleCallback& on_sample = {});

/// Codes for raw query points under one sample of the trace. The Gaussian
/// model needs the raw training inputs the trace was fitted to.
BinaryMatrix predict_codes(const Trace& trace, const ModelSample& sample,
                           const Eigen::MatrixXd& X_train, const Eigen::MatrixXd& X_query);

/// Database (training codes) and test codes for one sample; with `use_hash`
/// both sides are prefixed with the observed hash bits.
SampleCodes sample_codes(const Trace& trace, const ModelSample& sample, const Dataset& train,
                         const Dataset& test, bool use_hash);

enum class EvalMode { last, average };

/// last: the final sample. average: each of the last S post-burn-in samples
/// is scored on its own and the accuracies are averaged.
EvalReport evaluate_trace(const Trace& trace, const Dataset& train, const Dataset& test,
                          const std::vector<std::size_t>& k_list, EvalMode mode,
                          std::size_t num_samples = 50, bool use_hash = false);

}  // namespace sibp
