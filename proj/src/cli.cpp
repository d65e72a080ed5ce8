#include "sibp/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>

#include <CLI11.hpp>

#include "sibp/data_io.hpp"
#include "sibp/errors.hpp"
#include "sibp/pipeline.hpp"
#include "sibp/retrieval.hpp"

namespace sibp {

namespace fs = std::filesystem;

namespace {

struct ChainOptions {
  std::string data;
  std::string triplets;
  std::string model = "gaussian";
  std::string out;
  std::size_t chains = 1;
  ChainConfig config;
};

void add_chain_options(CLI::App* cmd, ChainOptions& o) {
  auto& c = o.config;
  auto& h = c.hyper;
  cmd->add_option("--data", o.data, "Training dataset")->required();
  cmd->add_option("--triplets", o.triplets, "Triplet file (i,j,l per line)")->required();
  cmd->add_option("--model", o.model, "gaussian or probit")
      ->check(CLI::IsMember({"gaussian", "probit"}))
      ->capture_default_str();
  cmd->add_option("--sweeps", c.sweeps, "MCMC sweeps")->capture_default_str();
  cmd->add_option("--burn-in", c.burn_in, "Sweeps discarded as burn-in")->capture_default_str();
  cmd->add_option("--thin", c.thin, "Record every n-th sweep")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--chains", o.chains, "Independent chains (one trace each)")->capture_default_str();
  cmd->add_option("--weight-shape", h.weight_prior.shape, "Gamma shape of the preference weights")
      ->capture_default_str();
  cmd->add_option("--weight-rate", h.weight_prior.rate, "Gamma rate of the preference weights")
      ->capture_default_str();
  cmd->add_option("--alpha-shape", h.alpha_prior.shape, "Gamma shape of the alpha prior")
      ->capture_default_str();
  cmd->add_option("--alpha-rate", h.alpha_prior.rate, "Gamma rate of the alpha prior")
      ->capture_default_str();
  cmd->add_option("--alpha", h.alpha_init, "Initial alpha")->capture_default_str();
  cmd->add_option("--sigma-x", h.sigma_x_init, "Initial sigma_x (gaussian)")->capture_default_str();
  cmd->add_option("--sigma-v", h.sigma_v_init, "Initial sigma_v (gaussian)")->capture_default_str();
  cmd->add_option("--sigma-g", h.sigma_g, "Regression prior scale (probit)")->capture_default_str();
  cmd->add_flag("--learn-sigma-g", c.learn_sigma_g, "Slice-sample sigma_g (probit)");
  cmd->add_option("--noise", c.preference_noise, "Label-noise rate of the preference likelihood")
      ->capture_default_str();
  cmd->add_option("--max-features", c.max_features, "Cap on the number of latent features")
      ->capture_default_str();
  cmd->add_option("--init-features", c.init_features, "Random Bernoulli(0.5) columns at the start")
      ->capture_default_str();
}

/// Inconsistent flag values; reported with the usage exit code.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

fs::path chain_path(const fs::path& out, std::size_t chain, std::size_t chains) {
  if (chains == 1) return out;
  fs::path p = out;
  p.replace_filename(out.stem().string() + ".chain" + std::to_string(chain) +
                     out.extension().string());
  return p;
}

Dataset load_dataset(const std::string& path) {
  return read_dataset(path);
}

/// Trains every chain, streaming each to its own trace file. Returns the
/// trace of the first chain.
Trace train_chains(const ChainOptions& o, bool use_hash, std::vector<fs::path>& outputs) {
  if (o.chains == 0) throw UsageError("--chains must be >= 1");
  if (o.config.burn_in >= o.config.sweeps) {
    throw UsageError("--burn-in must be smaller than --sweeps (no retained samples)");
  }
  try {
    o.config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const ModelKind model = parse_model_kind(o.model);
  const Dataset data = load_dataset(o.data);
  const TripletSet triplets = read_triplets(o.triplets, data.size());
  Trace first;
  const RngStream root(o.config.seed);
  for (std::size_t c = 0; c < o.chains; ++c) {
    ChainConfig config = o.config;
    if (o.chains > 1) config.seed = root.split(c).next_u64();
    Trace meta;
    meta.model = model;
    meta.config = config;
    meta.preprocessing = model == ModelKind::gaussian ? Standardization::center(data.X)
                                                      : Standardization::standardize(data.X);
    const fs::path path = chain_path(o.out, c, o.chains);
    outputs.push_back(path);
    TraceWriter writer(path, meta);
    Trace trace = train_model(model, data, triplets, use_hash, config,
                              [&](const ModelSample& s) { writer.append(s); });
    if (c == 0) first = std::move(trace);
  }
  return first;
}

const ModelSample& pick_sample(const Trace& trace, long index) {
  if (trace.samples.empty()) throw std::invalid_argument("the trace has no samples");
  if (index < 0) index += static_cast<long>(trace.samples.size());
  if (index < 0 || index >= static_cast<long>(trace.samples.size())) {
    throw std::out_of_range("--sample index outside the trace");
  }
  return trace.samples[static_cast<std::size_t>(index)];
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Supervised IBP binary codes: generate data, train, predict, evaluate", "sibp"};
  app.set_config("--config", "", "INI/TOML file with option values (flags take precedence)");
  app.require_subcommand(1);

  // generate
  SyntheticSpec spec;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  std::string gen_test_out;
  std::size_t gen_test_points = 150;
  bool gen_hash = false;
  auto* generate = app.add_subcommand("generate", "Draw a synthetic Gaussian-mixture dataset");
  generate->add_option("--out", gen_out, "Output dataset")->required();
  generate->add_option("--points", spec.num_points, "Number of points")->capture_default_str();
  generate->add_option("--classes", spec.num_classes, "Number of classes")->capture_default_str();
  generate->add_option("--dim", spec.dim, "Dimension")->capture_default_str();
  generate->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  generate->add_flag("--with-hash", gen_hash, "Attach the 5-bit colliding class hash");
  generate->add_option("--test-out", gen_test_out, "Also write a fresh draw from the same mixture");
  generate->add_option("--test-points", gen_test_points, "Points in the fresh draw")
      ->capture_default_str();

  // triplets
  std::string trip_data;
  std::string trip_out;
  std::size_t trip_L = 15;
  std::uint64_t trip_seed = 1;
  auto* triplets = app.add_subcommand("triplets", "Sample L neighbour/non-neighbour triples per point");
  triplets->add_option("--data", trip_data, "Labelled dataset")->required();
  triplets->add_option("--out", trip_out, "Output triplet file")->required();
  triplets->add_option("--L", trip_L, "Triples per point")->capture_default_str();
  triplets->add_option("--seed", trip_seed, "Random seed")->capture_default_str();

  // train
  ChainOptions train_opts;
  bool train_hash = false;
  auto* train = app.add_subcommand("train", "Run MCMC and write a trace");
  add_chain_options(train, train_opts);
  train->add_option("--out", train_opts.out, "Output trace (JSON Lines)")->required();
  train->add_flag("--use-hash", train_hash, "Couple the dataset's hash bits into the likelihood");

  // predict
  std::string pred_trace;
  std::string pred_train;
  std::string pred_data;
  std::string pred_out;
  long pred_sample = -1;
  auto* predict = app.add_subcommand("predict", "Binary codes for new points from a trace sample");
  predict->add_option("--trace", pred_trace, "Trace file")->required();
  predict->add_option("--train-data", pred_train, "Dataset the trace was trained on")->required();
  predict->add_option("--data", pred_data, "Points to encode")->required();
  predict->add_option("--out", pred_out, "Output code file")->required();
  predict->add_option("--sample", pred_sample, "Sample index (negative counts from the end)")
      ->capture_default_str();

  // extend-hash
  ChainOptions ext_opts;
  std::string ext_codes;
  auto* extend = app.add_subcommand("extend-hash", "Train with the observed hash and emit [h z] codes");
  add_chain_options(extend, ext_opts);
  extend->add_option("--out", ext_opts.out, "Output trace (JSON Lines)")->required();
  extend->add_option("--codes", ext_codes, "Output extended code file")->required();

  // evaluate
  std::string ev_trace;
  std::string ev_train;
  std::string ev_test;
  std::string ev_triplets;
  std::string ev_out;
  std::string ev_mode = "last";
  std::size_t ev_S = 50;
  std::vector<std::size_t> ev_k = kDefaultKList;
  bool ev_hash = false;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "k-NN retrieval accuracy of a trace");
  evaluate_cmd->add_option("--trace", ev_trace, "Trace file")->required();
  evaluate_cmd->add_option("--train-data", ev_train, "Dataset the trace was trained on")->required();
  evaluate_cmd->add_option("--test-data", ev_test, "Labelled query dataset")->required();
  evaluate_cmd->add_option("--out", ev_out, "Output report (k,mean,std)")->required();
  evaluate_cmd->add_option("--triplets", ev_triplets, "Training triplets for the satisfaction score");
  evaluate_cmd->add_option("--mode", ev_mode, "last or average")
      ->check(CLI::IsMember({"last", "average"}))
      ->capture_default_str();
  evaluate_cmd->add_option("--S", ev_S, "Samples averaged in average mode")->capture_default_str();
  evaluate_cmd->add_option("--k", ev_k, "Neighbour counts")->delimiter(',')->capture_default_str();
  evaluate_cmd->add_flag("--use-hash", ev_hash, "Prefix codes with the observed hash bits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::vector<fs::path> outputs;
  try {
    if (*generate) {
      RngStream rng(gen_seed);
      const Mixture mix = draw_mixture(spec, rng);
      Dataset data = sample_mixture(mix, spec.num_points, rng);
      if (gen_hash) data.hash = class_hash_fixture(*data.labels);
      outputs.push_back(gen_out);
      write_dataset(data, gen_out);
      if (!gen_test_out.empty()) {
        Dataset test = sample_mixture(mix, gen_test_points, rng);
        if (gen_hash) test.hash = class_hash_fixture(*test.labels);
        outputs.push_back(gen_test_out);
        write_dataset(test, gen_test_out);
      }
    } else if (*triplets) {
      const Dataset data = load_dataset(trip_data);
      if (!data.labels) throw std::invalid_argument("the dataset has no labels");
      RngStream rng(trip_seed);
      const TripletSet T = generate_triplets(*data.labels, trip_L, rng);
      outputs.push_back(trip_out);
      write_triplets(T, trip_out);
    } else if (*train) {
      train_chains(train_opts, train_hash, outputs);
    } else if (*predict) {
      const Trace trace = read_trace(pred_trace);
      const Dataset train_data = load_dataset(pred_train);
      const Dataset query = load_dataset(pred_data);
      const ModelSample& sample = pick_sample(trace, pred_sample);
      const BinaryMatrix codes = predict_codes(trace, sample, train_data.X, query.X);
      outputs.push_back(pred_out);
      write_codes(codes, pred_out);
    } else if (*extend) {
      const Trace trace = train_chains(ext_opts, true, outputs);
      const Dataset data = load_dataset(ext_opts.data);
      outputs.push_back(ext_codes);
      write_codes(BinaryMatrix::hconcat(*data.hash, trace.samples.back().Z), ext_codes);
    } else if (*evaluate_cmd) {
      const Trace trace = read_trace(ev_trace);
      const Dataset train_data = load_dataset(ev_train);
      const Dataset test = load_dataset(ev_test);
      const EvalMode mode = ev_mode == "average" ? EvalMode::average : EvalMode::last;
      EvalReport report = evaluate_trace(trace, train_data, test, ev_k, mode, ev_S, ev_hash);
      if (!ev_triplets.empty()) {
        const TripletSet T = read_triplets(ev_triplets, train_data.size());
        BinaryMatrix codes = trace.samples.back().Z;
        if (ev_hash) codes = BinaryMatrix::hconcat(*train_data.hash, codes);
        report.triplet_satisfaction = triplet_satisfaction(codes, T);
      }
      outputs.push_back(ev_out);
      write_report(report, ev_out);
    }
  } catch (const UsageError& e) {
    std::error_code ec;
    for (const auto& p : outputs) fs::remove(p, ec);
    std::cerr << "sibp: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::error_code ec;
    for (const auto& p : outputs) fs::remove(p, ec);
    std::cerr << "sibp: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::error_code ec;
    for (const auto& p : outputs) fs::remove(p, ec);
    std::cerr << "sibp: error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("sibp");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace sibp
