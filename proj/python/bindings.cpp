#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sibp/data_io.hpp"
#include "sibp/gauss_model.hpp"
#include "sibp/pipeline.hpp"
#include "sibp/preference.hpp"
#include "sibp/probit_model.hpp"
#include "sibp/retrieval.hpp"

namespace py = pybind11;
using namespace sibp;

namespace {

using Bits = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using Indices = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

BinaryMatrix to_binary(const Bits& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array of bits");
  const auto r = a.unchecked<2>();
  BinaryMatrix m(static_cast<std::size_t>(r.shape(0)), static_cast<std::size_t>(r.shape(1)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i)
    for (py::ssize_t j = 0; j < r.shape(1); ++j)
      m.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), r(i, j) != 0);
  return m;
}

Bits from_binary(const BinaryMatrix& m) {
  Bits a({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  auto w = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      w(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = m(i, j);
  return a;
}

std::vector<std::uint8_t> to_bits(const Bits& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d array of bits");
  std::vector<std::uint8_t> v(a.data(), a.data() + a.size());
  for (auto& x : v) x = x != 0;
  return v;
}

TripletSet to_triplets(const Indices& a, std::size_t num_objects) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw std::invalid_argument("triplets must have shape (T, 3)");
  const auto r = a.unchecked<2>();
  std::vector<Triplet> t;
  for (py::ssize_t i = 0; i < r.shape(0); ++i) {
    if (r(i, 0) < 0 || r(i, 1) < 0 || r(i, 2) < 0) throw std::invalid_argument("negative triplet index");
    t.push_back({static_cast<std::size_t>(r(i, 0)), static_cast<std::size_t>(r(i, 1)),
                 static_cast<std::size_t>(r(i, 2))});
  }
  return TripletSet(num_objects, std::move(t));
}

Indices from_triplets(const TripletSet& T) {
  Indices a({static_cast<py::ssize_t>(T.size()), py::ssize_t{3}});
  auto w = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < T.size(); ++i) {
    const auto s = static_cast<py::ssize_t>(i);
    w(s, 0) = static_cast<std::int64_t>(T[i].i);
    w(s, 1) = static_cast<std::int64_t>(T[i].j);
    w(s, 2) = static_cast<std::int64_t>(T[i].l);
  }
  return a;
}

Dataset make_dataset(const Eigen::MatrixXd& X, const std::optional<std::vector<int>>& labels,
                     const std::optional<Bits>& hash) {
  Dataset d;
  d.X = X;
  d.labels = labels;
  if (hash) d.hash = to_binary(*hash);
  return d;
}

const ModelSample& pick(const Trace& trace, long index) {
  const auto n = static_cast<long>(trace.samples.size());
  if (index < 0) index += n;
  if (index < 0 || index >= n) throw py::index_error("sample index out of range");
  return trace.samples[static_cast<std::size_t>(index)];
}

py::dict report_dict(const EvalReport& r) {
  py::dict out;
  for (const auto& [k, s] : r.per_k) out[py::int_(k)] = py::make_tuple(s.mean, s.std);
  return out;
}

}  // namespace

PYBIND11_MODULE(_sibp, m) {
  m.doc() = "Supervised Indian Buffet Process hashing";

  py::class_<ChainConfig>(m, "ChainConfig")
      .def(py::init<>())
      .def_readwrite("sweeps", &ChainConfig::sweeps)
      .def_readwrite("burn_in", &ChainConfig::burn_in)
      .def_readwrite("thin", &ChainConfig::thin)
      .def_readwrite("seed", &ChainConfig::seed)
      .def_readwrite("preference_noise", &ChainConfig::preference_noise)
      .def_readwrite("max_features", &ChainConfig::max_features)
      .def_readwrite("init_features", &ChainConfig::init_features)
      .def_readwrite("update_weights", &ChainConfig::update_weights)
      .def_readwrite("update_hyperparameters", &ChainConfig::update_hyperparameters)
      .def_readwrite("update_alpha", &ChainConfig::update_alpha)
      .def_readwrite("update_sticks", &ChainConfig::update_sticks)
      .def_readwrite("update_regression", &ChainConfig::update_regression)
      .def_readwrite("learn_sigma_g", &ChainConfig::learn_sigma_g)
      .def_property(
          "sigma_g", [](const ChainConfig& c) { return c.hyper.sigma_g; },
          [](ChainConfig& c, double v) { c.hyper.sigma_g = v; })
      .def_property(
          "alpha_init", [](const ChainConfig& c) { return c.hyper.alpha_init; },
          [](ChainConfig& c, double v) { c.hyper.alpha_init = v; })
      .def("validate", &ChainConfig::validate);

  py::class_<ModelSample>(m, "Sample")
      .def_readonly("sweep", &ModelSample::sweep)
      .def_readonly("log_posterior", &ModelSample::log_posterior)
      .def_property_readonly("Z", [](const ModelSample& s) { return from_binary(s.Z); })
      .def_readonly("w", &ModelSample::w)
      .def_readonly("wH", &ModelSample::wH)
      .def_readonly("alpha", &ModelSample::alpha)
      .def_readonly("sigma_x", &ModelSample::sigma_x)
      .def_readonly("sigma_v", &ModelSample::sigma_v)
      .def_readonly("sticks", &ModelSample::sticks)
      .def_readonly("G", &ModelSample::G)
      .def_readonly("sigma_g", &ModelSample::sigma_g);

  py::class_<Trace>(m, "Trace")
      .def_property_readonly("model", [](const Trace& t) { return to_string(t.model); })
      .def_readonly("config", &Trace::config)
      .def_readonly("samples", &Trace::samples)
      .def("__len__", [](const Trace& t) { return t.samples.size(); })
      .def("post_burn_in", [](const Trace& t) {
        std::vector<ModelSample> out;
        for (const auto* s : t.post_burn_in()) out.push_back(*s);
        return out;
      })
      .def("save", [](const Trace& t, const std::string& path) { write_trace(t, path); });

  m.def("load_trace", [](const std::string& path) { return read_trace(path); });

  m.def(
      "generate_synthetic",
      [](std::size_t num_points, std::size_t num_classes, std::size_t dim, std::uint64_t seed) {
        RngStream rng(seed);
        SyntheticSpec spec;
        spec.num_points = num_points;
        spec.num_classes = num_classes;
        spec.dim = dim;
        const Dataset d = generate_synthetic(spec, rng);
        return py::make_tuple(d.X, *d.labels);
      },
      py::arg("num_points") = 150, py::arg("num_classes") = 10, py::arg("dim") = 2, py::arg("seed") = 1,
      "Gaussian-mixture data; returns (X, labels).");

  m.def(
      "generate_triplets",
      [](const std::vector<int>& labels, std::size_t L, std::uint64_t seed) {
        RngStream rng(seed);
        return from_triplets(generate_triplets(labels, L, rng));
      },
      py::arg("labels"), py::arg("L") = 15, py::arg("seed") = 1);

  m.def("class_hash_fixture", [](const std::vector<int>& labels) { return from_binary(class_hash_fixture(labels)); });

  m.def(
      "preference_prob",
      [](const Bits& zi, const Bits& zj, const Bits& zl, const std::vector<double>& w) {
        const auto a = to_bits(zi), b = to_bits(zj), c = to_bits(zl);
        return preference_prob(a, b, c, w);
      },
      py::arg("zi"), py::arg("zj"), py::arg("zl"), py::arg("w"));

  m.def(
      "triplet_log_likelihood",
      [](const Bits& Z, const Indices& triplets, const std::vector<double>& w, const std::optional<Bits>& H,
         const std::vector<double>& wH, double noise) {
        const BinaryMatrix z = to_binary(Z);
        std::optional<BinaryMatrix> h;
        if (H) h = to_binary(*H);
        return triplet_log_likelihood(to_triplets(triplets, z.rows()), z, PreferenceWeights{w, wH},
                                      h ? &*h : nullptr, noise);
      },
      py::arg("Z"), py::arg("triplets"), py::arg("w"), py::arg("H") = py::none(),
      py::arg("wH") = std::vector<double>{}, py::arg("noise") = 0.0);

  m.def(
      "collapsed_log_evidence",
      [](const Eigen::MatrixXd& X, const Bits& Z, double sigma_x, double sigma_v) {
        return collapsed_log_evidence(X, to_binary(Z), sigma_x, sigma_v);
      },
      py::arg("X"), py::arg("Z"), py::arg("sigma_x"), py::arg("sigma_v"));

  m.def("feature_activation_prob", &feature_activation_prob, py::arg("x"), py::arg("g"), py::arg("b"));

  m.def(
      "train",
      [](const std::string& model, const Eigen::MatrixXd& X, const Indices& triplets,
         const std::optional<Bits>& hash, const ChainConfig& config) {
        const Dataset d = make_dataset(X, std::nullopt, hash);
        const TripletSet T = to_triplets(triplets, d.size());
        py::gil_scoped_release release;
        return train_model(parse_model_kind(model), d, T, hash.has_value(), config);
      },
      py::arg("model"), py::arg("X"), py::arg("triplets"), py::arg("hash") = py::none(),
      py::arg("config") = ChainConfig{});

  m.def(
      "predict_codes",
      [](const Trace& trace, const Eigen::MatrixXd& X_train, const Eigen::MatrixXd& X_query, long sample) {
        return from_binary(predict_codes(trace, pick(trace, sample), X_train, X_query));
      },
      py::arg("trace"), py::arg("X_train"), py::arg("X_query"), py::arg("sample") = -1);

  m.def(
      "evaluate",
      [](const Trace& trace, const Eigen::MatrixXd& X_train, const std::vector<int>& y_train,
         const Eigen::MatrixXd& X_test, const std::vector<int>& y_test, const std::vector<std::size_t>& k_list,
         const std::string& mode, std::size_t num_samples, const std::optional<Bits>& hash_train,
         const std::optional<Bits>& hash_test) {
        if (mode != "last" && mode != "average") throw std::invalid_argument("mode must be 'last' or 'average'");
        const Dataset train = make_dataset(X_train, y_train, hash_train);
        const Dataset test = make_dataset(X_test, y_test, hash_test);
        const bool use_hash = hash_train.has_value();
        return report_dict(evaluate_trace(trace, train, test, k_list,
                                          mode == "last" ? EvalMode::last : EvalMode::average, num_samples,
                                          use_hash));
      },
      py::arg("trace"), py::arg("X_train"), py::arg("y_train"), py::arg("X_test"), py::arg("y_test"),
      py::arg("k_list") = kDefaultKList, py::arg("mode") = "last", py::arg("num_samples") = 50,
      py::arg("hash_train") = py::none(), py::arg("hash_test") = py::none(),
      "Hamming k-NN accuracy; returns {k: (mean, std)}.");

  m.def(
      "hamming",
      [](const Bits& a, const Bits& b) {
        const auto x = to_bits(a), y = to_bits(b);
        return hamming(x, y);
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "knn_classify",
      [](const Bits& query, const Bits& db, const std::vector<int>& labels, std::size_t k) {
        const auto q = to_bits(query);
        return knn_classify(q, CodeDatabase(to_binary(db), labels), k);
      },
      py::arg("query"), py::arg("db"), py::arg("labels"), py::arg("k") = 1);

  m.def(
      "triplet_satisfaction",
      [](const Bits& codes, const Indices& triplets) {
        const BinaryMatrix c = to_binary(codes);
        return triplet_satisfaction(c, to_triplets(triplets, c.rows()));
      },
      py::arg("codes"), py::arg("triplets"));
}
