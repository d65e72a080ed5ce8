#include "sibp/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace sibp {

using json = nlohmann::json;

std::size_t Dataset::num_classes() const {
  if (!labels || labels->empty()) return 0;
  return static_cast<std::size_t>(*std::max_element(labels->begin(), labels->end())) + 1;
}

Mixture draw_mixture(const SyntheticSpec& spec, RngStream& rng) {
  if (spec.num_classes == 0 || spec.dim == 0) {
    throw std::invalid_argument("draw_mixture: need at least one class and one dimension");
  }
  if (!(spec.mean_lo <= spec.mean_hi) || !(spec.std_lo >= 0.0 && spec.std_lo <= spec.std_hi)) {
    throw std::invalid_argument("draw_mixture: invalid ranges");
  }
  const auto C = static_cast<Eigen::Index>(spec.num_classes);
  const auto M = static_cast<Eigen::Index>(spec.dim);
  const auto draw_in = [&](double lo, double hi) { return lo == hi ? lo : rng.uniform(lo, hi); };
  Mixture mix;
  mix.means.resize(C, M);
  mix.stds.resize(C, M);
  for (Eigen::Index c = 0; c < C; ++c) {
    for (Eigen::Index m = 0; m < M; ++m) mix.means(c, m) = draw_in(spec.mean_lo, spec.mean_hi);
    for (Eigen::Index m = 0; m < M; ++m) mix.stds(c, m) = draw_in(spec.std_lo, spec.std_hi);
  }
  return mix;
}

Dataset sample_mixture(const Mixture& mixture, std::size_t num_points, RngStream& rng) {
  const auto C = static_cast<std::size_t>(mixture.means.rows());
  if (C == 0 || num_points < C) {
    throw std::invalid_argument("sample_mixture: need at least one point per class");
  }
  Dataset data;
  data.X.resize(static_cast<Eigen::Index>(num_points), mixture.means.cols());
  data.labels.emplace();
  std::size_t row = 0;
  for (std::size_t c = 0; c < C; ++c) {
    const std::size_t count = num_points / C + (c < num_points % C ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i, ++row) {
      for (Eigen::Index m = 0; m < mixture.means.cols(); ++m) {
        const auto cc = static_cast<Eigen::Index>(c);
        data.X(static_cast<Eigen::Index>(row), m) = mixture.means(cc, m) + mixture.stds(cc, m) * rng.normal();
      }
      data.labels->push_back(static_cast<int>(c));
    }
  }
  return data;
}

Dataset generate_synthetic(const SyntheticSpec& spec, RngStream& rng) {
  const Mixture mix = draw_mixture(spec, rng);
  return sample_mixture(mix, spec.num_points, rng);
}

namespace {

/// `count` draws from `pool` without replacement; once the pool is used up
/// it is reshuffled and drawn again.
std::vector<std::size_t> choose(std::vector<std::size_t> pool, std::size_t count, RngStream& rng) {
  std::vector<std::size_t> out;
  out.reserve(count);
  while (out.size() < count) {
    const std::size_t take = std::min(count - out.size(), pool.size());
    for (std::size_t a = 0; a < take; ++a) {
      const std::size_t remaining = pool.size() - a;
      const auto pick = a + static_cast<std::size_t>(rng.next_u64() % remaining);
      std::swap(pool[a], pool[pick]);
      out.push_back(pool[a]);
    }
  }
  return out;
}

}  // namespace

TripletSet generate_triplets(const std::vector<int>& labels, std::size_t L, RngStream& rng) {
  const std::size_t N = labels.size();
  std::vector<Triplet> triples;
  if (L == 0) return TripletSet(N, {});
  for (const int label : labels) {
    if (label < 0) throw std::invalid_argument("generate_triplets: labels must be non-negative");
  }
  triples.reserve(N * L);
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<std::size_t> same;
    std::vector<std::size_t> other;
    for (std::size_t j = 0; j < N; ++j) {
      if (j == i) continue;
      (labels[j] == labels[i] ? same : other).push_back(j);
    }
    if (same.empty()) {
      throw std::invalid_argument("generate_triplets: class " + std::to_string(labels[i]) +
                                  " has a single member, no neighbour exists");
    }
    if (other.empty()) throw std::invalid_argument("generate_triplets: need at least two classes");
    const auto js = choose(std::move(same), L, rng);
    const auto ls = choose(std::move(other), L, rng);
    for (std::size_t m = 0; m < L; ++m) triples.push_back({i, js[m], ls[m]});
  }
  return TripletSet(N, std::move(triples));
}

BinaryMatrix class_hash_fixture(const std::vector<int>& labels) {
  static const char* const kCodes[] = {"01101", "01101", "10101", "10101", "11000",
                                       "11000", "10010", "10010", "10010", "10010"};
  BinaryMatrix H(labels.size(), 5);
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 0 || labels[n] > 9) {
      throw std::invalid_argument("class_hash_fixture: labels must lie in 0..9");
    }
    for (std::size_t d = 0; d < 5; ++d) {
      if (kCodes[labels[n]][d] == '1') H.set(n, d, true);
    }
  }
  return H;
}

namespace {

struct Field {
  std::string_view text;
  std::size_t column;  // 1-based character position
};

std::vector<Field> split_fields(std::string_view line) {
  std::vector<Field> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? line.size() : comma;
    fields.push_back({line.substr(start, end - start), start + 1});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_number(const Field& f, std::size_t line, const char* what) {
  T value{};
  const char* begin = f.text.data();
  const char* end = begin + f.text.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && end[-1] == ' ') --end;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || begin == end) {
    throw ParseError(std::string("expected ") + what, line, f.column);
  }
  return value;
}

bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset " + path.string());
  std::string line;
  std::size_t line_no = 0;
  if (!next_content_line(in, line, line_no)) throw ParseError("empty dataset file", 1);
  const auto header = split_fields(line);
  if (header.size() != 4) throw ParseError("header must be N,M,has_labels,D", line_no);
  const auto N = parse_number<std::size_t>(header[0], line_no, "N");
  const auto M = parse_number<std::size_t>(header[1], line_no, "M");
  const auto has_labels = parse_number<int>(header[2], line_no, "0 or 1");
  const auto D = parse_number<std::size_t>(header[3], line_no, "D");
  if (has_labels != 0 && has_labels != 1) throw ParseError("has_labels must be 0 or 1", line_no, header[2].column);

  Dataset data;
  data.X.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(M));
  if (has_labels) data.labels.emplace(N, 0);
  if (D > 0) data.hash.emplace(N, D);
  const std::size_t width = M + static_cast<std::size_t>(has_labels) + D;
  for (std::size_t n = 0; n < N; ++n) {
    if (!next_content_line(in, line, line_no)) {
      throw ParseError("expected " + std::to_string(N) + " rows, found " + std::to_string(n),
                       line_no + 1);
    }
    const auto fields = split_fields(line);
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    for (std::size_t m = 0; m < M; ++m) {
      const double v = parse_number<double>(fields[m], line_no, "a number");
      if (!std::isfinite(v)) throw ParseError("non-finite value", line_no, fields[m].column);
      data.X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) = v;
    }
    std::size_t at = M;
    if (has_labels) {
      const int label = parse_number<int>(fields[at], line_no, "an integer label");
      if (label < 0) throw ParseError("labels must be non-negative", line_no, fields[at].column);
      (*data.labels)[n] = label;
      ++at;
    }
    for (std::size_t d = 0; d < D; ++d, ++at) {
      const int bit = parse_number<int>(fields[at], line_no, "a hash bit");
      if (bit != 0 && bit != 1) throw ParseError("hash bits must be 0 or 1", line_no, fields[at].column);
      if (bit) data.hash->set(n, d, true);
    }
  }
  if (next_content_line(in, line, line_no)) throw ParseError("unexpected extra row", line_no);
  return data;
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  const std::size_t N = data.size();
  if (data.labels && data.labels->size() != N) throw std::invalid_argument("write_dataset: label count mismatch");
  if (data.hash && data.hash->rows() != N) throw std::invalid_argument("write_dataset: hash row mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset " + path.string());
  const std::size_t D = data.hash ? data.hash->cols() : 0;
  out << N << ',' << data.dim() << ',' << (data.labels ? 1 : 0) << ',' << D << '\n';
  char buf[40];
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t m = 0; m < data.dim(); ++m) {
      std::snprintf(buf, sizeof buf, "%.17g",
                    data.X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)));
      if (m > 0) out << ',';
      out << buf;
    }
    if (data.labels) out << ',' << (*data.labels)[n];
    for (std::size_t d = 0; d < D; ++d) out << ',' << static_cast<int>((*data.hash)(n, d));
    out << '\n';
  }
  if (!out) throw std::runtime_error("error writing dataset " + path.string());
}

BinaryMatrix read_codes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open code file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  if (!next_content_line(in, line, line_no)) throw ParseError("empty code file", 1);
  const auto header = split_fields(line);
  if (header.size() != 2) throw ParseError("header must be N,K", line_no);
  const auto N = parse_number<std::size_t>(header[0], line_no, "N");
  const auto K = parse_number<std::size_t>(header[1], line_no, "K");
  BinaryMatrix codes(N, K);
  for (std::size_t n = 0; n < N; ++n) {
    if (!std::getline(in, line)) throw ParseError("missing code rows", line_no + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() != K) throw ParseError("expected " + std::to_string(K) + " bits", line_no);
    for (std::size_t k = 0; k < K; ++k) {
      if (line[k] != '0' && line[k] != '1') throw ParseError("expected '0' or '1'", line_no, k + 1);
      if (line[k] == '1') codes.set(n, k, true);
    }
  }
  return codes;
}

void write_codes(const BinaryMatrix& codes, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write codes " + path.string());
  out << codes.rows() << ',' << codes.cols() << '\n';
  std::string row(codes.cols(), '0');
  for (std::size_t n = 0; n < codes.rows(); ++n) {
    for (std::size_t k = 0; k < codes.cols(); ++k) row[k] = codes(n, k) ? '1' : '0';
    out << row << '\n';
  }
  if (!out) throw std::runtime_error("error writing codes " + path.string());
}

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

double to_number(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

json rows_json(const BinaryMatrix& Z) {
  json rows = json::array();
  std::string row(Z.cols(), '0');
  for (std::size_t n = 0; n < Z.rows(); ++n) {
    for (std::size_t k = 0; k < Z.cols(); ++k) row[k] = Z(n, k) ? '1' : '0';
    rows.push_back(row);
  }
  return {{"rows", Z.rows()}, {"cols", Z.cols()}, {"bits", rows}};
}

BinaryMatrix rows_from_json(const json& j) {
  const auto N = j.at("rows").get<std::size_t>();
  const auto K = j.at("cols").get<std::size_t>();
  const auto& bits = j.at("bits");
  if (bits.size() != N) throw std::invalid_argument("row count mismatch");
  BinaryMatrix Z(N, K);
  for (std::size_t n = 0; n < N; ++n) {
    const auto row = bits[n].get<std::string>();
    if (row.size() != K) throw std::invalid_argument("row width mismatch");
    for (std::size_t k = 0; k < K; ++k) {
      if (row[k] == '1') {
        Z.set(n, k, true);
      } else if (row[k] != '0') {
        throw std::invalid_argument("bits must be '0' or '1'");
      }
    }
  }
  return Z;
}

json matrix_json(const Eigen::MatrixXd& A) {
  json data = json::array();
  for (Eigen::Index c = 0; c < A.cols(); ++c) {
    for (Eigen::Index r = 0; r < A.rows(); ++r) data.push_back(A(r, c));
  }
  return {{"rows", A.rows()}, {"cols", A.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto R = j.at("rows").get<Eigen::Index>();
  const auto C = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != R * C) throw std::invalid_argument("matrix size mismatch");
  Eigen::MatrixXd A(R, C);
  std::size_t i = 0;
  for (Eigen::Index c = 0; c < C; ++c) {
    for (Eigen::Index r = 0; r < R; ++r) A(r, c) = data[i++].get<double>();
  }
  return A;
}

json row_vector_json(const Eigen::RowVectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::RowVectorXd row_vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  Eigen::RowVectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

json config_json(const ChainConfig& c) {
  const auto& h = c.hyper;
  return {{"sweeps", c.sweeps},
          {"burn_in", c.burn_in},
          {"thin", c.thin},
          {"seed", c.seed},
          {"preference_noise", c.preference_noise},
          {"max_features", c.max_features},
          {"init_features", c.init_features},
          {"update_weights", c.update_weights},
          {"update_hyperparameters", c.update_hyperparameters},
          {"update_alpha", c.update_alpha},
          {"update_sticks", c.update_sticks},
          {"update_regression", c.update_regression},
          {"learn_sigma_g", c.learn_sigma_g},
          {"fixed_truncation", c.fixed_truncation},
          {"weight_prior", {h.weight_prior.shape, h.weight_prior.rate}},
          {"alpha_prior", {h.alpha_prior.shape, h.alpha_prior.rate}},
          {"sigma_g", h.sigma_g},
          {"sigma_x_init", h.sigma_x_init},
          {"sigma_v_init", h.sigma_v_init},
          {"alpha_init", h.alpha_init},
          {"scale_range", {h.scale_lo, h.scale_hi}}};
}

ChainConfig config_from_json(const json& j) {
  ChainConfig c;
  c.sweeps = j.at("sweeps").get<std::size_t>();
  c.burn_in = j.at("burn_in").get<std::size_t>();
  c.thin = j.at("thin").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.preference_noise = j.at("preference_noise").get<double>();
  c.max_features = j.at("max_features").get<std::size_t>();
  c.init_features = j.at("init_features").get<std::size_t>();
  c.update_weights = j.at("update_weights").get<bool>();
  c.update_hyperparameters = j.at("update_hyperparameters").get<bool>();
  c.update_alpha = j.at("update_alpha").get<bool>();
  c.update_sticks = j.at("update_sticks").get<bool>();
  c.update_regression = j.at("update_regression").get<bool>();
  c.learn_sigma_g = j.at("learn_sigma_g").get<bool>();
  c.fixed_truncation = j.at("fixed_truncation").get<bool>();
  auto& h = c.hyper;
  h.weight_prior = {j.at("weight_prior")[0].get<double>(), j.at("weight_prior")[1].get<double>()};
  h.alpha_prior = {j.at("alpha_prior")[0].get<double>(), j.at("alpha_prior")[1].get<double>()};
  h.sigma_g = j.at("sigma_g").get<double>();
  h.sigma_x_init = j.at("sigma_x_init").get<double>();
  h.sigma_v_init = j.at("sigma_v_init").get<double>();
  h.alpha_init = j.at("alpha_init").get<double>();
  h.scale_lo = j.at("scale_range")[0].get<double>();
  h.scale_hi = j.at("scale_range")[1].get<double>();
  return c;
}

json header_json(const Trace& trace) {
  return {{"format", "sibp-trace"},
          {"version", kTraceVersion},
          {"model", to_string(trace.model)},
          {"seed", trace.config.seed},
          {"config", config_json(trace.config)},
          {"preprocessing",
           {{"mean", row_vector_json(trace.preprocessing.mean)},
            {"scale", row_vector_json(trace.preprocessing.scale)}}}};
}

json sample_json(const ModelSample& s) {
  json j = {{"sweep", s.sweep},
            {"log_posterior", number(s.log_posterior)},
            {"alpha", s.alpha},
            {"Z", rows_json(s.Z)},
            {"w", s.w},
            {"wH", s.wH}};
  if (!s.sticks.empty() || s.G.size() > 0 || s.sigma_g > 0.0) {
    j["sticks"] = s.sticks;
    j["G"] = matrix_json(s.G);
    j["sigma_g"] = s.sigma_g;
  } else {
    j["sigma_x"] = s.sigma_x;
    j["sigma_v"] = s.sigma_v;
  }
  return j;
}

ModelSample sample_from_json(const json& j) {
  ModelSample s;
  s.sweep = j.at("sweep").get<std::size_t>();
  s.log_posterior = to_number(j.at("log_posterior"));
  s.alpha = j.at("alpha").get<double>();
  s.Z = rows_from_json(j.at("Z"));
  s.w = j.at("w").get<std::vector<double>>();
  s.wH = j.at("wH").get<std::vector<double>>();
  if (j.contains("sticks")) {
    s.sticks = j.at("sticks").get<std::vector<double>>();
    s.G = matrix_from_json(j.at("G"));
    s.sigma_g = j.at("sigma_g").get<double>();
  } else {
    s.sigma_x = j.at("sigma_x").get<double>();
    s.sigma_v = j.at("sigma_v").get<double>();
  }
  if (s.w.size() != s.Z.cols()) throw std::invalid_argument("w length does not match Z");
  return s;
}

}  // namespace

TraceWriter::TraceWriter(const std::filesystem::path& path, const Trace& meta)
    : out_(path), path_(path) {
  if (!out_) throw std::runtime_error("cannot write trace " + path.string());
  out_ << header_json(meta).dump() << '\n';
  out_.flush();
}

void TraceWriter::append(const ModelSample& sample) {
  out_ << sample_json(sample).dump() << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("error writing trace " + path_.string());
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  TraceWriter writer(path, trace);
  for (const auto& s : trace.samples) writer.append(s);
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace " + path.string());
  std::string line;
  std::size_t line_no = 0;
  Trace trace;
  if (!std::getline(in, line)) throw ParseError("empty trace file", 1);
  ++line_no;
  try {
    const json header = json::parse(line);
    if (header.at("format").get<std::string>() != "sibp-trace") {
      throw ParseError("not a trace file", line_no);
    }
    const int version = header.at("version").get<int>();
    if (version != kTraceVersion) {
      throw ParseError("unsupported trace version " + std::to_string(version), line_no);
    }
    trace.model = parse_model_kind(header.at("model").get<std::string>());
    trace.config = config_from_json(header.at("config"));
    trace.preprocessing.mean = row_vector_from_json(header.at("preprocessing").at("mean"));
    trace.preprocessing.scale = row_vector_from_json(header.at("preprocessing").at("scale"));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad trace header: ") + e.what(), line_no);
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const bool last = in.peek() == std::char_traits<char>::eof();
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      if (last) {
        throw TruncatedTraceError("truncated final trace record", line_no, std::move(trace));
      }
      throw ParseError(std::string("malformed trace record: ") + e.what(), line_no);
    }
    try {
      ModelSample s = sample_from_json(record);
      if (!trace.samples.empty() && s.sweep <= trace.samples.back().sweep) {
        throw std::invalid_argument("sweep indices must increase");
      }
      trace.samples.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad trace record: ") + e.what(), line_no);
    }
  }
  return trace;
}

}  // namespace sibp
