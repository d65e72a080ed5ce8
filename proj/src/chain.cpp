#include "sibp/chain.hpp"

#include <stdexcept>

namespace sibp {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::gaussian ? "gaussian" : "probit";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "gaussian") return ModelKind::gaussian;
  if (name == "probit") return ModelKind::probit;
  throw std::invalid_argument("unknown model '" + name + "' (expected gaussian or probit)");
}

void ChainConfig::validate() const {
  if (thin == 0) throw std::invalid_argument("thin must be >= 1");
  if (burn_in > sweeps) throw std::invalid_argument("burn-in exceeds the number of sweeps");
  if (!(preference_noise >= 0.0 && preference_noise < 1.0)) {
    throw std::invalid_argument("preference noise must lie in [0, 1)");
  }
  if (max_features == 0) throw std::invalid_argument("max features must be >= 1");
  if (init_features > max_features) {
    throw std::invalid_argument("initial features exceed the feature cap");
  }
  const auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be > 0");
  };
  positive(hyper.weight_prior.shape, "weight prior shape");
  positive(hyper.weight_prior.rate, "weight prior rate");
  positive(hyper.alpha_prior.shape, "alpha prior shape");
  positive(hyper.alpha_prior.rate, "alpha prior rate");
  positive(hyper.sigma_g, "sigma_g");
  positive(hyper.sigma_x_init, "sigma_x");
  positive(hyper.sigma_v_init, "sigma_v");
  positive(hyper.alpha_init, "alpha");
  if (!(hyper.scale_lo > 0.0 && hyper.scale_lo < hyper.scale_hi)) {
    throw std::invalid_argument("scale prior bounds must satisfy 0 < lo < hi");
  }
}

Standardization Standardization::center(const Eigen::MatrixXd& X) {
  Standardization s;
  s.mean = X.rows() > 0 ? Eigen::RowVectorXd(X.colwise().mean())
                        : Eigen::RowVectorXd::Zero(X.cols());
  s.scale = Eigen::RowVectorXd::Ones(X.cols());
  return s;
}

Standardization Standardization::standardize(const Eigen::MatrixXd& X) {
  Standardization s = center(X);
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double var = X.rows() > 1 ? (X.col(c).array() - s.mean[c]).square().sum() /
                                          static_cast<double>(X.rows() - 1)
                                    : 0.0;
    s.scale[c] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& X) const {
  if (mean.size() == 0) return X;
  if (X.cols() != mean.size()) {
    throw std::invalid_argument("Standardization: dimension mismatch");
  }
  return (X.rowwise() - mean).array().rowwise() / scale.array();
}

Eigen::VectorXd Standardization::apply(const Eigen::VectorXd& x) const {
  if (mean.size() == 0) return x;
  if (x.size() != mean.size()) throw std::invalid_argument("Standardization: dimension mismatch");
  return (x.array() - mean.transpose().array()) / scale.transpose().array();
}

std::vector<const ModelSample*> Trace::post_burn_in() const {
  std::vector<const ModelSample*> out;
  for (const auto& s : samples) {
    if (s.sweep > config.burn_in) out.push_back(&s);
  }
  return out;
}

}  // namespace sibp
