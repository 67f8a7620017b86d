#include "contatt/attention.hpp"

#include <cmath>
#include <string>

#include "contatt/errors.hpp"
#include "contatt/gmm_attention.hpp"

namespace contatt {
namespace {

Eigen::VectorXd node_weights_times_pdf(const AttentionDensity& d) {
  const QuadratureRule& rule = d.rule();
  const auto& pdf = d.node_pdf();
  Eigen::VectorXd wp(static_cast<Eigen::Index>(rule.size()));
  for (std::size_t j = 0; j < rule.size(); ++j) {
    wp[static_cast<Eigen::Index>(j)] = rule.weights[j] * pdf[j];
  }
  return wp;
}

/// w_j * exp_{2-a}(f_tilde_j)^{2-a}: the unnormalized escort weights of a sparse density.
Eigen::VectorXd escort_weights(const DeformedDensity& d) {
  const double beta = d.alpha.beta();
  Eigen::VectorXd s(static_cast<Eigen::Index>(d.rule.size()));
  for (std::size_t j = 0; j < d.rule.size(); ++j) {
    const double u = d.node_unnormalized[j];
    const double escort = u > 0.0 ? (beta == 0.0 ? 1.0 : std::pow(u, beta)) : 0.0;
    s[static_cast<Eigen::Index>(j)] = d.rule.weights[j] * escort;
  }
  return s;
}

struct MixtureParams {
  GaussianMixtureDensity mixture;
  std::vector<double> sigmas;
};

MixtureParams mixture_from_raw(const Eigen::VectorXd& raw, int K, const Interval& domain) {
  MixtureParams out;
  double shift = raw.head(K).maxCoeff();
  double total = 0.0;
  out.mixture.weights.resize(K);
  for (int k = 0; k < K; ++k) {
    out.mixture.weights[k] = std::exp(raw[k] - shift);
    total += out.mixture.weights[k];
  }
  for (int k = 0; k < K; ++k) {
    out.mixture.weights[k] /= total;
    out.mixture.means.push_back(location_from_raw(raw[K + k], domain));
    const double sigma = softplus(raw[2 * K + k]);
    out.sigmas.push_back(sigma);
    out.mixture.variances.push_back(sigma * sigma);
  }
  return out;
}

} // namespace

double softplus(double x) noexcept { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double sigmoid(double x) noexcept {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

int AttentionConfig::raw_size() const {
  switch (family) {
  case Family::kernel_exp:
  case Family::kernel_deformed:
    return static_cast<int>(inducing_points.size());
  case Family::continuous_softmax:
  case Family::continuous_sparsemax:
    return 2;
  case Family::gaussian_mixture:
    return 3 * mixture_components;
  }
  return 0;
}

void AttentionConfig::validate() const {
  if (family == Family::kernel_exp || family == Family::kernel_deformed) {
    if (inducing_points.empty()) {
      throw ArgumentError("kernel attention needs inducing points");
    }
    if (!(bandwidth > 0.0)) {
      throw ArgumentError("kernel bandwidth must be positive");
    }
  }
  if (is_sparse_family(family)) {
    AlphaParam checked(family == Family::continuous_sparsemax ? 2.0 : alpha);
    (void)checked;
  }
  if (family == Family::gaussian_mixture && mixture_components < 1) {
    throw ArgumentError("mixture attention needs at least one component");
  }
  if (panels < 1 || nodes_per_panel < 2) {
    throw ArgumentError("attention quadrature needs panels >= 1 and nodes_per_panel >= 2");
  }
}

double location_from_raw(double raw, const Interval& domain) noexcept {
  return domain.lo + domain.length() * sigmoid(raw);
}

AttentionDensity density_from_raw(const Eigen::VectorXd& raw, const AttentionConfig& config) {
  if (raw.size() != config.raw_size()) {
    throw ArgumentError("raw head vector has length " + std::to_string(raw.size()) + ", expected " +
                        std::to_string(config.raw_size()));
  }
  if (!raw.allFinite()) {
    throw NumericError("attention head emitted non-finite parameters");
  }
  const QuadratureRule rule = build_rule(config.base, config.panels, config.nodes_per_panel);
  switch (config.family) {
  case Family::kernel_exp: {
    RkhsFunction f({raw.data(), raw.data() + raw.size()}, config.inducing_points,
                   Kernel::gaussian_rbf(config.bandwidth));
    return {Family::kernel_exp, normalize_kexp(f, config.base, rule, config.normalize)};
  }
  case Family::kernel_deformed: {
    RkhsFunction f({raw.data(), raw.data() + raw.size()}, config.inducing_points,
                   Kernel::gaussian_rbf(config.bandwidth));
    return {Family::kernel_deformed,
            normalize_kdeformed(f, AlphaParam(config.alpha), config.base, rule, config.normalize)};
  }
  case Family::continuous_softmax: {
    const double mu = location_from_raw(raw[0], config.base.domain());
    const double sigma = softplus(raw[1]);
    const double var = sigma * sigma;
    return softmax_attention(cts_softmax_from_theta(mu / var, -0.5 / var), rule, config.normalize);
  }
  case Family::continuous_sparsemax:
    return {Family::continuous_sparsemax,
            cts_sparsemax_from_moments(location_from_raw(raw[0], config.base.domain()), softplus(raw[1]), config.base, rule, config.normalize)};
  case Family::gaussian_mixture:
    return mixture_attention(mixture_from_raw(raw, config.mixture_components, config.base.domain()).mixture, rule, config.normalize);
  }
  throw ArgumentError("unknown attention family");
}

AttentionDensity head_density(const Eigen::VectorXd& v, const HeadParams& params, const AttentionConfig& config) {
  if (params.W.cols() != v.size() || params.W.rows() != params.b.size()) {
    throw ArgumentError("head emitter shape does not match the feature vector");
  }
  return density_from_raw(params.W * v + params.b, config);
}

Eigen::MatrixXd score_jacobian(const Eigen::VectorXd& raw, const AttentionConfig& config, const QuadratureRule& rule) {
  const auto J = static_cast<Eigen::Index>(rule.size());
  Eigen::MatrixXd D(config.raw_size(), J);
  switch (config.family) {
  case Family::kernel_exp:
  case Family::kernel_deformed: {
    const Kernel kernel = Kernel::gaussian_rbf(config.bandwidth);
    for (Eigen::Index j = 0; j < J; ++j) {
      for (std::size_t i = 0; i < config.inducing_points.size(); ++i) {
        D(static_cast<Eigen::Index>(i), j) = kernel(rule.nodes[j], config.inducing_points[i]);
      }
    }
    break;
  }
  case Family::continuous_softmax:
  case Family::continuous_sparsemax: {
    const Interval dom = config.base.domain();
    const double mu = location_from_raw(raw[0], dom);
    const double dmu = dom.length() * sigmoid(raw[0]) * (1.0 - sigmoid(raw[0]));
    const double sigma = softplus(raw[1]);
    const double dsigma = sigmoid(raw[1]);
    const bool dense = config.family == Family::continuous_softmax;
    for (Eigen::Index j = 0; j < J; ++j) {
      const double d = rule.nodes[j] - mu;
      D(0, j) = d / (sigma * sigma) * dmu;
      // log N(t; mu, sigma^2) has the extra -log(sigma) term.
      const double dscore = d * d / (sigma * sigma * sigma) - (dense ? 1.0 / sigma : 0.0);
      D(1, j) = dscore * dsigma;
    }
    break;
  }
  case Family::gaussian_mixture: {
    const int K = config.mixture_components;
    const Interval dom = config.base.domain();
    const MixtureParams params = mixture_from_raw(raw, K, dom);
    const auto resp = responsibilities(params.mixture, rule.nodes);
    for (Eigen::Index j = 0; j < J; ++j) {
      const double t = rule.nodes[j];
      for (int k = 0; k < K; ++k) {
        const double r = resp[j][k];
        const double sigma = params.sigmas[k];
        const double d = t - params.mixture.means[k];
        D(k, j) = r - params.mixture.weights[k];
        const double s = sigmoid(raw[K + k]);
        D(K + k, j) = r * d / (sigma * sigma) * dom.length() * s * (1.0 - s);
        D(2 * K + k, j) = r * (d * d / (sigma * sigma * sigma) - 1.0 / sigma) * sigmoid(raw[2 * K + k]);
      }
    }
    break;
  }
  }
  return D;
}

double grad_log_normalizer(const AttentionDensity& d, const RealFn& g) {
  if (d.as_exp() != nullptr) {
    return expectation(d, g);
  }
  const DeformedDensity& body = *d.as_deformed();
  const Eigen::VectorXd s = escort_weights(body);
  std::vector<double> num(body.rule.size());
  std::vector<double> den(body.rule.size());
  for (std::size_t j = 0; j < body.rule.size(); ++j) {
    den[j] = s[static_cast<Eigen::Index>(j)];
    num[j] = den[j] * g(body.rule.nodes[j]);
  }
  const double mass = pairwise_sum(den);
  if (!(mass > 0.0)) {
    throw DegenerateDensityError("escort distribution has zero mass");
  }
  return pairwise_sum(num) / mass;
}

MultiHeadAttention::MultiHeadAttention(AttentionConfig config, BasisSet basis, std::vector<HeadParams> heads)
    : config_(std::move(config)), basis_(std::move(basis)), heads_(std::move(heads)) {
  config_.validate();
  if (heads_.empty()) {
    throw ArgumentError("attention needs at least one head");
  }
  for (const HeadParams& h : heads_) {
    if (h.W.rows() != config_.raw_size() || h.b.size() != config_.raw_size()) {
      throw ArgumentError("head emitter emits " + std::to_string(h.W.rows()) + " values, family needs " +
                          std::to_string(config_.raw_size()));
    }
    if (h.W.cols() != heads_.front().W.cols()) {
      throw ArgumentError("all heads must read the same feature width");
    }
  }
}

std::vector<HeadParams>& MultiHeadAttention::mutable_heads() noexcept {
  cache_.reset();
  return heads_;
}

ContextVector MultiHeadAttention::forward(const Eigen::VectorXd& v, const ValueParams& value) {
  if (value.B.cols() != basis_.size()) {
    throw ArgumentError("value matrix has " + std::to_string(value.B.cols()) + " columns for " +
                        std::to_string(basis_.size()) + " basis functions");
  }
  Cache cache;
  cache.v = v;
  cache.B = value.B;
  const int O = static_cast<int>(value.B.rows());
  ContextVector out;
  out.heads = head_count();
  out.dims = O;
  out.c.resize(static_cast<Eigen::Index>(head_count()) * O);
  for (int h = 0; h < head_count(); ++h) {
    const HeadParams& params = heads_[h];
    if (params.W.cols() != v.size()) {
      throw ArgumentError("feature vector width does not match the head emitters");
    }
    Eigen::VectorXd raw = params.W * v + params.b;
    AttentionDensity density = density_from_raw(raw, config_);
    Eigen::MatrixXd psi = basis_.design(density.rule().nodes);
    Eigen::VectorXd m = psi * node_weights_times_pdf(density);
    out.c.segment(static_cast<Eigen::Index>(h) * O, O) = value.B * m;
    cache.heads.push_back({std::move(density), std::move(raw), std::move(psi), std::move(m)});
  }
  if (!out.c.allFinite()) {
    throw NumericError("context vector is not finite");
  }
  cache_ = std::move(cache);
  return out;
}

GradientBundle MultiHeadAttention::backward(const Eigen::VectorXd& upstream) const {
  if (!cache_) {
    throw StateError("backward called without a cached forward pass");
  }
  const Cache& cache = *cache_;
  const auto O = cache.B.rows();
  if (upstream.size() != O * head_count()) {
    throw ArgumentError("upstream gradient has the wrong length");
  }
  GradientBundle grads;
  grads.d_B = Eigen::MatrixXd::Zero(cache.B.rows(), cache.B.cols());
  grads.d_v = Eigen::VectorXd::Zero(cache.v.size());
  for (int h = 0; h < head_count(); ++h) {
    const HeadCache& hc = cache.heads[h];
    const Eigen::VectorXd g = upstream.segment(static_cast<Eigen::Index>(h) * O, O);
    grads.d_B += g * hc.m.transpose();

    const Eigen::VectorXd dm = cache.B.transpose() * g;
    const Eigen::VectorXd a = hc.psi.transpose() * dm;
    const double a_bar = dm.dot(hc.m);
    Eigen::VectorXd coef;
    if (hc.density.as_exp() != nullptr) {
      // d m / d u_k = Cov_p(Psi, d f / d u_k)
      coef = node_weights_times_pdf(hc.density).cwiseProduct((a.array() - a_bar).matrix());
    } else {
      // d m / d u_k = (1/Z) int Psi s D_k dQ - m (1/Z) int s D_k dQ, s = p_tilde^{2-a}
      const DeformedDensity& body = *hc.density.as_deformed();
      coef = escort_weights(body).cwiseProduct((a.array() - a_bar).matrix()) / body.Z;
    }
    const Eigen::MatrixXd D = score_jacobian(hc.raw, config_, hc.density.rule());
    Eigen::VectorXd d_raw = D * coef;
    grads.d_W.push_back(d_raw * cache.v.transpose());
    grads.d_b.push_back(d_raw);
    grads.d_v += heads_[h].W.transpose() * d_raw;
    grads.d_raw.push_back(std::move(d_raw));
  }
  return grads;
}

std::vector<AttentionDensity> MultiHeadAttention::cached_densities() const {
  if (!cache_) {
    throw StateError("no cached forward pass");
  }
  std::vector<AttentionDensity> out;
  for (const HeadCache& hc : cache_->heads) {
    out.push_back(hc.density);
  }
  return out;
}

std::vector<Eigen::VectorXd> MultiHeadAttention::cached_basis_expectations() const {
  if (!cache_) {
    throw StateError("no cached forward pass");
  }
  std::vector<Eigen::VectorXd> out;
  for (const HeadCache& hc : cache_->heads) {
    out.push_back(hc.m);
  }
  return out;
}

ContextVector forward_context(const Eigen::VectorXd& v, const std::vector<HeadParams>& heads,
                              const ValueParams& value, const BasisSet& basis, const AttentionConfig& config) {
  MultiHeadAttention layer(config, basis, heads);
  return layer.forward(v, value);
}

} // namespace contatt
