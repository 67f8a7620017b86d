#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "contatt/densities.hpp"
#include "contatt/value_function.hpp"

namespace contatt {

/// Static configuration shared by every head of a multi-head attention layer.
struct AttentionConfig {
  Family family = Family::kernel_deformed;
  double alpha = 2.0;
  BaseDensity base = BaseDensity::uniform(0.0, 1.0);
  /// Kernel families: inducing locations and RBF bandwidth.
  std::vector<double> inducing_points;
  double bandwidth = 0.1;
  /// Mixture head: number of components.
  int mixture_components = 2;
  int panels = 64;
  int nodes_per_panel = 8;
  /// Non-adaptive by default: the rule stays fixed across forward passes.
  NormalizeOptions normalize{false, 1e-8, 1 << 14};

  /// Length of the raw vector u = W v + b each head emits.
  int raw_size() const;
  void validate() const;
};

/// Affine emitter u = W v + b. Interpretation of u by family:
///   kernel_exp, kernel_deformed: u = gamma (one coefficient per inducing point)
///   continuous_softmax, continuous_sparsemax: u = (m, s), mu = lo + (hi - lo) sigmoid(m),
///     sigma = softplus(s); the location stays inside the base domain so a
///     sparse head never loses its whole support
///   gaussian_mixture: u = (logits[K], m[K], s[K]), pi = softmax(logits),
///     mu_k = lo + (hi - lo) sigmoid(m_k), sigma = softplus(s)
struct HeadParams {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
};

double softplus(double x) noexcept;
double sigmoid(double x) noexcept;
/// Location of a single-bump head: lo + (hi - lo) sigmoid(raw).
double location_from_raw(double raw, const Interval& domain) noexcept;

/// Density for an already-emitted raw vector.
AttentionDensity density_from_raw(const Eigen::VectorXd& raw, const AttentionConfig& config);

AttentionDensity head_density(const Eigen::VectorXd& v, const HeadParams& params, const AttentionConfig& config);

/// Derivative of the density's score (f for dense, f_tilde for sparse) with
/// respect to each raw parameter, at every node of `rule`: raw_size x J.
Eigen::MatrixXd score_jacobian(const Eigen::VectorXd& raw, const AttentionConfig& config, const QuadratureRule& rule);

/// Concatenation over heads of c_h = B E_{p_h}[Psi(T)] in R^O.
struct ContextVector {
  Eigen::VectorXd c;
  int heads = 0;
  int dims = 0;

  Eigen::VectorXd block(int h) const { return c.segment(static_cast<Eigen::Index>(h) * dims, dims); }
};

struct GradientBundle {
  /// dL/du per head (dL/dgamma for kernel heads).
  std::vector<Eigen::VectorXd> d_raw;
  std::vector<Eigen::MatrixXd> d_W;
  std::vector<Eigen::VectorXd> d_b;
  Eigen::MatrixXd d_B;
  Eigen::VectorXd d_v;
};

/// Frechet derivative of the log-normalizer in direction g: E_p[g] for dense
/// densities, the escort expectation int p^{2-a} g dQ / int p^{2-a} dQ for sparse ones.
double grad_log_normalizer(const AttentionDensity& d, const RealFn& g);

/// Multi-head continuous attention with one shared value function. forward()
/// caches what backward() needs; the quadrature rule is held fixed when
/// differentiating.
class MultiHeadAttention {
public:
  MultiHeadAttention(AttentionConfig config, BasisSet basis, std::vector<HeadParams> heads);

  const AttentionConfig& config() const noexcept { return config_; }
  const BasisSet& basis() const noexcept { return basis_; }
  const std::vector<HeadParams>& heads() const noexcept { return heads_; }
  /// Mutable access invalidates the forward cache.
  std::vector<HeadParams>& mutable_heads() noexcept;
  int head_count() const noexcept { return static_cast<int>(heads_.size()); }

  ContextVector forward(const Eigen::VectorXd& v, const ValueParams& value);
  /// Needs a preceding forward(); throws StateError otherwise.
  GradientBundle backward(const Eigen::VectorXd& upstream) const;

  bool has_cache() const noexcept { return cache_.has_value(); }
  void clear_cache() noexcept { cache_.reset(); }
  /// Densities of the last forward pass.
  std::vector<AttentionDensity> cached_densities() const;
  /// E_{p_h}[Psi] of the last forward pass.
  std::vector<Eigen::VectorXd> cached_basis_expectations() const;

private:
  struct HeadCache {
    AttentionDensity density;
    Eigen::VectorXd raw;
    Eigen::MatrixXd psi;  // N x J basis values at the density's nodes
    Eigen::VectorXd m;    // E_p[Psi]
  };
  struct Cache {
    Eigen::VectorXd v;
    Eigen::MatrixXd B;
    std::vector<HeadCache> heads;
  };

  AttentionConfig config_;
  BasisSet basis_;
  std::vector<HeadParams> heads_;
  std::optional<Cache> cache_;
};

/// Stateless forward: context only.
ContextVector forward_context(const Eigen::VectorXd& v, const std::vector<HeadParams>& heads,
                              const ValueParams& value, const BasisSet& basis, const AttentionConfig& config);

} // namespace contatt
