#pragma once

// Scalar deformed-exponential algebra for the sparse range 1 < alpha <= 2.
//
// exp_beta(x) = [1 + (1 - beta) x]_+^{1/(1 - beta)}   (beta < 1)
// log_beta(x) = (x^{1 - beta} - 1) / (1 - beta)        (beta != 1, x > 0)
//
// A deformed density uses exp_{2 - alpha}; its log-normalizer is log_alpha(Z).

namespace contatt {

/// Entropic index alpha in (1, 2]. beta() = 2 - alpha is the matching
/// deformed-exponential index.
class AlphaParam {
public:
  explicit AlphaParam(double alpha);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return 2.0 - alpha_; }

  friend bool operator==(const AlphaParam&, const AlphaParam&) = default;

private:
  double alpha_;
};

/// beta-exponential. For beta < 1 the clamp is an explicit comparison, so
/// any argument with 1 + (1 - beta) x <= 0 yields a literal 0.0.
double beta_exp(double x, double beta) noexcept;

/// beta-logarithm. Throws ArgumentError for x <= 0.
double beta_log(double x, double beta);

/// d/dx exp_beta(x) = exp_beta(x)^beta (0 outside the support when beta < 1).
double beta_exp_derivative(double x, double beta) noexcept;

} // namespace contatt
