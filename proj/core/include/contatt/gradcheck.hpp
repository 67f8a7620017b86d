#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "contatt/attention.hpp"

namespace contatt {

struct GradcheckOptions {
  double step = 1e-5;
  std::uint64_t seed = 0;
  bool check_heads = true;
  bool check_value = true;
  bool check_features = true;
};

struct GradcheckReport {
  double max_rel_err = 0.0;
  std::string location;
  int checked = 0;
  /// Probes whose +/- step changed a sparse head's support structure.
  std::vector<std::string> skipped;
};

/// Central-difference check of MultiHeadAttention::backward on the loss
/// L(c) = r.c + 0.5 |c|^2 with r drawn from `seed`. Relative error per
/// parameter is |analytic - fd| / (|analytic| + |fd| + 1e-12). Probes that
/// move a support boundary across a sign flip are skipped and listed.
GradcheckReport fd_gradcheck(MultiHeadAttention& layer, const Eigen::VectorXd& v, const ValueParams& value,
                             const GradcheckOptions& options = {});

} // namespace contatt
