#include "contatt/gradcheck.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace contatt {
namespace {

struct Evaluation {
  double loss = 0.0;
  // Per sparse head: interval count plus which ends sit on the domain edge.
  std::vector<std::vector<int>> support_shape;
};

std::vector<int> shape_of(const SupportSet& support, const Interval& domain) {
  std::vector<int> shape{static_cast<int>(support.size())};
  for (const Interval& iv : support.intervals) {
    shape.push_back(iv.lo <= domain.lo ? 1 : 0);
    shape.push_back(iv.hi >= domain.hi ? 1 : 0);
  }
  return shape;
}

Evaluation evaluate(MultiHeadAttention& layer, const Eigen::VectorXd& v, const ValueParams& value,
                    const Eigen::VectorXd& r) {
  const ContextVector ctx = layer.forward(v, value);
  Evaluation e;
  e.loss = r.dot(ctx.c) + 0.5 * ctx.c.squaredNorm();
  for (const AttentionDensity& d : layer.cached_densities()) {
    if (const auto* body = d.as_deformed()) {
      e.support_shape.push_back(shape_of(body->support, body->rule.domain));
    }
  }
  return e;
}

std::string name(const std::string& param, int head, Eigen::Index row, Eigen::Index col = -1) {
  std::ostringstream os;
  os << param;
  if (head >= 0) {
    os << "[head " << head << "]";
  }
  os << "(" << row;
  if (col >= 0) {
    os << "," << col;
  }
  os << ")";
  return os.str();
}

} // namespace

GradcheckReport fd_gradcheck(MultiHeadAttention& layer, const Eigen::VectorXd& v, const ValueParams& value,
                             const GradcheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index context_size = value.B.rows() * layer.head_count();
  Eigen::VectorXd r(context_size);
  for (Eigen::Index i = 0; i < context_size; ++i) {
    r[i] = normal(rng);
  }

  Eigen::VectorXd features = v;
  ValueParams current = value;
  const Evaluation base = evaluate(layer, features, current, r);
  const ContextVector ctx = layer.forward(features, current);
  const GradientBundle grads = layer.backward(r + ctx.c);

  GradcheckReport report;
  const double h = options.step;
  auto probe = [&](const std::string& label, double analytic, double& slot) {
    const double original = slot;
    slot = original + h;
    const Evaluation plus = evaluate(layer, features, current, r);
    slot = original - h;
    const Evaluation minus = evaluate(layer, features, current, r);
    slot = original;
    if (plus.support_shape != base.support_shape || minus.support_shape != base.support_shape) {
      report.skipped.push_back(label);
      return;
    }
    const double fd = (plus.loss - minus.loss) / (2.0 * h);
    const double rel = std::abs(analytic - fd) / (std::abs(analytic) + std::abs(fd) + 1e-12);
    ++report.checked;
    if (report.location.empty() || rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.location = label;
    }
  };

  if (options.check_heads) {
    for (int hd = 0; hd < layer.head_count(); ++hd) {
      auto& heads = layer.mutable_heads();
      for (Eigen::Index i = 0; i < heads[hd].W.rows(); ++i) {
        for (Eigen::Index j = 0; j < heads[hd].W.cols(); ++j) {
          probe(name("W", hd, i, j), grads.d_W[hd](i, j), heads[hd].W(i, j));
        }
        probe(name("b", hd, i), grads.d_b[hd][i], heads[hd].b[i]);
      }
    }
  }
  if (options.check_value) {
    for (Eigen::Index i = 0; i < current.B.rows(); ++i) {
      for (Eigen::Index j = 0; j < current.B.cols(); ++j) {
        probe(name("B", -1, i, j), grads.d_B(i, j), current.B(i, j));
      }
    }
  }
  if (options.check_features) {
    for (Eigen::Index i = 0; i < features.size(); ++i) {
      probe(name("v", -1, i), grads.d_v[i], features[i]);
    }
  }
  layer.clear_cache();
  return report;
}

} // namespace contatt
