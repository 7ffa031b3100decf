#pragma once

// Reference implementations used as test oracles. They work on dense vectors
// and avoid the library's solver and policy code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "unitask/core_data.hpp"

namespace oracle {

using Dense = std::vector<double>;

inline Dense to_dense(const unitask::Sample& s, std::size_t d) {
  Dense x(d, 0.0);
  for (const auto& f : s.features) x.at(f.index) = f.value;
  return x;
}

inline double dot(const Dense& a, const Dense& b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += a[j] * b[j];
  return sum;
}

struct Problem {
  std::vector<Dense> x;
  std::vector<double> y;
  double lambda = 1.0;

  std::size_t n() const { return x.size(); }
  std::size_t d() const { return x.empty() ? 0 : x.front().size(); }
};

inline Problem make_problem(const std::vector<unitask::Sample>& samples, std::size_t d, double lambda) {
  Problem p;
  p.lambda = lambda;
  for (const auto& s : samples) {
    p.x.push_back(to_dense(s, d));
    p.y.push_back(s.label);
  }
  return p;
}

// w(α) = Σ α_i y_i x_i / (λ n)
inline Dense primal_of(const Problem& p, const std::vector<double>& alpha) {
  Dense w(p.d(), 0.0);
  const double scale = 1.0 / (p.lambda * static_cast<double>(p.n()));
  for (std::size_t i = 0; i < p.n(); ++i) {
    for (std::size_t j = 0; j < p.d(); ++j) w[j] += alpha[i] * p.y[i] * p.x[i][j] * scale;
  }
  return w;
}

inline double primal_objective(const Problem& p, const Dense& w) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i) hinge += std::max(0.0, 1.0 - p.y[i] * dot(w, p.x[i]));
  return 0.5 * p.lambda * dot(w, w) + hinge / static_cast<double>(p.n());
}

inline double dual_objective(const Problem& p, const std::vector<double>& alpha) {
  const Dense w = primal_of(p, alpha);
  double sum = 0.0;
  for (double a : alpha) sum += a;
  return sum / static_cast<double>(p.n()) - 0.5 * p.lambda * dot(w, w);
}

inline double gap(const Problem& p, const std::vector<double>& alpha) {
  return primal_objective(p, primal_of(p, alpha)) - dual_objective(p, alpha);
}

// Single-machine SDCA on the hinge dual with exact coordinate maximization.
// Returns the number of epochs needed to bring the gap to `target`, or
// nothing within `max_epochs`.
struct SdcaResult {
  std::vector<double> alpha;
  std::vector<double> gaps;  // after each epoch
  std::optional<std::size_t> epochs_to_target;
};

inline SdcaResult sdca(const Problem& p, double target, std::size_t max_epochs, std::uint32_t seed) {
  SdcaResult r;
  r.alpha.assign(p.n(), 0.0);
  Dense w(p.d(), 0.0);
  std::minstd_rand rng(seed);
  std::vector<std::size_t> order(p.n());
  for (std::size_t i = 0; i < p.n(); ++i) order[i] = i;
  const double ln = p.lambda * static_cast<double>(p.n());
  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      const double q = dot(p.x[i], p.x[i]);
      if (q == 0.0) continue;
      const double next = std::min(1.0, std::max(0.0, r.alpha[i] + ln * (1.0 - p.y[i] * dot(w, p.x[i])) / q));
      const double delta = next - r.alpha[i];
      r.alpha[i] = next;
      for (std::size_t j = 0; j < p.d(); ++j) w[j] += delta * p.y[i] * p.x[i][j] / ln;
    }
    r.gaps.push_back(gap(p, r.alpha));
    if (r.gaps.back() <= target) {
      r.epochs_to_target = epoch;
      break;
    }
  }
  return r;
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Mean logistic loss, straight from the definition.
inline double logistic_objective(const std::vector<Dense>& x, const std::vector<double>& y, const Dense& w) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += std::log(1.0 + std::exp(-y[i] * dot(w, x[i])));
  return sum / static_cast<double>(x.size());
}

inline Dense finite_difference_gradient(const std::vector<Dense>& x, const std::vector<double>& y, Dense w,
                                        double h) {
  Dense g(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double saved = w[j];
    w[j] = saved + h;
    const double up = logistic_objective(x, y, w);
    w[j] = saved - h;
    const double down = logistic_objective(x, y, w);
    w[j] = saved;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

// One plain mini-batch step w - lr * mean gradient over `batch`, in batch order.
inline Dense minibatch_step(const std::vector<const unitask::Sample*>& batch, const Dense& w, double lr) {
  Dense grad(w.size(), 0.0);
  for (const auto* s : batch) {
    double m = 0.0;
    for (const auto& f : s->features) m += f.value * w[f.index];
    const double coef = -s->label * sigmoid(-(s->label * m));
    for (const auto& f : s->features) grad[f.index] += coef * f.value;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  Dense next = w;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double g = grad[j] * inv;
    next[j] -= lr * g;
  }
  return next;
}

// Sample ids as a sorted multiset.
inline std::vector<unitask::SampleId> id_multiset(const std::vector<unitask::DataChunk>& chunks) {
  std::vector<unitask::SampleId> ids;
  for (const auto& c : chunks) {
    for (const auto& s : c.samples) ids.push_back(s.id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

// ⌈K/N⌉ waves, each as long as one task.
inline double waves_time(std::size_t k, std::size_t n, double work) {
  return static_cast<double>((k + n - 1) / n) * work / static_cast<double>(k);
}

}  // namespace oracle
