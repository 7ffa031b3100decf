#include "unitask/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "unitask/error.hpp"

namespace unitask {

namespace {

struct SampleRef {
  DataChunk* chunk;
  std::size_t index;
};

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double squared_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return sum;
}

}  // namespace

HyperParams HyperParams::resolved(std::size_t n_total, std::size_t tasks) const {
  HyperParams out = *this;
  if (!out.lambda) out.lambda = 0.01 * static_cast<double>(n_total);
  if (!out.sigma_prime) out.sigma_prime = static_cast<double>(std::max<std::size_t>(tasks, 1));
  return out;
}

void HyperParams::validate() const {
  if (L == 0) throw Error(ErrorCode::ConfigError, "L must be positive");
  if (loss == Loss::Hinge && L != 1) throw Error(ErrorCode::ConfigError, "CoCoA requires L = 1");
  if (loss == Loss::Logistic && H == 0) throw Error(ErrorCode::ConfigError, "local SGD requires H >= 1");
  if (!(base_lr > 0.0)) throw Error(ErrorCode::ConfigError, "base_lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(ErrorCode::ConfigError, "momentum must lie in [0, 1)");
  }
  if (sigma_prime && !(*sigma_prime > 0.0)) {
    throw Error(ErrorCode::ConfigError, "sigma_prime must be positive");
  }
  if (lambda && !(*lambda > 0.0)) throw Error(ErrorCode::ConfigError, "lambda must be positive");
}

LocalUpdate scd_local_solve(std::span<DataChunk> chunks, const Model& model, const HyperParams& hp,
                            std::size_t n_total, std::size_t steps, std::uint64_t seed) {
  if (hp.loss != Loss::Hinge) throw Error(ErrorCode::ConfigError, "SCD solves the hinge loss only");
  if (!hp.lambda || !hp.sigma_prime) {
    throw Error(ErrorCode::ConfigError, "SCD needs resolved lambda and sigma_prime");
  }
  if (n_total == 0) throw Error(ErrorCode::NoWork, "n_total must be positive");

  std::vector<SampleRef> refs;
  for (auto& chunk : chunks) {
    if (!chunk.has_state()) {
      throw Error(ErrorCode::StateMissing, "chunk " + std::to_string(chunk.id) + " has no dual state");
    }
    for (std::size_t i = 0; i < chunk.size(); ++i) refs.push_back({&chunk, i});
  }

  const double lambda = *hp.lambda;
  const double sigma = *hp.sigma_prime;
  const double lambda_n = lambda * static_cast<double>(n_total);

  LocalUpdate update;
  update.delta_weights.assign(model.weights.size(), 0.0);
  update.samples_processed = steps;
  if (refs.empty()) {
    update.samples_processed = 0;
    return update;
  }

  // Local view of the model: w + σ'·Δw.
  std::vector<double> local = model.weights;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, refs.size() - 1);

  for (std::size_t step = 0; step < steps; ++step) {
    const SampleRef ref = refs[pick(rng)];
    const Sample& sample = ref.chunk->samples[ref.index];
    double& alpha = ref.chunk->dual_state[ref.index];

    const double norm2 = sample.squared_norm();
    if (norm2 == 0.0) {
      ++update.skipped_zero_norm;
      continue;
    }
    const double margin_gap = 1.0 - sample.label * sample.dot(local);
    const double target = std::clamp(alpha + lambda_n * margin_gap / (sigma * norm2), 0.0, 1.0);
    const double delta = target - alpha;
    if (delta == 0.0) continue;

    alpha = target;
    const double coef = delta * sample.label / lambda_n;
    sample.add_scaled_to(coef, update.delta_weights);
    sample.add_scaled_to(sigma * coef, local);
  }
  return update;
}

void GapTerms::merge(const GapTerms& other) {
  if (alpha_yx.size() < other.alpha_yx.size()) alpha_yx.resize(other.alpha_yx.size(), 0.0);
  for (std::size_t j = 0; j < other.alpha_yx.size(); ++j) alpha_yx[j] += other.alpha_yx[j];
  alpha_sum += other.alpha_sum;
  hinge_sum += other.hinge_sum;
  count += other.count;
}

GapTerms gap_terms(std::span<const DataChunk> chunks, std::span<const double> weights) {
  GapTerms terms;
  terms.alpha_yx.assign(weights.size(), 0.0);
  for (const auto& chunk : chunks) {
    if (!chunk.has_state()) {
      if (chunk.samples.empty()) continue;
      throw Error(ErrorCode::StateMissing, "chunk " + std::to_string(chunk.id) + " has no dual state");
    }
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const Sample& s = chunk.samples[i];
      const double alpha = chunk.dual_state[i];
      terms.alpha_sum += alpha;
      terms.hinge_sum += std::max(0.0, 1.0 - s.label * s.dot(weights));
      if (alpha != 0.0) s.add_scaled_to(alpha * s.label, terms.alpha_yx);
      ++terms.count;
    }
  }
  return terms;
}

double duality_gap_from_terms(const GapTerms& terms, std::span<const double> weights, double lambda,
                              std::size_t n_total) {
  const double n = static_cast<double>(n_total);
  const double primal = 0.5 * lambda * squared_norm(weights) + terms.hinge_sum / n;
  double dual_norm2 = 0.0;
  for (double v : terms.alpha_yx) {
    const double w = v / (lambda * n);
    dual_norm2 += w * w;
  }
  const double dual = terms.alpha_sum / n - 0.5 * lambda * dual_norm2;
  return primal - dual;
}

double duality_gap(const Model& model, std::span<const DataChunk> chunks, double lambda,
                   std::size_t n_total) {
  return duality_gap_from_terms(gap_terms(chunks, model.weights), model.weights, lambda, n_total);
}

BatchSampler::BatchSampler(std::size_t population, std::uint64_t seed) : perm_(population), rng_(seed) {
  for (std::size_t i = 0; i < population; ++i) perm_[i] = i;
}

std::span<const std::size_t> BatchSampler::draw(std::size_t batch) {
  if (batch > perm_.size()) {
    throw Error(ErrorCode::InsufficientSamples, "batch of " + std::to_string(batch) + " from " +
                                                    std::to_string(perm_.size()) + " samples");
  }
  // partial Fisher-Yates
  for (std::size_t j = 0; j < batch; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, perm_.size() - 1);
    std::swap(perm_[j], perm_[pick(rng_)]);
  }
  return std::span<const std::size_t>(perm_.data(), batch);
}

double logistic_loss(const Sample& sample, std::span<const double> weights) {
  const double m = sample.label * sample.dot(weights);
  // log(1 + e^{-m})
  return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

void logistic_gradient(std::span<const Sample* const> batch, std::span<const double> weights,
                       std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  for (const Sample* s : batch) {
    const double m = s->label * s->dot(weights);
    s->add_scaled_to(-s->label * sigmoid(-m), grad);
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= scale;
}

LocalUpdate sgd_local_solve(std::span<const DataChunk> chunks, const Model& model,
                            const HyperParams& hp, std::uint64_t seed) {
  if (hp.loss != Loss::Logistic) throw Error(ErrorCode::ConfigError, "local SGD uses the logistic loss");
  std::vector<const Sample*> local;
  for (const auto& chunk : chunks) {
    for (const auto& s : chunk.samples) local.push_back(&s);
  }
  if (hp.L > local.size()) {
    throw Error(ErrorCode::InsufficientSamples, "L = " + std::to_string(hp.L) + " exceeds " +
                                                    std::to_string(local.size()) + " local samples");
  }

  const std::size_t d = model.weights.size();
  std::vector<double> w = model.weights;
  std::vector<double> velocity(d, 0.0);
  std::vector<double> grad(d, 0.0);
  std::vector<const Sample*> batch(hp.L);
  BatchSampler sampler(local.size(), seed);

  for (std::size_t step = 0; step < hp.H; ++step) {
    const auto picked = sampler.draw(hp.L);
    for (std::size_t b = 0; b < hp.L; ++b) batch[b] = local[picked[b]];
    logistic_gradient(batch, w, grad);
    for (std::size_t j = 0; j < d; ++j) {
      velocity[j] = hp.momentum * velocity[j] + grad[j];
      w[j] -= hp.base_lr * velocity[j];
    }
  }

  LocalUpdate update;
  update.delta_weights.resize(d);
  for (std::size_t j = 0; j < d; ++j) update.delta_weights[j] = w[j] - model.weights[j];
  update.samples_processed = std::min(hp.H * hp.L, local.size());
  return update;
}

double effective_lr(double base_lr, std::size_t tasks) {
  return base_lr * std::sqrt(static_cast<double>(tasks));
}

Evaluation evaluate(const Model& model, std::span<const Sample> samples, Loss loss) {
  if (samples.empty()) throw Error(ErrorCode::EmptySet, "nothing to evaluate");
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (const auto& s : samples) {
    const double score = s.dot(model.weights);
    const double predicted = score >= 0.0 ? 1.0 : -1.0;
    if (predicted == s.label) ++correct;
    loss_sum += loss == Loss::Hinge ? std::max(0.0, 1.0 - s.label * score)
                                    : logistic_loss(s, model.weights);
  }
  const double n = static_cast<double>(samples.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

}  // namespace unitask
