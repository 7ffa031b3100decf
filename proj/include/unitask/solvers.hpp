#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "unitask/core_data.hpp"
#include "unitask/random.hpp"

namespace unitask {

enum class Loss { Hinge, Logistic };

struct HyperParams {
  std::size_t L = 1;  // samples per local step
  std::size_t H = 0;  // local steps per iteration; 0 = local sample count (CoCoA)
  double base_lr = 1e-4;
  double momentum = 0.0;
  std::optional<double> sigma_prime;  // unset: number of tasks
  std::optional<double> lambda;       // unset: 0.01 * number of samples
  Loss loss = Loss::Hinge;

  // Fills the unset defaults for a run over `n_total` samples and `tasks` partitions.
  HyperParams resolved(std::size_t n_total, std::size_t tasks) const;
  void validate() const;

  bool operator==(const HyperParams&) const = default;
};

// One worker's contribution f_{Δ,k} to an iteration.
struct LocalUpdate {
  std::vector<double> delta_weights;
  std::size_t samples_processed = 0;
  WorkerId worker = 0;
  std::uint64_t iteration = 0;
  std::size_t skipped_zero_norm = 0;

  bool operator==(const LocalUpdate&) const = default;
};

// CoCoA local solver: `steps` closed-form hinge-dual coordinate updates on
// uniformly drawn local samples. Dual state is updated in place; the model is not.
LocalUpdate scd_local_solve(std::span<DataChunk> chunks, const Model& model, const HyperParams& hp,
                            std::size_t n_total, std::size_t steps, std::uint64_t seed);

// Partial sums a worker contributes to the global duality gap.
struct GapTerms {
  std::vector<double> alpha_yx;  // Σ α_i y_i x_i
  double alpha_sum = 0.0;
  double hinge_sum = 0.0;  // Σ max(0, 1 − y_i wᵀx_i)
  std::size_t count = 0;

  void merge(const GapTerms& other);
  bool operator==(const GapTerms&) const = default;
};

GapTerms gap_terms(std::span<const DataChunk> chunks, std::span<const double> weights);
double duality_gap_from_terms(const GapTerms& terms, std::span<const double> weights, double lambda,
                              std::size_t n_total);
// P(w) − D(α) for the hinge-loss SVM. Non-negative whenever α is feasible.
double duality_gap(const Model& model, std::span<const DataChunk> chunks, double lambda,
                   std::size_t n_total);

// Draws batches of distinct local indices; the permutation carries over between draws.
class BatchSampler {
 public:
  BatchSampler(std::size_t population, std::uint64_t seed);
  std::span<const std::size_t> draw(std::size_t batch);

 private:
  std::vector<std::size_t> perm_;
  Rng rng_;
};

// Mean logistic loss gradient over the batch, written into `grad`.
void logistic_gradient(std::span<const Sample* const> batch, std::span<const double> weights,
                       std::span<double> grad);
double logistic_loss(const Sample& sample, std::span<const double> weights);

// Local SGD: H momentum steps of L samples each on a copy of the model, with
// step size hp.base_lr. With H = 1 this is one mini-batch step.
LocalUpdate sgd_local_solve(std::span<const DataChunk> chunks, const Model& model,
                            const HyperParams& hp, std::uint64_t seed);

// α·√K
double effective_lr(double base_lr, std::size_t tasks);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Mean loss and sign-prediction accuracy (a zero score predicts +1).
Evaluation evaluate(const Model& model, std::span<const Sample> samples, Loss loss);

}  // namespace unitask
