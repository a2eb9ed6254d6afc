#pragma once

// Batch-level kernels with a serial reference and an OpenMP path. Both paths
// derive the same per-group random substreams and merge results in group
// order, so they agree bit for bit when a batch has distinct questions.

#include <cstdint>
#include <span>
#include <vector>

#include "avspo/toy_policy.hpp"

namespace avspo {

enum class Execution { kSerial, kParallel };

/// Distinct question ids for one iteration. Returns 0..Q-1 in order when
/// batch_size == Q.
std::vector<int> select_batch(int num_questions, int batch_size, std::uint64_t run_seed,
                              std::uint64_t iteration);

/// Samples one group per entry of question_ids. Group j draws from substream
/// (run_seed, iteration, j).
std::vector<SampledGroup> sample_batch(const TabularPolicy& policy,
                                       std::span<const Question> questions,
                                       std::span<const int> question_ids, int group_size,
                                       std::uint64_t run_seed, std::uint64_t iteration,
                                       Execution exec);

/// Adds scale * (group surrogate gradient) for every included group into
/// `out` and returns scale * (summed group objectives).
double batch_surrogate_gradient(const TabularPolicy& policy, const TabularPolicy& old_policy,
                                std::span<const SampledGroup> groups,
                                std::span<const AdvantageVector> advantages,
                                std::span<const char> included, double eps_clip, double scale,
                                std::span<double> out, Execution exec);

/// (1/Q) sum_q p_theta(q), exact.
double mean_success_probability(const TabularPolicy& policy, std::span<const Question> questions,
                                Execution exec);

int max_threads();

}  // namespace avspo
