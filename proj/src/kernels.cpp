#include "avspo/kernels.hpp"

#include <exception>
#include <numeric>
#include <optional>

#include "avspo/error.hpp"
#include "avspo/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace avspo {

namespace {

// Runs body(i) for i in [0, n). Exceptions thrown inside the parallel region
// are captured and the first (lowest index) one is rethrown afterwards.
template <typename Body>
void for_each_index(long n, Execution exec, Body&& body) {
  if (exec == Execution::kSerial) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<int> select_batch(int num_questions, int batch_size, std::uint64_t run_seed,
                              std::uint64_t iteration) {
  require(batch_size >= 1 && batch_size <= num_questions,
          "batch_size must lie in [1, num_questions]");
  std::vector<int> ids(static_cast<std::size_t>(num_questions));
  std::iota(ids.begin(), ids.end(), 0);
  if (batch_size == num_questions) return ids;
  Stream s = make_stream(run_seed, iteration, 0, StreamTag::kBatchSelection);
  // Partial Fisher-Yates: the first batch_size slots become the sample.
  for (int i = 0; i < batch_size; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   s.below(static_cast<std::uint64_t>(num_questions - i));
    std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
  }
  ids.resize(static_cast<std::size_t>(batch_size));
  return ids;
}

std::vector<SampledGroup> sample_batch(const TabularPolicy& policy,
                                       std::span<const Question> questions,
                                       std::span<const int> question_ids, int group_size,
                                       std::uint64_t run_seed, std::uint64_t iteration,
                                       Execution exec) {
  const long n = static_cast<long>(question_ids.size());
  // SampledGroup holds a RewardGroup, which has no empty state; fill slots
  // through optionals and unwrap in order.
  std::vector<std::optional<SampledGroup>> slots(question_ids.size());
  for_each_index(n, exec, [&](long j) {
    const auto idx = static_cast<std::size_t>(j);
    Stream s = make_stream(run_seed, iteration, idx, StreamTag::kGroupSampling);
    slots[idx].emplace(
        sample_group(policy, questions[static_cast<std::size_t>(question_ids[idx])], group_size, s));
  });
  std::vector<SampledGroup> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

double batch_surrogate_gradient(const TabularPolicy& policy, const TabularPolicy& old_policy,
                                std::span<const SampledGroup> groups,
                                std::span<const AdvantageVector> advantages,
                                std::span<const char> included, double eps_clip, double scale,
                                std::span<double> out, Execution exec) {
  require(groups.size() == advantages.size() && groups.size() == included.size(),
          "groups, advantages and inclusion flags must align");
  require(out.size() == policy.num_params(), "gradient buffer has wrong size");
  if (exec == Execution::kSerial) {
    double objective = 0.0;
    for (std::size_t j = 0; j < groups.size(); ++j) {
      if (!included[j]) continue;
      objective += accumulate_surrogate(policy, old_policy, groups[j].rollouts, advantages[j],
                                        eps_clip, scale, out);
    }
    return objective;
  }
  // Each group only touches its question's block; compute blocks
  // independently, then reduce in group order.
  const std::size_t block = policy.block_size();
  const long n = static_cast<long>(groups.size());
  std::vector<std::vector<double>> partial(groups.size());
  std::vector<double> objectives(groups.size(), 0.0);
  for_each_index(n, exec, [&](long jj) {
    const auto j = static_cast<std::size_t>(jj);
    if (!included[j]) return;
    const int q = groups[j].rollouts.front().question_id;
    for (const auto& r : groups[j].rollouts) {
      if (r.question_id != q) throw InvalidArgument("a group must hold rollouts of one question");
    }
    partial[j].assign(block, 0.0);
    objectives[j] = accumulate_surrogate(policy, old_policy, groups[j].rollouts, advantages[j],
                                         eps_clip, scale, partial[j], policy.offset(q));
  });
  double objective = 0.0;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    if (!included[j]) continue;
    objective += objectives[j];
    const std::size_t base = policy.offset(groups[j].rollouts.front().question_id);
    for (std::size_t k = 0; k < block; ++k) out[base + k] += partial[j][k];
  }
  return objective;
}

double mean_success_probability(const TabularPolicy& policy, std::span<const Question> questions,
                                Execution exec) {
  require(!questions.empty(), "no questions");
  std::vector<double> p(questions.size(), 0.0);
  for_each_index(static_cast<long>(questions.size()), exec, [&](long q) {
    p[static_cast<std::size_t>(q)] = success_probability(policy, questions[static_cast<std::size_t>(q)]);
  });
  double sum = 0.0;
  for (double x : p) sum += x;
  return sum / static_cast<double>(questions.size());
}

}  // namespace avspo
