// Serial reference vs OpenMP path for the batch kernels.
#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "avspo/environment.hpp"
#include "avspo/kernels.hpp"
#include "avspo/reward_groups.hpp"

namespace {

using namespace avspo;

Environment bench_env(int questions) {
  EnvSpec spec;
  spec.num_questions = questions;
  spec.vocab_size = 8;
  spec.seq_len = 4;
  spec.logit_noise = 0.3;
  return build_environment(spec);
}

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

void BM_SampleBatch(benchmark::State& state) {
  const Environment env = bench_env(128);
  std::vector<int> ids(128);
  std::iota(ids.begin(), ids.end(), 0);
  std::uint64_t it = 0;
  for (auto _ : state) {
    auto groups = sample_batch(env.initial_policy, env.questions, ids, 16, 7, ++it, exec_of(state));
    benchmark::DoNotOptimize(groups.data());
  }
}

void BM_SurrogateGradient(benchmark::State& state) {
  const Environment env = bench_env(128);
  std::vector<int> ids(128);
  std::iota(ids.begin(), ids.end(), 0);
  const auto groups = sample_batch(env.initial_policy, env.questions, ids, 16, 7, 1, Execution::kSerial);
  std::vector<AdvantageVector> adv;
  for (const auto& g : groups) adv.push_back(grpo_advantages(g.rewards, group_stats(g.rewards)));
  const std::vector<char> included(groups.size(), 1);
  std::vector<double> grad(env.initial_policy.logits().size());
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double obj = batch_surrogate_gradient(env.initial_policy, env.initial_policy, groups, adv,
                                                included, 0.2, 1.0 / 128.0, grad, exec_of(state));
    benchmark::DoNotOptimize(obj);
  }
}

void BM_MeanSuccess(benchmark::State& state) {
  const Environment env = bench_env(256);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mean_success_probability(env.initial_policy, env.questions, exec_of(state)));
  }
}

}  // namespace

BENCHMARK(BM_SampleBatch)->Arg(0)->Arg(1)->ArgName("parallel");
BENCHMARK(BM_SurrogateGradient)->Arg(0)->Arg(1)->ArgName("parallel");
BENCHMARK(BM_MeanSuccess)->Arg(0)->Arg(1)->ArgName("parallel");

BENCHMARK_MAIN();
