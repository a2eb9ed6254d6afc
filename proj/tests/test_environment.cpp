#include <doctest.h>

#include "avspo/environment.hpp"
#include "avspo/error.hpp"

using namespace avspo;

TEST_CASE("initial success probabilities follow the difficulty spread") {
  for (auto rule : {CorrectRule::kPrefix, CorrectRule::kExact}) {
    EnvSpec spec;
    spec.num_questions = 9;
    spec.vocab_size = 3;
    spec.seq_len = 3;
    spec.correct_rule = rule;
    spec.p_min = 0.1;
    spec.p_max = 0.9;
    const auto env = build_environment(spec);
    REQUIRE(env.questions.size() == 9);
    for (int q = 0; q < 9; ++q) {
      Stream unused(0);
      const double want = target_success(spec, q, unused);
      CHECK(success_probability(env.initial_policy, env.questions[static_cast<std::size_t>(q)]) ==
            doctest::Approx(want).epsilon(1e-12));
    }
    // Endpoints of the spread are hit exactly.
    CHECK(success_probability(env.initial_policy, env.questions.front()) == doctest::Approx(0.1));
    CHECK(success_probability(env.initial_policy, env.questions.back()) == doctest::Approx(0.9));
  }
}

TEST_CASE("degenerate rules") {
  EnvSpec spec;
  spec.correct_rule = CorrectRule::kNone;
  auto env = build_environment(spec);
  for (const auto& q : env.questions) CHECK(success_probability(env.initial_policy, q) == 0.0);
  spec.correct_rule = CorrectRule::kAll;
  env = build_environment(spec);
  for (const auto& q : env.questions) {
    CHECK(success_probability(env.initial_policy, q) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("bands partition the success range in order") {
  EnvSpec spec;
  spec.difficulty = DifficultyDist::kBand;
  spec.num_bands = 5;
  double prev_hi = -1.0;
  for (int band = 1; band <= 5; ++band) {
    spec.band = band;
    const auto env = build_environment(spec);
    double lo = 1.0;
    double hi = 0.0;
    for (const auto& q : env.questions) {
      const double p = success_probability(env.initial_policy, q);
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    CHECK(lo >= prev_hi - 1e-12);
    prev_hi = hi;
  }
}

TEST_CASE("construction is deterministic in the seed") {
  EnvSpec spec;
  spec.difficulty = DifficultyDist::kUniform;
  spec.logit_noise = 0.5;
  spec.seed = 3;
  const auto a = build_environment(spec);
  const auto b = build_environment(spec);
  CHECK(std::equal(a.initial_policy.logits().begin(), a.initial_policy.logits().end(),
                   b.initial_policy.logits().begin()));
  spec.seed = 4;
  const auto c = build_environment(spec);
  CHECK_FALSE(std::equal(a.initial_policy.logits().begin(), a.initial_policy.logits().end(),
                         c.initial_policy.logits().begin()));
}

TEST_CASE("spec files parse and reject bad input") {
  const auto spec = parse_env_spec(
      "# toy\nnum_questions = 12\nvocab_size = 3\nseq_len = 2\ncorrect_rule = exact\n"
      "difficulty = logit_spread\np_min = 0.05\n");
  CHECK(spec.num_questions == 12);
  CHECK(spec.vocab_size == 3);
  CHECK(spec.correct_rule == CorrectRule::kExact);
  CHECK(spec.difficulty == DifficultyDist::kLogitSpread);
  CHECK(spec.p_min == 0.05);

  CHECK_THROWS_AS(parse_env_spec("vocab = 3\n"), ParseError);
  CHECK_THROWS_AS(parse_env_spec("correct_rule = sometimes\n"), ParseError);
  CHECK_THROWS_AS(parse_env_spec("seq_len = two\n"), ParseError);
  CHECK_THROWS_AS(parse_env_spec("vocab_size = 17\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_env_spec("seq_len = 5\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_env_spec("band = 6\nnum_bands = 5\n"), InvalidArgument);
  try {
    parse_env_spec("num_questions = 4\nbogus_key = 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }
}
