#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "avspo/error.hpp"
#include "avspo/toy_policy.hpp"
#include "avspo/virtual_augmentation.hpp"

using namespace avspo;

namespace {

Question make_question(const TabularPolicy& p, int id, std::vector<std::size_t> accepted) {
  Question q;
  q.id = id;
  q.correct.assign(p.trajectory_count(), 0);
  for (auto i : accepted) q.correct[i] = 1;
  return q;
}

void randomize(TabularPolicy& p, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  for (double& x : p.logits()) x = n(rng);
}

// log P(mask) by enumeration, used as a finite-difference target.
double log_event_prob(const TabularPolicy& p, int q, const std::vector<std::uint8_t>& mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.trajectory_count(); ++i) {
    if (mask[i]) s += p.prob(q, p.decode(i));
  }
  return std::log(s);
}

template <class F>
ParamVector central_difference(TabularPolicy p, F f, double h = 1e-5) {
  ParamVector g(p.num_params());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = p.logits()[i];
    p.logits()[i] = x + h;
    const double up = f(p);
    p.logits()[i] = x - h;
    const double down = f(p);
    p.logits()[i] = x;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double max_abs_diff(const ParamVector& a, const ParamVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double relative_error(const ParamVector& got, const ParamVector& want) {
  ParamVector d(got.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = got[i] - want[i];
  return l2_norm(d) / std::max(l2_norm(want), 1e-12);
}

}  // namespace

TEST_CASE("policy construction limits") {
  CHECK_NOTHROW(TabularPolicy(1, 4, 16));
  CHECK_THROWS_AS(TabularPolicy(1, 1, 17), InvalidArgument);
  CHECK_THROWS_AS(TabularPolicy(1, 5, 2), InvalidArgument);
  CHECK_THROWS_AS(TabularPolicy(1, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(TabularPolicy(0, 1, 2), InvalidArgument);
  TabularPolicy p(2, 3, 4);
  CHECK(p.trajectory_count() == 64);
  CHECK(p.num_params() == 24);
  for (std::size_t i = 0; i < p.trajectory_count(); ++i) CHECK(p.encode(p.decode(i)) == i);
  CHECK(p.encode(std::vector<int>{1, 0, 0}) == 16);  // first token most significant
}

TEST_CASE("sampling degenerate and uniform questions") {
  TabularPolicy p(1, 2, 3);
  auto none = sample_group(p, make_question(p, 0, {}), 8, 1);
  CHECK(none.rewards.all_zero());
  std::vector<std::size_t> all(p.trajectory_count());
  std::iota(all.begin(), all.end(), 0);
  auto every = sample_group(p, make_question(p, 0, all), 8, 1);
  CHECK(every.rewards.all_one());

  TabularPolicy coin(1, 1, 2);
  const auto q = make_question(coin, 0, {0});
  CHECK(success_probability(coin, q) == 0.5);
  const auto big = sample_group(coin, q, 10000, 42);
  double mean = 0.0;
  for (double r : big.rewards.rewards()) mean += r;
  mean /= 10000.0;
  CHECK(std::abs(mean - 0.5) <= 0.02);
  for (const auto& r : big.rollouts) CHECK(r.logprob_old == doctest::Approx(std::log(0.5)));
}

TEST_CASE("success probability examples") {
  TabularPolicy p(1, 1, 4);
  CHECK(success_probability(p, make_question(p, 0, {2})) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(success_probability(p, make_question(p, 0, {})) == 0.0);
  TabularPolicy s(1, 1, 2);
  s.set_position_logits(0, 0, std::vector<double>{2.0, 0.0});
  const double e2 = std::exp(2.0);
  CHECK(success_probability(s, make_question(s, 0, {0})) ==
        doctest::Approx(e2 / (e2 + 1.0)).epsilon(1e-15));
  CHECK(e2 / (e2 + 1.0) == doctest::Approx(0.880797).epsilon(1e-6));
}

TEST_CASE("score function examples") {
  TabularPolicy p(1, 1, 2);
  CHECK(score_function(p, 0, std::vector<int>{0}) == ParamVector{0.5, -0.5});
  p.set_position_logits(0, 0, std::vector<double>{2.0, 0.0});
  const auto s = score_function(p, 0, std::vector<int>{1});
  const double e2 = std::exp(2.0);
  CHECK(s[0] == doctest::Approx(-e2 / (e2 + 1.0)).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(e2 / (e2 + 1.0)).epsilon(1e-15));
}

TEST_CASE("property: normalization, zero-sum scores and zero-mean score") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int V = 2 + static_cast<int>(rng() % 5);
    const int T = 1 + static_cast<int>(rng() % 3);
    TabularPolicy p(2, T, V);
    randomize(p, rng, 2.0);
    for (int step = 0; step < 3; ++step) {
      ParamVector dir(p.num_params());
      std::normal_distribution<double> n(0.0, 5.0);
      for (double& d : dir) d = n(rng);
      p.apply_step(dir, 0.7);
      for (int q = 0; q < 2; ++q) {
        for (int t = 0; t < T; ++t) {
          const auto pr = p.position_probs(q, t);
          CHECK(std::abs(std::accumulate(pr.begin(), pr.end(), 0.0) - 1.0) <= 1e-12);
        }
      }
    }
    ParamVector expected(p.num_params(), 0.0);
    for (std::size_t i = 0; i < p.trajectory_count(); ++i) {
      const auto y = p.decode(i);
      const auto s = score_function(p, 1, y);
      for (int t = 0; t < T; ++t) {
        double row = 0.0;
        for (int v = 0; v < V; ++v) row += s[p.offset(1, t) + static_cast<std::size_t>(v)];
        CHECK(std::abs(row) <= 1e-12);
      }
      for (std::size_t k = 0; k < p.block_size(); ++k) CHECK(s[k] == 0.0);  // question 0 block
      add_score(p, 1, y, p.prob(1, y), expected);
    }
    for (double e : expected) CHECK(std::abs(e) <= 1e-10);
  }
}

TEST_CASE("conditional score examples") {
  TabularPolicy p(1, 1, 2);
  const auto q = make_question(p, 0, {0});
  CHECK(conditional_score(p, q, Event::kSuccess) == ParamVector{0.5, -0.5});
  CHECK(event_log_prob_gradient(p, 0, event_mask(q, Event::kSuccess)) == ParamVector{0.5, -0.5});

  TabularPolicy r(1, 2, 3);
  std::mt19937_64 rng(4);
  randomize(r, rng, 1.0);
  const std::vector<std::uint8_t> full(r.trajectory_count(), 1);
  for (double g : conditional_score(r, 0, full)) CHECK(std::abs(g) <= 1e-15);

  TabularPolicy t(1, 1, 3);
  t.set_position_logits(0, 0, std::vector<double>{1.0, 0.0, -1.0});
  const auto qt = make_question(t, 0, {0, 1});
  const auto mask = event_mask(qt, Event::kSuccess);
  const auto fd = central_difference(t, [&](const TabularPolicy& x) { return log_event_prob(x, 0, mask); });
  CHECK(max_abs_diff(conditional_score(t, qt, Event::kSuccess), fd) <= 1e-6);

  CHECK_THROWS_AS(conditional_score(p, make_question(p, 0, {}), Event::kSuccess), InvalidArgument);
}

TEST_CASE("property: conditional score equals the event log-probability gradient") {
  std::mt19937_64 rng(23);
  int checked = 0;
  while (checked < 200) {
    const int V = 2 + static_cast<int>(rng() % 3);
    const int T = 1 + static_cast<int>(rng() % 2);
    TabularPolicy p(1, T, V);
    randomize(p, rng, 1.5);
    std::vector<std::uint8_t> mask(p.trajectory_count());
    for (auto& m : mask) m = static_cast<std::uint8_t>(rng() % 2);
    if (std::find(mask.begin(), mask.end(), 1) == mask.end()) continue;
    const auto enumerated = conditional_score(p, 0, mask);
    CHECK(max_abs_diff(enumerated, event_log_prob_gradient(p, 0, mask)) <= 1e-8);
    const auto fd = central_difference(p, [&](const TabularPolicy& x) { return log_event_prob(x, 0, mask); });
    CHECK(max_abs_diff(enumerated, fd) <= 1e-6);
    ++checked;
  }
}

TEST_CASE("clipped term examples") {
  auto c = clipped_term(1.5, 1.0, 0.2);
  CHECK(c.value == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(c.d_value_d_rho == 0.0);
  for (double a : {-2.0, -0.3, 0.0, 0.4, 3.0}) {
    c = clipped_term(1.0, a, 0.2);
    CHECK(c.value == a);
    CHECK(c.d_value_d_rho == a);
  }
  c = clipped_term(0.7, -1.0, 0.2);
  CHECK(c.value == doctest::Approx(-0.8).epsilon(1e-15));
  CHECK(c.d_value_d_rho == 0.0);
}

TEST_CASE("property: clip gating") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> rho_d(0.0, 3.0);
  std::uniform_real_distribution<double> a_d(-5.0, 5.0);
  std::uniform_real_distribution<double> e_d(0.01, 0.99);
  for (int trial = 0; trial < 10000; ++trial) {
    const double rho = rho_d(rng);
    const double a = a_d(rng);
    const double eps = e_d(rng);
    const auto c = clipped_term(rho, a, eps);
    const bool gated = (a > 0 && rho >= 1 + eps) || (a < 0 && rho <= 1 - eps);
    if (gated) {
      CHECK(c.d_value_d_rho == 0.0);
      CHECK(c.value == doctest::Approx(std::clamp(rho, 1 - eps, 1 + eps) * a));
    } else {
      CHECK(c.d_value_d_rho == a);
      CHECK(c.value == doctest::Approx(rho * a));
    }
  }
}

TEST_CASE("surrogate gradient examples") {
  std::mt19937_64 rng(31);
  TabularPolicy p(1, 3, 3);
  randomize(p, rng, 1.0);
  const auto g = sample_group(p, make_question(p, 0, {1, 5}), 6, 3);
  const std::vector<double> zeros(6, 0.0);
  const auto z = surrogate_gradient(p, p, g.rollouts, zeros, 0.2);
  for (double x : z.gradient) CHECK(x == 0.0);
  CHECK(z.objective_value == 0.0);

  const std::vector<Rollout> one{g.rollouts.front()};
  const auto s = surrogate_gradient(p, p, one, std::vector<double>{1.0}, 0.2);
  const auto score = score_function(p, 0, one.front().tokens);
  for (std::size_t i = 0; i < score.size(); ++i) {
    CHECK(s.gradient[i] == doctest::Approx(score[i] / 3.0).epsilon(1e-14));
  }
  CHECK(s.objective_value == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("property: surrogate gradient matches central differences away from kinks") {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> n(0.0, 1.0);
  int checked = 0;
  int attempts = 0;
  while (checked < 100) {
    ++attempts;
    const int V = 2 + static_cast<int>(rng() % 3);
    const int T = 1 + static_cast<int>(rng() % 3);
    const int G = 2 + static_cast<int>(rng() % 5);
    const double eps = 0.1 + 0.2 * std::uniform_real_distribution<double>(0, 1)(rng);
    TabularPolicy old_p(2, T, V);
    randomize(old_p, rng, 1.0);
    TabularPolicy cur = old_p;
    for (double& x : cur.logits()) x += 0.3 * n(rng);
    const auto grp = sample_group(old_p, make_question(old_p, 1, {0}), G, rng());
    std::vector<double> adv(static_cast<std::size_t>(G));
    for (double& a : adv) a = n(rng);

    bool near_kink = false;
    for (const auto& r : grp.rollouts) {
      for (int t = 0; t < T; ++t) {
        const auto y = static_cast<std::size_t>(r.tokens[static_cast<std::size_t>(t)]);
        const double rho = cur.position_probs(1, t)[y] / old_p.position_probs(1, t)[y];
        near_kink = near_kink || std::abs(rho - (1 + eps)) < 1e-3 || std::abs(rho - (1 - eps)) < 1e-3;
      }
    }
    if (near_kink) continue;
    const auto analytic = surrogate_gradient(cur, old_p, grp.rollouts, adv, eps);
    const auto fd = central_difference(cur, [&](const TabularPolicy& x) {
      return surrogate_gradient(x, old_p, grp.rollouts, adv, eps).objective_value;
    });
    if (l2_norm(fd) < 1e-9) {
      CHECK(l2_norm(analytic.gradient) <= 1e-9);  // everything clipped
    } else {
      CHECK(relative_error(analytic.gradient, fd) <= 1e-5);
    }
    ++checked;
  }
  CHECK(attempts < 200);
}

TEST_CASE("symmetric update direction") {
  TabularPolicy p(1, 1, 2);
  const auto q = make_question(p, 0, {0});
  DirectionConfig cfg;
  for (auto c : {CollapseCase::kAllCorrect, CollapseCase::kAllWrong}) {
    const auto d = expected_update_direction(p, q, c, 3, cfg);
    const double a = std::abs(d.common_advantage);
    CHECK(std::abs(d.reference_gradient[0]) == doctest::Approx(a * 0.5).epsilon(1e-15));
    CHECK(std::abs(d.reference_gradient[1]) == doctest::Approx(a * 0.5).epsilon(1e-15));
    CHECK(d.reference_gradient[0] == -d.reference_gradient[1]);
  }
}

TEST_CASE("property: expected update matches a brute-force group enumeration") {
  // Enumerates every G-tuple inside the conditioning event and averages the
  // group update with exact weights. Advantages come from a direct pooled
  // computation, not from the augmentation module.
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int V = 2 + static_cast<int>(rng() % 2);
    const int G = 2 + static_cast<int>(rng() % 2);
    TabularPolicy p(1, 1, V);
    randomize(p, rng, 1.0);
    std::vector<std::size_t> accepted;
    for (int v = 0; v < V; ++v) {
      if (rng() % 2) accepted.push_back(static_cast<std::size_t>(v));
    }
    if (accepted.empty() || accepted.size() == static_cast<std::size_t>(V)) continue;
    const auto q = make_question(p, 0, accepted);
    for (auto c : {CollapseCase::kAllCorrect, CollapseCase::kAllWrong}) {
      const int K = 1 + static_cast<int>(rng() % static_cast<unsigned>(G));
      const double r_anchor = 0.1;
      std::vector<double> pooled(static_cast<std::size_t>(G), c == CollapseCase::kAllCorrect ? 1.0 : 0.0);
      for (int k = 1; k <= K; ++k) {
        pooled.push_back(c == CollapseCase::kAllCorrect ? 1.0 - k / double(K + 1)
                                                        : r_anchor * (K - k + 1) / double(K));
      }
      double m = 0.0;
      for (double x : pooled) m += x;
      m /= static_cast<double>(pooled.size());
      double ss = 0.0;
      for (double x : pooled) ss += (x - m) * (x - m);
      const double sd = std::sqrt(ss / static_cast<double>(pooled.size()));
      const double adv = (pooled.front() - m) / (sd + kDefaultEpsNumeric);

      const auto mask = event_mask(q, c == CollapseCase::kAllCorrect ? Event::kSuccess : Event::kFailure);
      std::vector<std::size_t> inside;
      double p_event = 0.0;
      for (std::size_t i = 0; i < p.trajectory_count(); ++i) {
        if (mask[i]) {
          inside.push_back(i);
          p_event += p.prob(0, p.decode(i));
        }
      }
      ParamVector oracle(p.num_params(), 0.0);
      std::vector<std::size_t> idx(static_cast<std::size_t>(G), 0);
      while (true) {
        double w = 1.0;
        for (auto j : idx) w *= p.prob(0, p.decode(inside[j])) / p_event;
        for (auto j : idx) add_score(p, 0, p.decode(inside[j]), w * adv / G, oracle);
        std::size_t pos = 0;
        while (pos < idx.size() && ++idx[pos] == inside.size()) idx[pos++] = 0;
        if (pos == idx.size()) break;
      }
      DirectionConfig cfg;
      cfg.group_size = G;
      cfg.r_anchor = r_anchor;
      const auto d = expected_update_direction(p, q, c, K, cfg);
      CHECK(d.common_advantage == doctest::Approx(adv).epsilon(1e-12));
      CHECK(max_abs_diff(d.expected_gradient, oracle) <= 1e-10);
      CHECK(max_abs_diff(d.expected_gradient, d.reference_gradient) <= 1e-8);

      // Directional derivative of log(1 - p) (all wrong) or log p (all
      // correct) along the expected update has the promised sign.
      const auto success = event_mask(q, Event::kSuccess);
      const auto failure = event_mask(q, Event::kFailure);
      const auto grad_target = central_difference(p, [&](const TabularPolicy& x) {
        return log_event_prob(x, 0, c == CollapseCase::kAllCorrect ? success : failure);
      });
      double dir = 0.0;
      for (std::size_t i = 0; i < grad_target.size(); ++i) dir += grad_target[i] * d.expected_gradient[i];
      if (c == CollapseCase::kAllCorrect) CHECK(dir > 0.0);
      else CHECK(dir < 0.0);
    }
  }
}
