#include <doctest.h>

#include <random>

#include "lenmc/mockllm.hpp"
#include "lenmc/sampler.hpp"
#include "test_support.hpp"

using namespace lenmc;
using namespace lenmc::test;

namespace {

ConstraintScore unsat(double value) { return ConstraintScore{false, value}; }

SamplerConfig mhis_config(std::uint64_t seed = 0) {
  SamplerConfig c;
  c.method = Method::MHIS;
  c.seed = seed;
  return c;
}

MockProvider target50_mock(std::uint64_t base_seed = 0) {
  MockBehavior b = MockBehavior::defaults();
  b.judge_target = 50;
  b.base_seed = base_seed;
  return MockProvider(b);
}

}  // namespace

TEST_CASE("method names round-trip") {
  for (Method m : {Method::Inst, Method::Rand, Method::MH, Method::MHIS}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK(parse_method("mhis") == Method::MHIS);
  CHECK_FALSE(parse_method("gibbs").has_value());
}

TEST_CASE("acceptance probability") {
  // deviations 2 -> 8 with a judge ratio of 1.2: (1/8)/(1/2) * 1.2 = 0.3
  CHECK(acceptance_probability(unsat(0.5), unsat(0.125), 1.2) ==
        doctest::Approx(0.3).epsilon(1e-12));
  // Improvement clips at 1.
  CHECK(acceptance_probability(unsat(0.125), unsat(0.5), 1.0) == 1.0);
  // 1.25 * 0.9 = 1.125 clips at 1; 0.8 * 0.9 stays below it.
  CHECK(acceptance_probability(unsat(0.2), unsat(0.25), 0.9) == 1.0);
  CHECK(acceptance_probability(unsat(0.25), unsat(0.2), 0.9) ==
        doctest::Approx(0.72).epsilon(1e-12));
  // Satisfied proposal is always accepted.
  CHECK(acceptance_probability(unsat(0.5), ConstraintScore{true, 0.0}, 0.01) ==
        1.0);
  // A satisfied current state must never be proposing.
  CHECK_THROWS_AS(
      acceptance_probability(ConstraintScore{true, 0.0}, unsat(0.5), 1.0),
      InvalidState);
  CHECK_THROWS_AS(acceptance_probability(unsat(0.5), unsat(0.25), 0.0),
                  std::invalid_argument);
}

TEST_CASE("detailed-balance ratio identity") {
  // A(a->b) / A(b->a) must equal (f_b * phi) / f_a for every unsatisfied pair.
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dev_d(1, 60);
  std::uniform_real_distribution<double> phi_d(-2.0, 2.0);  // log10 scale
  for (int i = 0; i < 1000; ++i) {
    double fa = 1.0 / dev_d(rng);
    double fb = 1.0 / dev_d(rng);
    double phi = std::pow(10.0, phi_d(rng));
    double fwd = acceptance_probability(unsat(fa), unsat(fb), phi);
    double bwd = acceptance_probability(unsat(fb), unsat(fa), 1.0 / phi);
    double expected = (fb * phi) / fa;
    CHECK(fwd / bwd == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("satisfied initial draw is a fixed point") {
  int calls = 0;
  ScriptedProvider provider([&](const Conversation&) {
    ++calls;
    return words(50);
  });
  std::mt19937_64 rng(1);
  auto r = run_chain(summarization_problem(50), mhis_config(), prompt_library(),
                     provider, rng);
  CHECK(calls == 1);  // no proposal, no judge
  CHECK(r.converged_at == 0);
  CHECK(r.trace.empty());
  CHECK(r.final.deviation == 0);
  CHECK(r.final.text == words(50));
}

TEST_CASE("chain stops at the first satisfied proposal") {
  // Initial draw misses; the compliant exact-regime rewrite lands on target.
  MockBehavior b = MockBehavior::defaults();
  b.compliance = 1.0;
  b.judge_target = 50;
  MockProvider provider(b);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng = make_stream(seed, 0);
    auto r = run_chain(summarization_problem(50), mhis_config(seed),
                       prompt_library(), provider, rng);
    REQUIRE(r.converged_at.has_value());
    CHECK(r.final.deviation == 0);
    CHECK(*r.converged_at <= 1);
    // No proposals after convergence.
    CHECK(static_cast<int>(r.trace.size()) == *r.converged_at);
  }
}

TEST_CASE("rejection keeps the previous state byte-identical") {
  // Proposals are much worse than the initial draw and the judge ratio is
  // floored, so every step is rejected (acceptance ~ 2e-3).
  int generator_calls = 0;
  ScriptedProvider provider([&](const Conversation& conv) -> std::string {
    const std::string& last = conv.back().content;
    if (last.find("Score Ratio") != std::string::npos) {
      return "#### Response 1:\n**Overall Score:** 1/50\n"
             "#### Response 2:\n**Overall Score:** 100/50\n"
             "- **Better Response:** Response 2.\n";
    }
    ++generator_calls;
    return generator_calls == 1 ? words(45) : words(120, "junk");
  });
  std::mt19937_64 rng(3);
  SamplerConfig config = mhis_config();
  config.max_trials = 4;
  auto r = run_chain(summarization_problem(50), config, prompt_library(),
                     provider, rng);
  REQUIRE(r.trace.size() == 4);
  for (const auto& step : r.trace) {
    CHECK_FALSE(step.accepted);
    CHECK(step.judge_ratio == doctest::Approx(0.01));
    CHECK(step.f_prev.value == doctest::Approx(1.0 / 5.0));
  }
  CHECK_FALSE(r.converged_at.has_value());
  CHECK(r.final.text == words(45));
  CHECK(r.final.deviation == 5);
}

TEST_CASE("trace is internally consistent across many seeds") {
  MockProvider provider = target50_mock();
  Problem p = summarization_problem(50);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (Method m : {Method::MH, Method::MHIS}) {
      SamplerConfig config = mhis_config(seed);
      config.method = m;
      std::mt19937_64 rng = make_stream(seed, 0);
      auto r = run_chain(p, config, prompt_library(), provider, rng);
      double prev_value = -1.0;
      bool prev_known = false;
      for (const auto& step : r.trace) {
        if (prev_known) CHECK(step.f_prev.value == doctest::Approx(prev_value));
        REQUIRE(step.acceptance.has_value());
        REQUIRE(step.uniform_draw.has_value());
        CHECK(step.accepted == (*step.uniform_draw <= *step.acceptance));
        CHECK(*step.acceptance ==
              doctest::Approx(acceptance_probability(
                  step.f_prev, step.f_new, step.judge_ratio.value_or(1.0))));
        if (step.accepted) {
          prev_value = step.f_new.value;
          prev_known = !step.f_new.satisfied;
          if (step.f_new.satisfied) {
            // Satisfied acceptance must be the last step.
            CHECK(&step == &r.trace.back());
          }
        } else if (prev_known) {
          // Rejection keeps the state.
          CHECK(step.f_prev.value == doctest::Approx(prev_value));
        }
      }
      if (r.converged_at) {
        CHECK(r.final.deviation == 0);
        CHECK(static_cast<int>(r.trace.size()) == std::max(*r.converged_at, 0));
      } else {
        CHECK(r.final.deviation > 0);
        CHECK(static_cast<int>(r.trace.size()) == config.max_trials);
      }
    }
  }
}

TEST_CASE("mh uses the symmetric proposal, mh-is the feedback proposal") {
  std::vector<std::string> seen;
  ScriptedProvider provider([&](const Conversation& conv) -> std::string {
    const std::string& last = conv.back().content;
    if (last.find("Score Ratio") != std::string::npos) {
      return "Overall Score: 40/50\nOverall Score: 40/50";
    }
    seen.push_back(last);
    return words(40);  // never satisfies exact 50
  });
  Problem p = summarization_problem(50);

  SamplerConfig config = mhis_config();
  config.method = Method::MH;
  config.max_trials = 1;
  std::mt19937_64 rng(1);
  run_chain(p, config, prompt_library(), provider, rng);
  REQUIRE(seen.size() == 2);  // initial + one proposal
  CHECK(seen[1] == "Please generate a new summary based on the previous one:");

  seen.clear();
  config.method = Method::MHIS;
  std::mt19937_64 rng2(1);
  run_chain(p, config, prompt_library(), provider, rng2);
  REQUIRE(seen.size() == 2);
  CHECK(seen[1].find("too long at 40 words") == std::string::npos);
  CHECK(seen[1].find("too short at 40 words") != std::string::npos);
}

TEST_CASE("judge failure falls back to a neutral ratio") {
  ScriptedProvider generator([&](const Conversation&) { return words(40); });
  ScriptedProvider judge([](const Conversation&) {
    return std::string("no scores here, sorry");
  });
  SamplerConfig config = mhis_config();
  config.max_trials = 2;
  std::mt19937_64 rng(5);
  auto r = run_chain(summarization_problem(50), config, prompt_library(),
                     generator, rng, &judge);
  REQUIRE(r.trace.size() == 2);
  for (const auto& step : r.trace) {
    CHECK(step.judge_ratio == doctest::Approx(1.0));
    CHECK(*step.acceptance == doctest::Approx(1.0));  // same deviation
  }
  CHECK(judge.calls() == 4);  // one retry per step
}

TEST_CASE("judge can be disabled") {
  int judge_calls = 0;
  ScriptedProvider provider([&](const Conversation& conv) {
    if (conv.back().content.find("Score Ratio") != std::string::npos)
      ++judge_calls;
    return words(40);
  });
  SamplerConfig config = mhis_config();
  config.judge_enabled = false;
  config.max_trials = 3;
  std::mt19937_64 rng(5);
  auto r = run_chain(summarization_problem(50), config, prompt_library(),
                     provider, rng);
  CHECK(judge_calls == 0);
  for (const auto& step : r.trace) CHECK_FALSE(step.judge_ratio.has_value());
}

TEST_CASE("zero trials degenerates to a single instructed draw") {
  ScriptedProvider provider({words(47)});
  SamplerConfig config = mhis_config();
  config.max_trials = 0;
  std::mt19937_64 rng(1);
  auto r = run_chain(summarization_problem(50), config, prompt_library(),
                     provider, rng);
  CHECK(r.trace.empty());
  CHECK(r.final.deviation == 3);
  CHECK_FALSE(r.converged_at.has_value());
}

TEST_CASE("provider failure mid-chain carries the partial trace") {
  int generator_calls = 0;
  ScriptedProvider provider([&](const Conversation& conv) -> std::string {
    if (conv.back().content.find("Score Ratio") != std::string::npos)
      return "Overall Score: 40/50\nOverall Score: 40/50";
    if (++generator_calls == 3) throw TransportError("connection reset");
    return words(40 + generator_calls);  // 41, 42, ...
  });
  SamplerConfig config = mhis_config();
  config.max_trials = 5;
  std::mt19937_64 rng(7);
  try {
    run_chain(summarization_problem(50), config, prompt_library(), provider,
              rng);
    FAIL("expected ChainFailure");
  } catch (const ChainFailure& e) {
    CHECK(e.partial_trace.size() == 1);  // initial + 1 full step, then throw
    CHECK(std::string(e.what()).find("connection reset") != std::string::npos);
  }
}

TEST_CASE("run_inst makes exactly one call") {
  ScriptedProvider provider({words(44)});
  SamplerConfig config = mhis_config();
  config.method = Method::Inst;
  std::mt19937_64 rng(1);
  auto r = run_inst(summarization_problem(50), config, prompt_library(),
                    provider, rng);
  CHECK(provider.calls() == 1);
  CHECK(r.final.deviation == 6);
  CHECK(r.trace.size() == 1);
  CHECK_FALSE(r.converged_at.has_value());
}

TEST_CASE("run_rand keeps the best of n+1 draws, earliest on ties") {
  ScriptedProvider provider(
      {words(48), words(50, "first"), words(50, "second"), words(41)});
  SamplerConfig config = mhis_config();
  config.method = Method::Rand;
  config.max_trials = 3;
  std::mt19937_64 rng(1);
  auto r = run_rand(summarization_problem(50), config, prompt_library(),
                    provider, rng);
  CHECK(provider.calls() == 4);
  CHECK(r.final.text == words(50, "first"));
  CHECK(r.converged_at == 1);
  CHECK(r.trace.size() == 4);
}

TEST_CASE("run_rand without a perfect draw reports no convergence") {
  ScriptedProvider provider({words(48), words(53), words(49)});
  SamplerConfig config = mhis_config();
  config.method = Method::Rand;
  config.max_trials = 2;
  std::mt19937_64 rng(1);
  auto r = run_rand(summarization_problem(50), config, prompt_library(),
                    provider, rng);
  CHECK(r.final.deviation == 1);
  CHECK_FALSE(r.converged_at.has_value());
}

TEST_CASE("beams are deterministic and independent of each other") {
  Problem p = summarization_problem(50);
  SamplerConfig config = mhis_config(17);
  config.beams = 4;

  MockProvider a = target50_mock();
  MockProvider b = target50_mock();
  auto ra = run_beams(p, config, prompt_library(), a);
  auto rb = run_beams(p, config, prompt_library(), b);
  CHECK(ra.best.text == rb.best.text);
  CHECK(ra.best_beam == rb.best_beam);
  REQUIRE(ra.beams.size() == 4);
  for (int i = 0; i < 4; ++i) {
    REQUIRE(ra.beams[i].has_value());
    CHECK(ra.beams[i]->final.text == rb.beams[i]->final.text);
  }

  // Each beam equals a standalone chain run on its own stream.
  for (int i = 0; i < 4; ++i) {
    MockProvider fresh = target50_mock();
    std::mt19937_64 rng = make_stream(config.seed, i);
    auto solo = run_chain(p, config, prompt_library(), fresh, rng);
    CHECK(solo.final.text == ra.beams[i]->final.text);
  }
}

TEST_CASE("more beams never hurt the best deviation") {
  Problem p = summarization_problem(50);
  MockProvider provider = target50_mock();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SamplerConfig narrow = mhis_config(seed);
    narrow.beams = 4;
    SamplerConfig wide = mhis_config(seed);
    wide.beams = 8;
    auto n = run_beams(p, narrow, prompt_library(), provider);
    auto w = run_beams(p, wide, prompt_library(), provider);
    CHECK(w.best.deviation <= n.best.deviation);
  }
}

TEST_CASE("beam failures are isolated; total failure throws") {
  Problem p = summarization_problem(50);

  // Provider that fails on every call: all beams fail.
  ScriptedProvider broken([](const Conversation&) -> std::string {
    throw TransportError("down");
  });
  SamplerConfig config = mhis_config();
  config.beams = 3;
  CHECK_THROWS_AS(run_beams(p, config, prompt_library(), broken), Error);

  // First call fails, later calls succeed: beam 0 fails, the rest survive.
  int calls = 0;
  ScriptedProvider flaky([&](const Conversation&) -> std::string {
    if (++calls == 1) throw TransportError("cold start");
    return words(50);
  });
  auto r = run_beams(p, config, prompt_library(), flaky);
  CHECK_FALSE(r.beams[0].has_value());
  CHECK_FALSE(r.beam_errors[0].empty());
  CHECK(r.best_beam == 1);
  CHECK(r.best.deviation == 0);

  CHECK_THROWS_AS(run_beams(p, [] {
    SamplerConfig c;
    c.beams = 0;
    return c;
  }(), prompt_library(), flaky),
                  std::invalid_argument);
}
