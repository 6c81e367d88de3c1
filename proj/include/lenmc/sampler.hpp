#pragma once

/**
 * The Metropolis-Hastings chain over candidate texts, the importance-sampling
 * variant, the Inst/Rand baselines, and multi-beam orchestration.
 *
 * A chain starts from an instructed sample and repeatedly proposes a rewrite
 * (symmetric "regenerate" for MH, length-feedback for MH+IS). A proposal is
 * accepted with probability min(1, (f_new/f_prev) * judge_ratio); a satisfied
 * proposal is always accepted and terminates the chain. Rejection keeps the
 * previous state byte-identical.
 */

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "lenmc/constraint.hpp"
#include "lenmc/errors.hpp"
#include "lenmc/judge.hpp"
#include "lenmc/llm.hpp"
#include "lenmc/prompts.hpp"
#include "lenmc/rng.hpp"

namespace lenmc {

enum class Method { Inst, Rand, MH, MHIS };

inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "inst") return Method::Inst;
  if (s == "rand") return Method::Rand;
  if (s == "mh") return Method::MH;
  if (s == "mh-is" || s == "mhis") return Method::MHIS;
  return std::nullopt;
}

inline std::string method_name(Method m) {
  switch (m) {
    case Method::Inst:
      return "inst";
    case Method::Rand:
      return "rand";
    case Method::MH:
      return "mh";
    case Method::MHIS:
      return "mh-is";
  }
  return "inst";
}

struct Candidate {
  std::string text;
  int word_count = 0;
  int deviation = 0;
  ConstraintScore score;

  static Candidate from_text(std::string text, const LengthConstraint& c) {
    Candidate cand;
    cand.word_count = count_words(text);
    cand.deviation = lenmc::deviation(cand.word_count, c);
    cand.score = constraint_score(cand.word_count, c);
    cand.text = std::move(text);
    return cand;
  }

  bool satisfied() const { return score.satisfied; }
};

struct StepRecord {
  int step_index = 0;
  std::string proposal_text;
  int proposal_deviation = 0;
  ConstraintScore f_prev, f_new;
  std::optional<double> judge_ratio;
  std::optional<double> acceptance;    // null for Rand/Inst draws
  std::optional<double> uniform_draw;  // null for Rand/Inst draws
  bool accepted = false;
};

struct SamplerConfig {
  Method method = Method::MHIS;
  int max_trials = 5;
  int beams = 1;
  std::uint64_t seed = 0;
  int regime_threshold = 3;
  bool judge_enabled = true;
  GenerationParams gen_params;
  JudgeConfig judge_config;
};

struct ChainResult {
  Candidate final;
  std::vector<StepRecord> trace;
  // Proposal steps until the constraint held; 0 means the initial sample
  // already satisfied it. Unset when the chain never converged.
  std::optional<int> converged_at;
};

// Provider or judge failure with the trace accumulated so far.
struct ChainFailure : Error {
  ChainFailure(const std::string& what, std::vector<StepRecord> trace)
      : Error(what), partial_trace(std::move(trace)) {}
  std::vector<StepRecord> partial_trace;
};

// min(1, (f_new / f_prev) * judge_ratio); satisfied proposals always accepted.
// A satisfied previous state must never propose, so it is a contract error.
inline double acceptance_probability(const ConstraintScore& f_prev,
                                     const ConstraintScore& f_new,
                                     double judge_ratio) {
  if (f_prev.satisfied)
    throw InvalidState("acceptance from a satisfied state is undefined");
  if (judge_ratio <= 0.0)
    throw std::invalid_argument("judge_ratio must be positive");
  if (f_new.satisfied) return 1.0;
  double r = (f_new.value / f_prev.value) * judge_ratio;
  return r < 1.0 ? r : 1.0;
}

namespace detail {

inline Candidate draw_initial(const Problem& problem,
                              const SamplerConfig& config,
                              const PromptLibrary& prompts,
                              ChatProvider& provider, std::mt19937_64& rng) {
  GenerationParams params = config.gen_params;
  params.seed = rng();
  CompletionResult r = provider.complete(prompts.render_initial(problem), params);
  return Candidate::from_text(std::move(r.text), problem.constraint);
}

}  // namespace detail

inline ChainResult run_chain(const Problem& problem, const SamplerConfig& config,
                             const PromptLibrary& prompt_library,
                             ChatProvider& provider, std::mt19937_64& rng,
                             ChatProvider* judge = nullptr) {
  if (config.method != Method::MH && config.method != Method::MHIS)
    throw std::invalid_argument("run_chain expects method mh or mh-is");

  PromptLibrary prompts = prompt_library;
  prompts.regime_threshold = config.regime_threshold;

  ChainResult result;
  std::vector<StepRecord>& trace = result.trace;
  try {
    Candidate state = detail::draw_initial(problem, config, prompts, provider, rng);
    std::optional<int> converged;
    if (state.satisfied()) converged = 0;

    for (int i = 1; i <= config.max_trials && !state.satisfied(); ++i) {
      Conversation conv =
          config.method == Method::MH
              ? prompts.render_proposal(problem, state.text)
              : prompts.render_importance(problem, state.text, state.word_count);
      GenerationParams params = config.gen_params;
      params.seed = rng();
      CompletionResult r = provider.complete(conv, params);
      Candidate proposal =
          Candidate::from_text(std::move(r.text), problem.constraint);

      std::optional<double> judge_ratio;
      if (config.judge_enabled) {
        try {
          judge_ratio = estimate_ratio(problem, proposal.text, state.text,
                                       prompts, judge ? *judge : provider,
                                       config.judge_config, rng());
        } catch (const JudgeFailure&) {
          judge_ratio = 1.0;  // neutral fallback keeps the chain alive
        }
      }

      StepRecord rec;
      rec.step_index = i;
      rec.proposal_text = proposal.text;
      rec.proposal_deviation = proposal.deviation;
      rec.f_prev = state.score;
      rec.f_new = proposal.score;
      rec.judge_ratio = judge_ratio;
      rec.acceptance =
          acceptance_probability(state.score, proposal.score,
                                 judge_ratio.value_or(1.0));
      std::uniform_real_distribution<double> uniform(0.0, 1.0);
      rec.uniform_draw = uniform(rng);
      rec.accepted = *rec.uniform_draw <= *rec.acceptance;
      if (rec.accepted) state = std::move(proposal);
      trace.push_back(std::move(rec));

      if (state.satisfied() && !converged) converged = i;
    }

    result.final = std::move(state);
    result.converged_at = converged;
    return result;
  } catch (const ChainFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw ChainFailure(e.what(), std::move(trace));
  }
}

// Best-of-(n+1) independent instructed draws; ties keep the earliest.
inline ChainResult run_rand(const Problem& problem, const SamplerConfig& config,
                            const PromptLibrary& prompts, ChatProvider& provider,
                            std::mt19937_64& rng) {
  ChainResult result;
  std::optional<Candidate> best;
  std::optional<int> converged;
  for (int k = 0; k <= config.max_trials; ++k) {
    Candidate draw;
    try {
      draw = detail::draw_initial(problem, config, prompts, provider, rng);
    } catch (const std::exception& e) {
      throw ChainFailure(e.what(), std::move(result.trace));
    }
    StepRecord rec;
    rec.step_index = k;
    rec.proposal_text = draw.text;
    rec.proposal_deviation = draw.deviation;
    rec.f_new = draw.score;
    result.trace.push_back(std::move(rec));
    if (draw.deviation == 0 && !converged) converged = k;
    if (!best || draw.deviation < best->deviation) best = std::move(draw);
  }
  result.final = std::move(*best);
  result.converged_at = converged;
  return result;
}

inline ChainResult run_inst(const Problem& problem, const SamplerConfig& config,
                            const PromptLibrary& prompts,
                            ChatProvider& provider, std::mt19937_64& rng) {
  ChainResult result;
  Candidate draw;
  try {
    draw = detail::draw_initial(problem, config, prompts, provider, rng);
  } catch (const std::exception& e) {
    throw ChainFailure(e.what(), {});
  }
  StepRecord rec;
  rec.step_index = 0;
  rec.proposal_text = draw.text;
  rec.proposal_deviation = draw.deviation;
  rec.f_new = draw.score;
  result.trace.push_back(std::move(rec));
  if (draw.deviation == 0) result.converged_at = 0;
  result.final = std::move(draw);
  return result;
}

inline ChainResult run_method(const Problem& problem, const SamplerConfig& config,
                              const PromptLibrary& prompts,
                              ChatProvider& provider, std::mt19937_64& rng,
                              ChatProvider* judge = nullptr) {
  switch (config.method) {
    case Method::Inst:
      return run_inst(problem, config, prompts, provider, rng);
    case Method::Rand:
      return run_rand(problem, config, prompts, provider, rng);
    case Method::MH:
    case Method::MHIS:
      return run_chain(problem, config, prompts, provider, rng, judge);
  }
  throw std::invalid_argument("unknown method");
}

struct BeamsResult {
  Candidate best;
  int best_beam = -1;
  std::vector<std::optional<ChainResult>> beams;  // null for failed beams
  std::vector<std::string> beam_errors;           // aligned with `beams`
};

// Independent chains with per-beam rng streams derived from the root seed.
// Best = minimal deviation, then fewest proposal steps, then lowest index.
inline BeamsResult run_beams(const Problem& problem, const SamplerConfig& config,
                             const PromptLibrary& prompts,
                             ChatProvider& provider,
                             ChatProvider* judge = nullptr) {
  if (config.beams < 1) throw std::invalid_argument("beams must be >= 1");
  BeamsResult out;
  out.beams.resize(config.beams);
  out.beam_errors.resize(config.beams);

  auto steps_key = [](const ChainResult& r) {
    return r.converged_at ? *r.converged_at : std::numeric_limits<int>::max();
  };
  std::optional<std::tuple<int, int, int>> best_key;
  for (int b = 0; b < config.beams; ++b) {
    std::mt19937_64 rng = make_stream(config.seed, static_cast<std::uint64_t>(b));
    try {
      ChainResult r = run_method(problem, config, prompts, provider, rng, judge);
      std::tuple<int, int, int> key{r.final.deviation, steps_key(r), b};
      if (!best_key || key < *best_key) {
        best_key = key;
        out.best = r.final;
        out.best_beam = b;
      }
      out.beams[b] = std::move(r);
    } catch (const std::exception& e) {
      out.beam_errors[b] = e.what();
    }
  }
  if (!best_key) throw Error("all beams failed: " + out.beam_errors[0]);
  return out;
}

}  // namespace lenmc
