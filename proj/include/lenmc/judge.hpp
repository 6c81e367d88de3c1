#pragma once

/**
 * Parsing of the structured pairwise judge output and the density-ratio
 * estimate used inside the acceptance probability.
 *
 * The ratio's source of truth is the recomputed quotient of the two overall
 * totals; the model's stated ratio is kept for reference but never overrides.
 * Results are clamped to [0.01, 100] so one hallucinated score cannot
 * dominate the chain.
 */

#include <algorithm>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "lenmc/errors.hpp"
#include "lenmc/llm.hpp"
#include "lenmc/prompts.hpp"

namespace lenmc {

inline constexpr double kRatioFloor = 0.01;
inline constexpr double kRatioCeiling = 100.0;

enum class BetterSlot { Response1, Response2 };

struct JudgeVerdict {
  std::vector<int> per_criterion_1;
  std::vector<int> per_criterion_2;
  int total_1 = 0;
  int total_2 = 0;
  std::optional<BetterSlot> better;
  std::optional<double> stated_ratio;
  double effective_ratio = 1.0;  // ~ P(y_new|x) / P(y_prev|x), clamped
};

namespace detail {

inline double clamp_ratio(double r) {
  return std::clamp(r, kRatioFloor, kRatioCeiling);
}

inline double ratio_from_totals(int t1, int t2) {
  if (t1 == 0 && t2 == 0) return 1.0;
  if (t2 == 0) return kRatioCeiling;
  return clamp_ratio(static_cast<double>(t1) / static_cast<double>(t2));
}

}  // namespace detail

// Tolerant extraction: markdown decoration, bracketed scores, and flexible
// whitespace are all accepted. Both overall totals are mandatory; everything
// else is best-effort.
inline JudgeVerdict parse_judge_output(const std::string& text,
                                       int expected_criteria_count) {
  if (expected_criteria_count != 5 && expected_criteria_count != 6)
    throw std::invalid_argument("expected_criteria_count must be 5 or 6");

  static const std::regex total_re(
      R"((?:\*\*)?\s*Overall\s+Score\s*:?\s*(?:\*\*)?\s*:?\s*\[?(\d+)\]?\s*(?:/\s*\d+)?)",
      std::regex::icase);
  std::vector<std::pair<int, std::size_t>> totals;  // value, end offset
  for (auto it = std::sregex_iterator(text.begin(), text.end(), total_re);
       it != std::sregex_iterator(); ++it) {
    totals.emplace_back(std::stoi((*it)[1].str()),
                        static_cast<std::size_t>(it->position() + it->length()));
  }
  if (totals.size() < 2)
    throw UnparseableVerdict("could not recover both overall totals");

  JudgeVerdict v;
  v.total_1 = totals[0].first;
  v.total_2 = totals[1].first;

  // Per-criterion lines like "3. Conciseness: 8/10" within each block.
  static const std::regex crit_re(
      R"((\d+)\.\s*\**[A-Za-z][^:\n]*\**\s*:\s*\**\s*\[?(\d+)\]?\s*/\s*10)");
  auto collect = [&](std::size_t begin, std::size_t end,
                     std::vector<int>& out) {
    std::string block = text.substr(begin, end - begin);
    for (auto it = std::sregex_iterator(block.begin(), block.end(), crit_re);
         it != std::sregex_iterator(); ++it) {
      out.push_back(std::stoi((*it)[2].str()));
    }
  };
  collect(0, totals[0].second, v.per_criterion_1);
  collect(totals[0].second, totals[1].second, v.per_criterion_2);

  static const std::regex better_re(
      R"(Better\s+Response\s*:?\**\s*:?\s*\[?\s*Response\s*([12]))",
      std::regex::icase);
  std::smatch m;
  if (std::regex_search(text, m, better_re)) {
    v.better = m[1].str() == "1" ? BetterSlot::Response1 : BetterSlot::Response2;
  }

  static const std::regex ratio_re(
      R"(Score\s+Ratio[^:\n]*:\**\s*:?\s*\[?\s*(\d+(?:\.\d+)?))",
      std::regex::icase);
  if (std::regex_search(text, m, ratio_re)) {
    v.stated_ratio = std::stod(m[1].str());
  }

  v.effective_ratio = detail::ratio_from_totals(v.total_1, v.total_2);
  return v;
}

struct JudgeConfig {
  // Deterministic scoring when the provider honors temperature 0.
  double temperature = 0.0;
  int max_new_tokens = 1024;
  int parse_retries = 1;
};

// Calls the judge once (plus a bounded retry on unparseable output) and
// returns the clamped density-ratio estimate for (y_new, y_prev).
inline double estimate_ratio(const Problem& problem, const std::string& y_new,
                             const std::string& y_prev,
                             const PromptLibrary& prompts,
                             ChatProvider& provider, const JudgeConfig& config,
                             std::optional<std::uint64_t> seed = std::nullopt) {
  const Conversation conv = prompts.render_judge(problem, y_new, y_prev);
  const int n_criteria = static_cast<int>(prompts.criteria(problem.task).size());
  GenerationParams params;
  params.temperature = config.temperature;
  params.max_new_tokens = config.max_new_tokens;
  params.seed = seed;
  for (int attempt = 0; attempt <= config.parse_retries; ++attempt) {
    CompletionResult result = provider.complete(conv, params);
    try {
      return parse_judge_output(result.text, n_criteria).effective_ratio;
    } catch (const UnparseableVerdict&) {
      if (params.seed) params.seed = *params.seed + 1;  // fresh sample
    }
  }
  throw JudgeFailure("judge output unparseable after retries");
}

}  // namespace lenmc
