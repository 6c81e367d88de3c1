#pragma once

/**
 * Evaluation metrics: Acc, L1, L2, mean convergence steps, and ROUGE-1/2/L.
 *
 * L1 is the mean Manhattan deviation, L2 the root mean squared deviation.
 * ROUGE uses the shared tokenizer with punctuation tokens kept, no stemming,
 * and reports precision/recall/F1.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lenmc/errors.hpp"
#include "lenmc/tokenize.hpp"

namespace lenmc {

struct EvalSummary {
  std::size_t n = 0;
  double acc = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double mean_steps = 0.0;
  std::optional<double> rouge1, rouge2, rougeL;  // F1 means
};

inline double accuracy(const std::vector<int>& deviations) {
  if (deviations.empty()) throw EmptyInput("accuracy over empty list");
  std::size_t hits = 0;
  for (int d : deviations) {
    if (d == 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(deviations.size());
}

inline double l1(const std::vector<int>& deviations) {
  if (deviations.empty()) throw EmptyInput("l1 over empty list");
  double sum = 0.0;
  for (int d : deviations) sum += d;
  return sum / static_cast<double>(deviations.size());
}

inline double l2(const std::vector<int>& deviations) {
  if (deviations.empty()) throw EmptyInput("l2 over empty list");
  double sum = 0.0;
  for (int d : deviations) sum += static_cast<double>(d) * d;
  return std::sqrt(sum / static_cast<double>(deviations.size()));
}

// Unconverged chains contribute `cap` (the trial budget) to the mean.
inline double mean_convergence_steps(
    const std::vector<std::optional<int>>& converged_at, int cap) {
  if (converged_at.empty()) throw EmptyInput("mean_steps over empty list");
  double sum = 0.0;
  for (const auto& c : converged_at) sum += c ? *c : cap;
  return sum / static_cast<double>(converged_at.size());
}

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool empty_reference = false;
};

namespace detail {

inline double f_measure(double p, double r) {
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace detail

inline RougeScore rouge_n(const std::vector<std::string>& candidate,
                          const std::vector<std::string>& reference, int n) {
  if (n != 1 && n != 2) throw std::invalid_argument("rouge_n: n must be 1 or 2");
  auto ngrams = [n](const std::vector<std::string>& toks) {
    std::map<std::vector<std::string>, int> counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
      counts[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)]++;
    }
    return counts;
  };
  auto cand = ngrams(candidate);
  auto ref = ngrams(reference);
  std::size_t ref_total = 0, cand_total = 0, overlap = 0;
  for (auto& [g, c] : ref) ref_total += c;
  for (auto& [g, c] : cand) {
    cand_total += c;
    auto it = ref.find(g);
    if (it != ref.end()) overlap += std::min(c, it->second);  // clipped
  }
  RougeScore s;
  if (ref_total == 0) {
    s.empty_reference = true;
    return s;
  }
  s.recall = static_cast<double>(overlap) / static_cast<double>(ref_total);
  s.precision = cand_total == 0
                    ? 0.0
                    : static_cast<double>(overlap) / static_cast<double>(cand_total);
  s.f1 = detail::f_measure(s.precision, s.recall);
  return s;
}

inline std::size_t lcs_length(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1
                                      : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline RougeScore rouge_l(const std::vector<std::string>& candidate,
                          const std::vector<std::string>& reference) {
  RougeScore s;
  if (reference.empty()) {
    s.empty_reference = true;
    return s;
  }
  std::size_t lcs = lcs_length(candidate, reference);
  s.recall = static_cast<double>(lcs) / static_cast<double>(reference.size());
  s.precision = candidate.empty()
                    ? 0.0
                    : static_cast<double>(lcs) / static_cast<double>(candidate.size());
  s.f1 = detail::f_measure(s.precision, s.recall);
  return s;
}

// Convenience overloads operating on raw text via the shared tokenizer.
inline RougeScore rouge_n(std::string_view candidate, std::string_view reference,
                          int n) {
  return rouge_n(rouge_tokens(candidate), rouge_tokens(reference), n);
}

inline RougeScore rouge_l(std::string_view candidate,
                          std::string_view reference) {
  return rouge_l(rouge_tokens(candidate), rouge_tokens(reference));
}

}  // namespace lenmc
