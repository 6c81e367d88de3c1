#pragma once

/**
 * Deterministic fake chat provider.
 *
 * Incoming conversations are classified by the constant phrases of the prompt
 * templates (initial, symmetric proposal, loose/exact length feedback, judge),
 * so the mock doubles as a check that rendered prompts carry the expected
 * wording. Replies are synthesized from a lexicon to an exact word count;
 * (conversation, params, seed) fully determines the output.
 */

#include <functional>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lenmc/constraint.hpp"
#include "lenmc/errors.hpp"
#include "lenmc/llm.hpp"
#include "lenmc/rng.hpp"

namespace lenmc {

// Uniform integer distribution on [lo, hi], optionally excluding zero.
struct IntRange {
  int lo = 0;
  int hi = 0;
  bool exclude_zero = false;

  int draw(std::mt19937_64& rng) const {
    std::uniform_int_distribution<int> d(lo, hi);
    int v = d(rng);
    while (exclude_zero && v == 0) v = d(rng);
    return v;
  }
};

// Totals for (slot 1, slot 2) given their word counts and an optional target
// length the judge is rooting for.
using JudgeScript =
    std::function<std::pair<int, int>(int len1, int len2, std::optional<int>)>;

struct MockBehavior {
  IntRange initial_offset{-15, 15, false};
  IntRange proposal_drift{-10, 10, false};
  double compliance = 0.9;
  IntRange miss{-2, 2, true};
  std::optional<int> judge_target;
  JudgeScript judge_script;  // defaults to closer-to-target 45 vs 40
  std::vector<std::string> lexicon;
  std::uint64_t base_seed = 0;

  static MockBehavior defaults() {
    MockBehavior b;
    b.lexicon = {"alpha",  "bravo",  "cedar", "delta", "ember",  "falcon",
                 "garnet", "harbor", "indigo", "jasper", "kettle", "lumen",
                 "maple",  "nickel", "onyx",  "prism",  "quartz", "river",
                 "saffron", "timber", "umber", "velvet", "willow", "zephyr"};
    b.judge_script = [](int len1, int len2, std::optional<int> target) {
      if (!target || len1 == len2) return std::make_pair(40, 40);
      int d1 = std::abs(len1 - *target);
      int d2 = std::abs(len2 - *target);
      if (d1 == d2) return std::make_pair(40, 40);
      return d1 < d2 ? std::make_pair(45, 40) : std::make_pair(40, 45);
    };
    return b;
  }
};

class MockProvider : public ChatProvider {
 public:
  explicit MockProvider(MockBehavior behavior = MockBehavior::defaults())
      : behavior_(std::move(behavior)) {}

  const MockBehavior& behavior() const { return behavior_; }

  CompletionResult complete(const Conversation& conversation,
                            const GenerationParams& params) override {
    validate_conversation(conversation);
    std::mt19937_64 rng(call_seed(conversation, params));
    const std::string& last = conversation.back().content;

    if (last.find("Score Ratio") != std::string::npos)
      return judge_reply(last);

    if (last.find("words appropriately based on the previous") !=
        std::string::npos)
      return exact_regime_reply(conversation, last, rng);

    if (last.find("improve it to be exactly") != std::string::npos)
      return loose_regime_reply(last, rng);

    if (last.find("based on the previous one") != std::string::npos &&
        last.find("generate a new") != std::string::npos)
      return proposal_reply(conversation, rng);

    return initial_reply(last, rng);
  }

 private:
  std::uint64_t call_seed(const Conversation& conversation,
                          const GenerationParams& params) const {
    std::uint64_t h = behavior_.base_seed;
    h = mix64(h, params.seed.value_or(0));
    for (const auto& m : conversation) {
      h = mix64(h, hash_string(m.content));
      h = mix64(h, static_cast<std::uint64_t>(m.role));
    }
    return h;
  }

  static std::optional<int> find_number_after(const std::string& text,
                                              const std::regex& re) {
    std::smatch m;
    if (std::regex_search(text, m, re)) return std::stoi(m[1].str());
    return std::nullopt;
  }

  static int previous_length(const Conversation& conversation) {
    for (auto it = conversation.rbegin(); it != conversation.rend(); ++it) {
      if (it->role == Role::Assistant) return count_words(it->content);
    }
    throw UnclassifiableConversation(
        "proposal-style prompt without a previous assistant turn");
  }

  CompletionResult initial_reply(const std::string& last,
                                 std::mt19937_64& rng) const {
    static const std::regex exact_re(R"(exactly (\d+) words)");
    static const std::regex upper_re(R"(using (\d+) words or less)");
    static const std::regex lower_re(R"(at least (\d+) words)");
    auto target = find_number_after(last, exact_re);
    if (!target) target = find_number_after(last, upper_re);
    if (!target) target = find_number_after(last, lower_re);
    if (!target)
      throw UnclassifiableConversation(
          "cannot classify conversation or find a target length");
    int len = *target + behavior_.initial_offset.draw(rng);
    return synthesize(len, rng);
  }

  CompletionResult proposal_reply(const Conversation& conversation,
                                  std::mt19937_64& rng) const {
    int len = previous_length(conversation) + behavior_.proposal_drift.draw(rng);
    return synthesize(len, rng);
  }

  CompletionResult exact_regime_reply(const Conversation& conversation,
                                      const std::string& last,
                                      std::mt19937_64& rng) const {
    static const std::regex delete_re(R"(delete (\d+) words)");
    static const std::regex add_re(R"(add (\d+) words)");
    int prev = previous_length(conversation);
    int delta;
    if (auto k = find_number_after(last, delete_re)) {
      delta = -*k;
    } else if (auto k = find_number_after(last, add_re)) {
      delta = *k;
    } else {
      throw UnclassifiableConversation("exact-regime prompt without a count");
    }
    int len = prev + delta;
    if (!comply(rng)) len += behavior_.miss.draw(rng);
    return synthesize(len, rng);
  }

  CompletionResult loose_regime_reply(const std::string& last,
                                      std::mt19937_64& rng) const {
    static const std::regex target_re(R"(exactly (\d+) words)");
    auto target = find_number_after(last, target_re);
    if (!target)
      throw UnclassifiableConversation("loose-regime prompt without a target");
    int len = *target;
    if (!comply(rng)) len += behavior_.miss.draw(rng);
    return synthesize(len, rng);
  }

  CompletionResult judge_reply(const std::string& last) const {
    auto slot_text = [&](const char* marker1,
                         const char* marker2) -> std::optional<std::pair<std::string, std::string>> {
      auto p1 = last.find(marker1);
      auto p2 = last.find(marker2);
      if (p1 == std::string::npos || p2 == std::string::npos || p2 <= p1)
        return std::nullopt;
      std::string first =
          last.substr(p1 + std::string(marker1).size(),
                      p2 - p1 - std::string(marker1).size());
      auto end = last.find("\nEvaluation Criteria", p2);
      if (end == std::string::npos) end = last.find("\nTasks:", p2);
      if (end == std::string::npos) end = last.size();
      std::string second =
          last.substr(p2 + std::string(marker2).size(),
                      end - p2 - std::string(marker2).size());
      return std::make_pair(first, second);
    };
    auto slots = slot_text("Summary 1:", "Summary 2:");
    if (!slots) slots = slot_text("Response 1:", "Response 2:");
    if (!slots)
      throw UnclassifiableConversation("judge prompt without candidate slots");

    int n_criteria = last.find("maximum 50") != std::string::npos ? 5 : 6;
    auto [t1, t2] = behavior_.judge_script(count_words(slots->first),
                                           count_words(slots->second),
                                           behavior_.judge_target);
    return format_verdict(t1, t2, n_criteria);
  }

  static CompletionResult format_verdict(int t1, int t2, int n_criteria) {
    auto split_scores = [n_criteria](int total) {
      // Per-criterion scores in 1..10 summing to the total.
      std::vector<int> s(n_criteria, 1);
      int remaining = std::max(total, n_criteria) - n_criteria;
      for (int i = 0; i < n_criteria && remaining > 0; ++i) {
        int give = std::min(9, remaining);
        s[i] += give;
        remaining -= give;
      }
      return s;
    };
    std::ostringstream ss;
    const int max_total = n_criteria * 10;
    int totals[2] = {t1, t2};
    for (int r = 0; r < 2; ++r) {
      ss << "#### Response " << (r + 1) << ":\n";
      auto scores = split_scores(totals[r]);
      for (int i = 0; i < n_criteria; ++i) {
        ss << (i + 1) << ". Criterion " << (i + 1) << ": " << scores[i]
           << "/10\n";
      }
      ss << "**Overall Score:** " << totals[r] << "/" << max_total << "\n";
    }
    double ratio = t2 == 0 ? 0.0 : static_cast<double>(t1) / t2;
    char ratio_buf[32];
    std::snprintf(ratio_buf, sizeof(ratio_buf), "%.2f", ratio);
    ss << "### Conclusion:\n- **Better Response:** Response "
       << (t1 >= t2 ? 1 : 2) << ".\n- **Score Ratio (Response 1 ÷ Response 2):** "
       << ratio_buf << ".";
    CompletionResult out;
    out.text = ss.str();
    return out;
  }

  bool comply(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    return d(rng) < behavior_.compliance;
  }

 public:
  // Exact-word-count text from the lexicon. Never empty: an empty assistant
  // turn would be rejected by conversation validation on the next round.
  static std::string synthesize_text(int length,
                                     const std::vector<std::string>& lexicon,
                                     std::mt19937_64& rng) {
    if (length < 1) length = 1;
    std::uniform_int_distribution<std::size_t> pick(0, lexicon.size() - 1);
    std::ostringstream ss;
    for (int i = 0; i < length; ++i) {
      if (i) ss << ' ';
      ss << lexicon[pick(rng)];
    }
    ss << '.';
    return ss.str();
  }

 private:
  CompletionResult synthesize(int length, std::mt19937_64& rng) const {
    CompletionResult out;
    out.text = synthesize_text(length, behavior_.lexicon, rng);
    return out;
  }

  MockBehavior behavior_;
};

}  // namespace lenmc
