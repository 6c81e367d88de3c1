#pragma once

// Hand-written judge outputs spanning well-formed, markdown-noisy,
// ratio-inconsistent, and garbage cases, with their expected verdicts.

#include <optional>
#include <string>
#include <vector>

namespace lenmc::test {

struct JudgeFixture {
  const char* name;
  int criteria_count;
  std::string text;
  bool parseable;
  int total_1 = 0;
  int total_2 = 0;
  double effective_ratio = 0.0;
  std::optional<double> stated_ratio;
};

inline std::vector<JudgeFixture> judge_fixtures() {
  std::vector<JudgeFixture> f;

  f.push_back({"well_formed_5", 5,
               "#### Response 1:\n"
               "1. Information Coverage: 9/10\n"
               "2. Linguistic Fluency: 8/10\n"
               "3. Conciseness: 9/10\n"
               "4. Logical Coherence: 8/10\n"
               "5. Faithfulness: 8/10\n"
               "**Overall Score:** 42/50\n"
               "#### Response 2:\n"
               "1. Information Coverage: 8/10\n"
               "2. Linguistic Fluency: 8/10\n"
               "3. Conciseness: 7/10\n"
               "4. Logical Coherence: 8/10\n"
               "5. Faithfulness: 7/10\n"
               "**Overall Score:** 38/50\n"
               "### Conclusion:\n"
               "- **Better Response:** Response 1.\n"
               "- **Score Ratio (Response 1 ÷ Response 2):** 1.11\n",
               true, 42, 38, 42.0 / 38.0, 1.11});

  // Stated ratio disagrees with the totals; recomputed value must win.
  f.push_back({"ratio_inconsistent", 5,
               "#### Response 1:\n"
               "1. Information Coverage: 9/10\n"
               "2. Linguistic Fluency: 9/10\n"
               "3. Conciseness: 9/10\n"
               "4. Logical Coherence: 9/10\n"
               "5. Faithfulness: 9/10\n"
               "**Overall Score:** 45/50\n"
               "#### Response 2:\n"
               "1. Information Coverage: 6/10\n"
               "2. Linguistic Fluency: 6/10\n"
               "3. Conciseness: 6/10\n"
               "4. Logical Coherence: 6/10\n"
               "5. Faithfulness: 6/10\n"
               "**Overall Score:** 30/50\n"
               "### Conclusion:\n"
               "- **Better Response:** Response 1.\n"
               "- **Score Ratio (Response 1 ÷ Response 2):** 2.75\n",
               true, 45, 30, 1.5, 2.75});

  f.push_back({"equal_totals_no_ratio", 6,
               "#### Response 1:\n"
               "**Overall Score:** 40/60\n"
               "#### Response 2:\n"
               "**Overall Score:** 40/60\n"
               "### Conclusion:\n"
               "- Better Response: Response 1.\n"
               "- Score Ratio (Response 1 ÷ Response 2):\n",
               true, 40, 40, 1.0, std::nullopt});

  f.push_back({"markdown_noisy", 6,
               "Sure! Here's my evaluation:\n\n"
               "#### **Response 1:**\n\n"
               " 1. **Helpfulness:** [8]/10 \n"
               " 2. **Relevance:**  9 / 10\n"
               " 3. **Accuracy:** 8/10\n"
               " 4. **Depth:** 7/10\n"
               " 5. **Creativity:** 6/10\n"
               " 6. **Level of Detail:** 8/10\n\n"
               "   **Overall Score:**  [46]/60\n\n"
               "#### __Response 2__:\n"
               "1. **Helpfulness:** 7/10\n"
               "2. **Relevance:** 8/10\n"
               "3. **Accuracy:** 8/10\n"
               "4. **Depth:** 6/10\n"
               "5. **Creativity:** 6/10\n"
               "6. **Level of Detail:** 7/10\n"
               "**Overall Score**: 42/60\n\n"
               "### Conclusion:\n"
               "- **Better Response**: [Response 1]\n"
               "- **Score Ratio (Response 1 ÷ Response 2)**: [1.10]\n",
               true, 46, 42, 46.0 / 42.0, 1.10});

  f.push_back({"totals_without_denominator", 5,
               "Response 1 overall score: 35\n"
               "Response 2 overall score: 28\n"
               "Better Response: Response 1, Score Ratio: 1.25",
               true, 35, 28, 35.0 / 28.0, 1.25});

  f.push_back({"second_better", 5,
               "#### Response 1:\n**Overall Score:** 31/50\n"
               "#### Response 2:\n**Overall Score:** 44/50\n"
               "### Conclusion:\n- **Better Response:** Response 2.\n"
               "- **Score Ratio (Response 1 ÷ Response 2):** 0.70\n",
               true, 31, 44, 31.0 / 44.0, 0.70});

  // A zero second total must clamp to the ceiling instead of dividing by 0.
  f.push_back({"zero_denominator_clamped", 5,
               "#### Response 1:\n**Overall Score:** 40/50\n"
               "#### Response 2:\n**Overall Score:** 0/50\n"
               "### Conclusion:\n- **Better Response:** Response 1.\n",
               true, 40, 0, 100.0, std::nullopt});

  f.push_back({"garbage_prose", 5,
               "I'm sorry, but I cannot compare these two summaries because "
               "the document was not provided in full.",
               false});

  f.push_back({"empty", 6, "", false});

  f.push_back({"single_total_only", 5,
               "#### Response 1:\n**Overall Score:** 41/50\n"
               "No second evaluation was produced.",
               false});

  f.push_back({"scores_without_totals", 6,
               "1. Helpfulness: 8/10\n2. Relevance: 9/10\n"
               "1. Helpfulness: 7/10\n2. Relevance: 7/10\n"
               "Better Response: Response 1",
               false});

  f.push_back({"huge_ratio_clamped", 5,
               "#### Response 1:\n**Overall Score:** 50/50\n"
               "#### Response 2:\n**Overall Score:** 1/50\n"
               "### Conclusion:\n- **Better Response:** Response 1.\n"
               "- **Score Ratio (Response 1 ÷ Response 2):** 50.00\n",
               true, 50, 1, 50.0, 50.0});

  return f;
}

}  // namespace lenmc::test
