#pragma once

/**
 * Conversation rendering for every prompt family: initial sampling, the
 * symmetric "regenerate" proposal, the two-regime length-feedback proposal,
 * and the pairwise judge.
 *
 * Templates live in UTF-8 data files with {placeholder} syntax so the exact
 * wording is auditable and swappable. The loose-regime feedback is used while
 * the deviation exceeds the regime threshold; at or below it the prompt asks
 * for an exact add/delete of the remaining word count.
 */

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lenmc/constraint.hpp"
#include "lenmc/errors.hpp"
#include "lenmc/llm.hpp"

namespace lenmc {

enum class TaskKind { Summarization, Instruction, MathInstruction };

inline std::string task_name(TaskKind t) {
  switch (t) {
    case TaskKind::Summarization:
      return "summ";
    case TaskKind::Instruction:
      return "instr";
    case TaskKind::MathInstruction:
      return "math";
  }
  return "instr";
}

inline std::optional<TaskKind> parse_task(std::string_view s) {
  if (s == "summ" || s == "summarization") return TaskKind::Summarization;
  if (s == "instr" || s == "instruction") return TaskKind::Instruction;
  if (s == "math" || s == "math_instruction") return TaskKind::MathInstruction;
  return std::nullopt;
}

// One-shot demonstration (document, summary, summary length) for the
// summarization template.
struct DemoTriple {
  std::string document;
  std::string summary;
  int target = 0;
};

struct Problem {
  std::string id;
  TaskKind task = TaskKind::Instruction;
  std::string input;  // the instruction or the document to summarize
  LengthConstraint constraint;
  std::optional<std::string> reference;
  std::optional<DemoTriple> demo;
};

struct CriterionSpec {
  std::string name;
  std::string description;
};

namespace detail {

inline std::string substitute(std::string text,
                              const std::map<std::string, std::string>& vars) {
  for (const auto& [key, value] : vars) {
    const std::string token = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
      text.replace(pos, token.size(), value);
      pos += value.size();
    }
  }
  return text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read template file: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

class PromptLibrary {
 public:
  int regime_threshold = 3;
  bool summarization_one_shot = true;

  static PromptLibrary load(const std::filesystem::path& dir) {
    PromptLibrary lib;
    static const char* kFiles[] = {
        "summ_system",
        "summ_initial_user",
        "instr_initial_user",
        "instr_initial_user_exact",
        "instr_initial_user_atleast",
        "summ_proposal_user",
        "instr_proposal_user",
        "summ_importance_loose_long",
        "summ_importance_loose_short",
        "instr_importance_loose_long",
        "instr_importance_loose_short",
        "summ_importance_exact_delete",
        "summ_importance_exact_add",
        "instr_importance_exact_delete",
        "instr_importance_exact_add",
        "judge_summ_system",
        "judge_summ_user",
        "judge_instr_system",
        "judge_instr_user",
    };
    for (const char* name : kFiles) {
      lib.templates_[name] =
          detail::read_file(dir / (std::string(name) + ".txt"));
    }
    lib.criteria_[TaskKind::Summarization] =
        parse_criteria(detail::read_file(dir / "criteria_summ.txt"));
    lib.criteria_[TaskKind::Instruction] =
        parse_criteria(detail::read_file(dir / "criteria_instr.txt"));
    lib.criteria_[TaskKind::MathInstruction] =
        parse_criteria(detail::read_file(dir / "criteria_math.txt"));
    return lib;
  }

  const std::vector<CriterionSpec>& criteria(TaskKind task) const {
    return criteria_.at(task);
  }

  int max_total(TaskKind task) const {
    return static_cast<int>(criteria(task).size()) * 10;
  }

  Conversation render_initial(const Problem& problem) const {
    Conversation conv;
    if (problem.task == TaskKind::Summarization) {
      conv.push_back(system_msg(tpl("summ_system")));
      if (summarization_one_shot) {
        if (!problem.demo)
          throw MissingDemo("one-shot summarization requires a demo triple");
        conv.push_back(user_msg(detail::substitute(
            tpl("summ_initial_user"), {{"x", problem.demo->document},
                                       {"l", std::to_string(problem.demo->target)}})));
        conv.push_back(assistant_msg(problem.demo->summary));
      }
      conv.push_back(user_msg(detail::substitute(
          tpl("summ_initial_user"),
          {{"x", problem.input}, {"l", std::to_string(prompt_target(problem))}})));
    } else {
      conv.push_back(user_msg(detail::substitute(
          instruction_initial_template(problem),
          {{"x", problem.input}, {"l", std::to_string(prompt_target(problem))}})));
    }
    return conv;
  }

  Conversation render_proposal(const Problem& problem,
                               const std::string& previous_text) const {
    if (previous_text.empty())
      throw std::invalid_argument("render_proposal: previous text is empty");
    Conversation conv = render_initial(problem);
    conv.push_back(assistant_msg(previous_text));
    conv.push_back(user_msg(problem.task == TaskKind::Summarization
                                ? tpl("summ_proposal_user")
                                : tpl("instr_proposal_user")));
    return conv;
  }

  Conversation render_importance(const Problem& problem,
                                 const std::string& previous_text,
                                 int previous_count) const {
    if (previous_text.empty())
      throw std::invalid_argument("render_importance: previous text is empty");
    const int dev = deviation(previous_count, problem.constraint);
    if (dev == 0)
      throw AlreadySatisfied("importance proposal from a satisfied state");

    const bool too_long = is_too_long(previous_count, problem.constraint);
    const std::string family =
        problem.task == TaskKind::Summarization ? "summ" : "instr";
    std::string key;
    if (dev > regime_threshold) {
      key = family + "_importance_loose_" + (too_long ? "long" : "short");
    } else {
      key = family + "_importance_exact_" + (too_long ? "delete" : "add");
    }
    const std::string line = detail::substitute(
        tpl(key), {{"len", std::to_string(previous_count)},
                   {"dev", std::to_string(dev)},
                   {"l", std::to_string(feedback_target(previous_count, problem))}});

    Conversation conv = render_initial(problem);
    conv.push_back(assistant_msg(previous_text));
    conv.push_back(user_msg(line));
    return conv;
  }

  // candidate_new always occupies slot 1, so the extracted ratio is
  // P(y_new|x) / P(y_prev|x) with no inversion.
  Conversation render_judge(const Problem& problem,
                            const std::string& candidate_new,
                            const std::string& candidate_prev) const {
    if (candidate_new.empty() || candidate_prev.empty())
      throw std::invalid_argument("render_judge: candidate text is empty");
    const bool summ = problem.task == TaskKind::Summarization;
    Conversation conv;
    conv.push_back(
        system_msg(tpl(summ ? "judge_summ_system" : "judge_instr_system")));
    conv.push_back(user_msg(detail::substitute(
        tpl(summ ? "judge_summ_user" : "judge_instr_user"),
        {{"x", problem.input},
         {"y_new", candidate_new},
         {"y_prev", candidate_prev},
         {"criteria", criteria_block(problem.task)},
         {"max_total", std::to_string(max_total(problem.task))},
         {"format", format_block(problem.task)}})));
    return conv;
  }

  std::string criteria_block(TaskKind task) const {
    std::ostringstream ss;
    int i = 1;
    for (const auto& c : criteria(task)) {
      ss << "\n" << i++ << ". **" << c.name << ":** " << c.description;
    }
    return ss.str();
  }

  // The structured output block the judge is asked to fill in.
  std::string format_block(TaskKind task) const {
    const auto& crits = criteria(task);
    const int total = max_total(task);
    std::ostringstream ss;
    for (int response = 1; response <= 2; ++response) {
      ss << "#### Response " << response << ":\n";
      int i = 1;
      for (const auto& c : crits) {
        ss << i++ << ". " << c.name << ": [Score]/10\n";
      }
      ss << "**Overall Score:** [Total Score]/" << total << "\n";
    }
    ss << "### Conclusion:\n"
       << "- **Better Response:** [Response 1/Response 2].\n"
       << "- **Score Ratio (Response 1 ÷ Response 2):** [Ratio, rounded to "
          "two decimal places].";
    return ss.str();
  }

 private:
  const std::string& tpl(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw Error("unknown template: " + name);
    return it->second;
  }

  std::string instruction_initial_template(const Problem& problem) const {
    if (problem.constraint.kind == LengthConstraint::Kind::Exact)
      return tpl("instr_initial_user_exact");
    if (!problem.constraint.upper) return tpl("instr_initial_user_atleast");
    return tpl("instr_initial_user");
  }

  // Length mentioned in the generation prompt: exact target, or the interval
  // bound the dataset constrains with.
  static int prompt_target(const Problem& problem) {
    const auto& c = problem.constraint;
    if (c.kind == LengthConstraint::Kind::Exact) return c.target;
    return c.upper ? *c.upper : c.lower;
  }

  static bool is_too_long(int count, const LengthConstraint& c) {
    if (c.kind == LengthConstraint::Kind::Exact) return count > c.target;
    return c.upper && count > *c.upper;
  }

  // Target quoted in importance feedback: the violated bound for intervals.
  static int feedback_target(int count, const Problem& problem) {
    const auto& c = problem.constraint;
    if (c.kind == LengthConstraint::Kind::Exact) return c.target;
    if (c.upper && count > *c.upper) return *c.upper;
    return c.lower;
  }

  static std::vector<CriterionSpec> parse_criteria(const std::string& text) {
    std::vector<CriterionSpec> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto colon = line.find(':');
      if (colon == std::string::npos)
        throw Error("criteria line missing ':': " + line);
      std::string desc =
          colon + 1 < line.size() ? line.substr(colon + 1) : std::string();
      while (!desc.empty() && desc.front() == ' ') desc.erase(desc.begin());
      out.push_back({line.substr(0, colon), std::move(desc)});
    }
    return out;
  }

  std::map<std::string, std::string> templates_;
  std::map<TaskKind, std::vector<CriterionSpec>> criteria_;
};

}  // namespace lenmc
