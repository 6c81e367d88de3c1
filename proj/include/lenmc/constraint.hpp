#pragma once

/**
 * Length constraints, word counting, and the length-constraint score.
 *
 * The score of a candidate is 1/deviation when the constraint is violated and
 * a distinguished "satisfied" value (conceptually +infinity) when it holds.
 * Downstream code branches on `satisfied` explicitly instead of doing
 * floating-point arithmetic with infinities.
 */

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "lenmc/tokenize.hpp"

namespace lenmc {

// Exact target length, or an interval [lower, upper] where upper may be
// unbounded. An interval lower bound of 0 means "any length up to upper".
struct LengthConstraint {
  enum class Kind { Exact, Interval };

  Kind kind = Kind::Exact;
  int target = 0;                 // Exact
  int lower = 0;                  // Interval
  std::optional<int> upper;       // Interval; nullopt = unbounded

  static LengthConstraint exact(int target) {
    if (target <= 0) throw std::invalid_argument("exact target must be > 0");
    LengthConstraint c;
    c.kind = Kind::Exact;
    c.target = target;
    return c;
  }

  static LengthConstraint interval(int lower, std::optional<int> upper) {
    if (lower < 0) throw std::invalid_argument("interval lower must be >= 0");
    if (upper && *upper <= lower && !(lower == *upper && lower > 0))
      throw std::invalid_argument("interval requires lower <= upper");
    LengthConstraint c;
    c.kind = Kind::Interval;
    c.lower = lower;
    c.upper = upper;
    return c;
  }
};

// f(y): finite positive, or satisfied (deviation 0).
struct ConstraintScore {
  bool satisfied = false;
  double value = 0.0;  // meaningful only when !satisfied; always > 0

  static ConstraintScore satisfied_score() { return {true, 0.0}; }
  static ConstraintScore finite(double v) { return {false, v}; }
};

inline int count_words(std::string_view text) {
  int n = 0;
  for (auto& t : tokenize(text)) {
    if (t.has_alnum) ++n;
  }
  return n;
}

// Manhattan deviation of a word count from the constraint.
inline int deviation(int word_count, const LengthConstraint& c) {
  if (c.kind == LengthConstraint::Kind::Exact) {
    return word_count > c.target ? word_count - c.target
                                 : c.target - word_count;
  }
  if (word_count < c.lower) return c.lower - word_count;
  if (c.upper && word_count > *c.upper) return word_count - *c.upper;
  return 0;
}

inline ConstraintScore constraint_score(int word_count,
                                        const LengthConstraint& c) {
  int d = deviation(word_count, c);
  if (d == 0) return ConstraintScore::satisfied_score();
  return ConstraintScore::finite(1.0 / static_cast<double>(d));
}

inline bool is_satisfied(int word_count, const LengthConstraint& c) {
  return deviation(word_count, c) == 0;
}

}  // namespace lenmc
