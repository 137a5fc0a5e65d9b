// Copyright 2026 The Storyworld Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Information metrics over world sets: binary entropy, question relevance,
// world coherence (EWC), transitional coherence (ETC), entailment lattices,
// and kernel/satellite detection over a Reader's state series.
//
// Probabilities are exact proportions under the counting measure on a finite
// world set. Entropies are doubles.

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "storyworld/conveyance.hpp"
#include "storyworld/error.hpp"
#include "storyworld/logic.hpp"
#include "storyworld/model_space.hpp"
#include "storyworld/rational.hpp"

namespace storyworld {

inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw StoryError("binary_entropy: probability outside [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// Evaluates on min(p, 1 - p) so that H(p) and H(1 - p) are bitwise equal.
inline double binary_entropy(const Rational& p) {
  if (p < Rational(0) || p > Rational(1))
    throw StoryError("binary_entropy: probability outside [0, 1]");
  const Rational folded = std::min(p, Rational(1) - p);
  const double q = to_double(folded);
  if (folded == Rational(0)) return 0.0;
  return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

// "If A then B", with the true answers to A and B when known.
struct Question {
  Formula antecedent;
  Formula consequent;
  std::optional<bool> antecedent_answer;
  std::optional<bool> consequent_answer;

  Formula as_implication() const { return implication(antecedent, consequent); }

  Question with_answers_from(const World& truth) const {
    Question q = *this;
    q.antecedent_answer = evaluate(truth, antecedent);
    q.consequent_answer = evaluate(truth, consequent);
    return q;
  }

  // Reads "A -> B"; any other formula F becomes "true -> F".
  static Question from_formula(const Formula& f) {
    if (f.kind() == Formula::Kind::kImplies) return {f.operands()[0], f.operands()[1], {}, {}};
    return {Formula::constant(true), f, {}, {}};
  }
};

struct RelevanceTerms {
  Rational antecedent_proportion;   // P(A = a | prior)
  Rational consequent_proportion;   // P(B = b | A = a, prior)
  double antecedent_entropy = 0.0;  // H(A = a | prior)
  double consequent_entropy = 0.0;  // H(B = b | A = a, prior)
  double value = 0.0;               // antecedent_entropy - consequent_entropy
};

inline RelevanceTerms relevance_terms(const Question& q, const WorldSet& prior) {
  if (!q.antecedent_answer || !q.consequent_answer)
    throw StoryError("relevance needs true answers; designate a truth world");
  if (prior.empty()) throw StoryError("relevance over an empty prior");
  const Formula a = *q.antecedent_answer ? q.antecedent : negation(q.antecedent);
  const Formula b = *q.consequent_answer ? q.consequent : negation(q.consequent);
  std::vector<std::uint64_t> given;
  for (std::size_t i = 0; i < prior.size(); ++i)
    if (evaluate(prior[i], a)) given.push_back(prior.assignments()[i]);
  if (given.empty()) throw StoryError("relevance: no prior world has A = the true answer");
  RelevanceTerms r;
  r.antecedent_proportion = Rational(static_cast<std::int64_t>(given.size()),
                                     static_cast<std::int64_t>(prior.size()));
  r.consequent_proportion = truth_proportion(WorldSet(prior.universe_ptr(), std::move(given)), b);
  r.antecedent_entropy = binary_entropy(r.antecedent_proportion);
  r.consequent_entropy = binary_entropy(r.consequent_proportion);
  r.value = r.antecedent_entropy - r.consequent_entropy;
  return r;
}

// H(A = a | prior) - H(B = b | A = a, prior), in bits.
inline double relevance(const Question& q, const WorldSet& prior) {
  return relevance_terms(q, prior).value;
}

// Mean truth proportion of the questions' implications over the sample.
inline Rational ewc(const WorldSet& sample, std::span<const Question> questions) {
  if (questions.empty()) throw StoryError("ewc needs at least one question");
  if (sample.empty()) throw StoryError("ewc over an empty sample");
  Rational sum(0);
  for (const auto& q : questions) sum += truth_proportion(sample, q.as_implication());
  return sum / static_cast<std::int64_t>(questions.size());
}

// Companion to ewc: mean binary entropy of each implication's proportion.
inline double ewc_mean_entropy(const WorldSet& sample, std::span<const Question> questions) {
  if (questions.empty()) throw StoryError("ewc needs at least one question");
  double sum = 0.0;
  for (const auto& q : questions) sum += binary_entropy(truth_proportion(sample, q.as_implication()));
  return sum / static_cast<double>(questions.size());
}

// Mean of H(A = T | s) - H(B = b | A = T, s), with b the consequent's answer
// (true when unset). Questions whose antecedent never holds are skipped;
// nullopt when none remain.
inline std::optional<double> ewc_relevance_side(const WorldSet& sample,
                                                std::span<const Question> questions) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& q : questions) {
    Question posed = q;
    posed.antecedent_answer = true;
    if (!posed.consequent_answer) posed.consequent_answer = true;
    if (count_satisfying(sample, posed.antecedent) == 0) continue;
    sum += relevance(posed, sample);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

struct BooleanLattice {
  // Equivalence classes; each in canonical order, the first is the class
  // representative.
  std::vector<std::vector<Formula>> vertices;
  // (a, b) for every pair of distinct classes where a entails b.
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  // Classes with no incoming edge.
  std::vector<std::size_t> sources;

  bool has_edge(std::size_t a, std::size_t b) const {
    return std::find(edges.begin(), edges.end(), std::make_pair(a, b)) != edges.end();
  }

  // Edges not implied by a two-step path.
  std::vector<std::pair<std::size_t, std::size_t>> transitive_reduction() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& [a, b] : edges) {
      bool implied = false;
      for (std::size_t k = 0; k < vertices.size() && !implied; ++k)
        implied = k != a && k != b && has_edge(a, k) && has_edge(k, b);
      if (!implied) out.emplace_back(a, b);
    }
    return out;
  }
};

inline BooleanLattice boolean_lattice(std::span<const Formula> formulas, const UniversePtr& universe,
                                      const Limits& limits = {}) {
  std::map<std::string, Formula> canonical;
  for (const auto& f : formulas) {
    check_formula(f, *universe);
    canonical.emplace(f.to_string(), f);
  }
  const WorldSet worlds = all_worlds(universe, limits);
  std::vector<boost::dynamic_bitset<>> tables;
  BooleanLattice lattice;
  for (const auto& [key, f] : canonical) {
    boost::dynamic_bitset<> table(worlds.size());
    for (std::size_t i = 0; i < worlds.size(); ++i)
      if (evaluate(worlds[i], f)) table.set(i);
    auto it = std::find(tables.begin(), tables.end(), table);
    if (it == tables.end()) {
      tables.push_back(std::move(table));
      lattice.vertices.push_back({f});
    } else {
      lattice.vertices[static_cast<std::size_t>(it - tables.begin())].push_back(f);
    }
  }
  std::vector<bool> has_parent(tables.size(), false);
  for (std::size_t a = 0; a < tables.size(); ++a)
    for (std::size_t b = 0; b < tables.size(); ++b)
      if (a != b && tables[a].is_subset_of(tables[b])) {
        lattice.edges.emplace_back(a, b);
        has_parent[b] = true;
      }
  for (std::size_t v = 0; v < tables.size(); ++v)
    if (!has_parent[v]) lattice.sources.push_back(v);
  return lattice;
}

struct SatelliteLink {
  std::size_t step = 0;
  double relevance = 0.0;
};

struct KernelStep {
  std::size_t step = 0;
  // |B(t-1) symmetric-difference B(t)| / max(1, |B(t-1) union B(t)|); 0 at step 0.
  Rational changed{0};
  bool kernel = false;
  std::vector<SatelliteLink> satellites;
};

struct KernelReport {
  Rational theta{1, 2};
  std::vector<KernelStep> steps;

  std::vector<std::size_t> kernels() const {
    std::vector<std::size_t> out;
    for (const auto& s : steps)
      if (s.kernel) out.push_back(s.step);
    return out;
  }
};

namespace detail {

inline std::set<std::string> belief_keys(const ReaderState& s) {
  std::set<std::string> out;
  for (const auto& b : s.beliefs) out.insert(b.to_string());
  return out;
}

}  // namespace detail

// Flags step t as a kernel when the fraction of beliefs that changed from
// t-1 exceeds theta. Step 0 is never a kernel.
inline KernelReport detect_kernels(std::span<const ReaderState> states, Rational theta = Rational(1, 2)) {
  if (states.size() < 2) throw StoryError("detect_kernels needs at least two states");
  if (theta < Rational(0) || theta > Rational(1))
    throw StoryError("kernel threshold outside [0, 1]");
  KernelReport report;
  report.theta = theta;
  report.steps.push_back({states[0].step, Rational(0), false, {}});
  for (std::size_t t = 1; t < states.size(); ++t) {
    const auto before = detail::belief_keys(states[t - 1]);
    const auto after = detail::belief_keys(states[t]);
    std::vector<std::string> diff, both;
    std::set_symmetric_difference(before.begin(), before.end(), after.begin(), after.end(),
                                  std::back_inserter(diff));
    std::set_union(before.begin(), before.end(), after.begin(), after.end(),
                   std::back_inserter(both));
    const Rational changed(static_cast<std::int64_t>(diff.size()),
                           static_cast<std::int64_t>(std::max<std::size_t>(1, both.size())));
    report.steps.push_back({states[t].step, changed, changed > theta, {}});
  }
  return report;
}

// Questions a kernel poses, keyed by kernel step.
using KernelQuestions = std::map<std::size_t, std::vector<Question>>;

// Default question set for kernel k: "if A then B" for every literal A added
// by a step before k and every belief B that k newly decides, answers true.
inline std::vector<Question> kernel_questions(std::span<const ReaderState> states, std::size_t k) {
  if (k == 0 || k >= states.size()) return {};
  const auto before = detail::belief_keys(states[k - 1]);
  std::vector<Formula> revealed;
  for (const auto& b : states[k].beliefs)
    if (!before.count(b.to_string())) revealed.push_back(b);
  std::vector<Question> out;
  std::set<std::string> seen;
  for (std::size_t s = 1; s < k; ++s)
    for (const auto& p : states[s].edit.additions()) {
      if (!seen.insert(p.formula.to_string()).second) continue;
      for (const auto& b : revealed) out.push_back({p.formula, b, true, true});
    }
  return out;
}

// A non-kernel step s in [1, k) is a satellite of kernel k when k's
// questions whose antecedent s added have mean relevance above epsilon,
// measured on the Reader's worlds just before s.
inline KernelReport classify_satellites(std::span<const ReaderState> states, KernelReport report,
                                        double epsilon = 0.0,
                                        const KernelQuestions& questions = {}) {
  if (report.steps.size() != states.size())
    throw StoryError("kernel report does not match the state series");
  for (std::size_t k = 0; k < report.steps.size(); ++k) {
    if (!report.steps[k].kernel) continue;
    auto given = questions.find(k);
    const std::vector<Question> posed =
        given != questions.end() ? given->second : kernel_questions(states, k);
    for (std::size_t s = 1; s < k; ++s) {
      if (report.steps[s].kernel) continue;
      std::set<std::string> added;
      for (const auto& p : states[s].edit.additions()) added.insert(p.formula.to_string());
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& q : posed) {
        if (!added.count(q.antecedent.to_string())) continue;
        const Formula a = q.antecedent_answer.value_or(true) ? q.antecedent : negation(q.antecedent);
        if (count_satisfying(states[s - 1].worlds, a) == 0) continue;
        Question answered = q;
        answered.antecedent_answer = q.antecedent_answer.value_or(true);
        answered.consequent_answer = q.consequent_answer.value_or(true);
        sum += relevance(answered, states[s - 1].worlds);
        ++n;
      }
      if (n == 0) continue;
      const double mean = sum / static_cast<double>(n);
      if (mean > epsilon) report.steps[k].satellites.push_back({s, mean});
    }
  }
  return report;
}

// Literals of `truth` that every world of `sample` agrees with.
inline std::vector<Formula> pullback(const WorldSet& sample, const World& truth) {
  if (!(sample.universe() == truth.universe()))
    throw StoryError("pullback: universe mismatch");
  std::vector<Formula> out;
  std::set<std::string> decided;
  for (const auto& l : decided_literals(sample)) decided.insert(l.to_string());
  for (const auto& l : truth.literals())
    if (decided.count(l.to_string())) out.push_back(l);
  return out;
}

struct EtcResult {
  Rational value;
  std::vector<Question> questions;
  std::vector<Formula> pullback;
};

struct EtcInput {
  const WorldSet& sample_then;  // s'(t')
  std::size_t t_prime = 0;
  const World& truth_now;  // W(t)
  std::size_t t = 0;
  const KernelReport& kernels;
  // Beliefs held after the kernel; source of derived consequents.
  std::span<const Formula> post_kernel_beliefs;
  std::optional<std::vector<Question>> questions;
  std::size_t max_questions = 64;
};

// ETC: EWC of a transition question set over the earlier sample. When no
// questions are given they are derived as A -> B with A from the pullback
// of the truth onto the sample and B from post-kernel beliefs the sample
// leaves open, pairs in canonical order up to max_questions.
inline EtcResult etc_metric(const EtcInput& in) {
  if (in.t_prime > in.t) throw StoryError("etc: t' must not exceed t");
  if (in.t_prime < in.t) {
    bool found = false;
    for (const auto& s : in.kernels.steps)
      found = found || (s.kernel && s.step > in.t_prime && s.step <= in.t);
    if (!found)
      throw StoryError("etc: no kernel in (" + std::to_string(in.t_prime) + ", " +
                       std::to_string(in.t) + "]");
  }
  EtcResult result;
  result.pullback = pullback(in.sample_then, in.truth_now);
  if (in.questions) {
    result.questions = *in.questions;
  } else {
    std::set<std::string> decided;
    for (const auto& l : decided_literals(in.sample_then)) decided.insert(l.to_string());
    std::vector<Formula> open;
    for (const auto& b : in.post_kernel_beliefs)
      if (!decided.count(b.to_string()) && !decided.count(negate(b).to_string())) open.push_back(b);
    for (const auto& a : result.pullback)
      for (const auto& b : open)
        if (result.questions.size() < in.max_questions)
          result.questions.push_back({a, b, true, true});
  }
  if (result.questions.empty()) throw StoryError("etc: empty question set");
  result.value = ewc(in.sample_then, result.questions);
  return result;
}

}  // namespace storyworld
