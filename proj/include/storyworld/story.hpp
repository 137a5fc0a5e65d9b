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

// Fabulas, timelines and the story-file format.
//
//   sort person: jay, ali        # constants of a sort
//   rel wears(person, color)     # relation signature
//   t=0:                         # step block, numbered from 0
//     + wears(jay,blue)          # assert
//     +? plays(ali,jay)          # assert, not marked important
//     - wears(ali,red)           # retract
//
// Formulas use name(args), true, false, !, &, |, -> (right associative) and
// parentheses, binding tightest to loosest in that order.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "storyworld/error.hpp"
#include "storyworld/logic.hpp"

namespace storyworld {

struct Proposition {
  Formula formula;
  bool important = true;

  bool operator==(const Proposition&) const = default;
};

// A consistent set of propositions over a universe, kept in canonical order
// (lexicographic on serialized text) with duplicates collapsed.
class Fabula {
 public:
  Fabula(UniversePtr universe, std::vector<Proposition> props, Limits limits = {})
      : universe_(std::move(universe)), limits_(limits) {
    std::map<std::string, Proposition> by_key;
    for (auto& p : props) {
      check_formula(p.formula, *universe_);
      auto key = p.formula.to_string();
      auto [it, inserted] = by_key.emplace(std::move(key), p);
      if (!inserted) it->second.important = it->second.important || p.important;
    }
    for (auto& [key, p] : by_key) {
      keys_.push_back(key);
      props_.push_back(std::move(p));
    }
    auto fs = formulas();
    if (!consistent(fs, *universe_, limits_)) {
      std::vector<std::string> conflict;
      for (const auto& f : minimal_conflict(fs, *universe_, limits_))
        conflict.push_back(f.to_string());
      throw InconsistencyError("inconsistent fabula", std::move(conflict));
    }
  }

  static Fabula of(UniversePtr universe, const std::vector<Formula>& formulas,
                   Limits limits = {}) {
    std::vector<Proposition> props;
    for (const auto& f : formulas) props.push_back({f, true});
    return Fabula(std::move(universe), std::move(props), limits);
  }

  static Fabula empty(UniversePtr universe, Limits limits = {}) {
    return Fabula(std::move(universe), {}, limits);
  }

  const Universe& universe() const { return *universe_; }
  const UniversePtr& universe_ptr() const { return universe_; }
  const Limits& limits() const { return limits_; }

  std::span<const Proposition> propositions() const { return props_; }
  std::span<const std::string> keys() const { return keys_; }
  std::size_t size() const { return props_.size(); }
  bool empty() const { return props_.empty(); }

  std::vector<Formula> formulas() const {
    std::vector<Formula> out;
    for (const auto& p : props_) out.push_back(p.formula);
    return out;
  }

  const Proposition* find(const Formula& f) const {
    auto key = f.to_string();
    auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
    if (it == keys_.end() || *it != key) return nullptr;
    return &props_[static_cast<std::size_t>(it - keys_.begin())];
  }
  bool contains(const Formula& f) const { return find(f) != nullptr; }

  bool operator==(const Fabula& other) const {
    return props_ == other.props_ &&
           (universe_ == other.universe_ || *universe_ == *other.universe_);
  }

 private:
  UniversePtr universe_;
  Limits limits_;
  std::vector<std::string> keys_;
  std::vector<Proposition> props_;
};

// A zeta edit on a fabula: retract `removals`, then assert `additions`.
class TransitionEdit {
 public:
  TransitionEdit() = default;
  TransitionEdit(std::vector<Proposition> additions, std::vector<Formula> removals)
      : additions_(std::move(additions)), removals_(std::move(removals)) {
    std::set<std::string> removed;
    for (const auto& f : removals_) removed.insert(f.to_string());
    for (const auto& p : additions_)
      if (removed.count(p.formula.to_string()))
        throw StoryError("transition both adds and removes " + p.formula.to_string());
  }

  static TransitionEdit adding(const std::vector<Formula>& formulas) {
    std::vector<Proposition> props;
    for (const auto& f : formulas) props.push_back({f, true});
    return TransitionEdit(std::move(props), {});
  }

  const std::vector<Proposition>& additions() const { return additions_; }
  const std::vector<Formula>& removals() const { return removals_; }
  bool empty() const { return additions_.empty() && removals_.empty(); }

 private:
  std::vector<Proposition> additions_;
  std::vector<Formula> removals_;
};

// next minus prev as additions (including propositions whose importance flag
// changed), prev minus next as removals. Both in canonical order.
inline TransitionEdit delta(const Fabula& prev, const Fabula& next) {
  std::vector<Proposition> additions;
  std::vector<Formula> removals;
  for (const auto& p : next.propositions()) {
    const Proposition* old = prev.find(p.formula);
    if (!old || old->important != p.important) additions.push_back(p);
  }
  for (const auto& p : prev.propositions())
    if (!next.contains(p.formula)) removals.push_back(p.formula);
  return TransitionEdit(std::move(additions), std::move(removals));
}

// (f minus removals) plus additions. Removing an absent formula is a no-op.
// Throws InconsistencyError carrying the conflicting subset.
inline Fabula apply_transition(const Fabula& f, const TransitionEdit& edit) {
  std::set<std::string> removed;
  for (const auto& r : edit.removals()) removed.insert(r.to_string());
  std::set<std::string> added;
  for (const auto& a : edit.additions()) added.insert(a.formula.to_string());
  std::vector<Proposition> props;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& key = f.keys()[i];
    if (!removed.count(key) && !added.count(key)) props.push_back(f.propositions()[i]);
  }
  props.insert(props.end(), edit.additions().begin(), edit.additions().end());
  return Fabula(f.universe_ptr(), std::move(props), f.limits());
}

struct Timeline {
  UniversePtr universe;
  std::vector<Fabula> steps;

  bool operator==(const Timeline& other) const {
    return *universe == *other.universe && steps == other.steps;
  }
};

namespace detail {

inline bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Cursor over one line of story text, tracking 1-based columns.
class LineCursor {
 public:
  LineCursor(std::string_view text, std::size_t line, std::size_t column_offset = 0)
      : text_(text), line_(line), offset_(column_offset) {}

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }
  std::size_t column() const { return offset_ + pos_ + 1; }
  std::size_t line() const { return line_; }
  std::string_view rest() const { return text_.substr(pos_); }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'");
  }

  bool peek_ident() {
    skip_space();
    return pos_ < text_.size() && is_ident_start(text_[pos_]);
  }

  std::string ident(const char* what) {
    skip_space();
    if (pos_ >= text_.size() || !is_ident_start(text_[pos_])) fail(std::string("expected ") + what);
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(line_, column(), message);
  }
  [[noreturn]] void fail_at(std::size_t column, const std::string& message) const {
    throw ParseError(line_, column, message);
  }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t offset_;
  std::size_t pos_ = 0;
};

class FormulaParser {
 public:
  FormulaParser(LineCursor& cursor, const Universe& universe)
      : in_(cursor), universe_(universe) {}

  Formula parse() {
    Formula f = implication_level();
    if (!in_.at_end()) in_.fail("unexpected input after formula");
    return f;
  }

 private:
  Formula implication_level() {
    Formula lhs = or_level();
    if (in_.accept("->")) return implication(std::move(lhs), implication_level());
    return lhs;
  }

  Formula or_level() {
    std::vector<Formula> ops{and_level()};
    while (in_.accept("|")) ops.push_back(and_level());
    return ops.size() == 1 ? ops.front() : Formula::make(Formula::Kind::kOr, std::move(ops));
  }

  Formula and_level() {
    std::vector<Formula> ops{unary()};
    while (in_.accept("&")) ops.push_back(unary());
    return ops.size() == 1 ? ops.front() : Formula::make(Formula::Kind::kAnd, std::move(ops));
  }

  Formula unary() {
    if (in_.accept("!")) return negation(unary());
    return primary();
  }

  Formula primary() {
    if (in_.accept("(")) {
      Formula f = implication_level();
      in_.expect(")");
      return f;
    }
    in_.skip_space();
    const std::size_t col = in_.column();
    if (!in_.peek_ident()) in_.fail("expected a formula");
    std::string name = in_.ident("a relation name");
    if (!in_.accept("(")) {
      if (name == "true") return Formula::constant(true);
      if (name == "false") return Formula::constant(false);
      in_.fail_at(col, "expected '(' after '" + name + "'");
    }
    const Relation* rel = universe_.find_relation(name);
    if (!rel) in_.fail_at(col, "unknown relation '" + name + "'");
    Atom atom{name, {}};
    do {
      in_.skip_space();
      const std::size_t arg_col = in_.column();
      std::string arg = in_.ident("a constant");
      const std::size_t i = atom.args.size();
      if (i >= rel->arg_sorts.size())
        in_.fail_at(arg_col, "too many arguments for '" + name + "' (arity " +
                                 std::to_string(rel->arg_sorts.size()) + ")");
      const Sort* sort = universe_.find_sort(rel->arg_sorts[i]);
      if (std::find(sort->constants.begin(), sort->constants.end(), arg) == sort->constants.end())
        in_.fail_at(arg_col, "unknown constant '" + arg + "' for sort '" + sort->name + "'");
      atom.args.push_back(std::move(arg));
    } while (in_.accept(","));
    in_.expect(")");
    if (atom.args.size() != rel->arg_sorts.size())
      in_.fail_at(col, "'" + name + "' expects " + std::to_string(rel->arg_sorts.size()) +
                           " argument(s), got " + std::to_string(atom.args.size()));
    return Formula::atom(std::move(atom));
  }

  LineCursor& in_;
  const Universe& universe_;
};

// "t" followed by "=", allowing blanks in between.
inline bool is_step_header(std::string_view s) {
  if (s.empty() || s.front() != 't') return false;
  std::size_t i = 1;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return i < s.size() && s[i] == '=';
}

inline std::string_view strip_comment(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
    line.remove_suffix(1);
  return line;
}

}  // namespace detail

// Parses a single formula; errors are reported against line 1.
inline Formula parse_formula(std::string_view text, const Universe& universe) {
  detail::LineCursor cursor(text, 1);
  return detail::FormulaParser(cursor, universe).parse();
}

// Parses a story file. Throws ParseError for syntax and declaration problems
// (including an empty timeline and add/remove conflicts within a block) and
// StepInconsistencyError for a well-formed but inconsistent step.
inline Timeline parse_story(std::string_view text, Limits limits = {}) {
  std::vector<Sort> sorts;
  std::vector<Relation> relations;
  UniversePtr universe;
  std::vector<Fabula> steps;

  struct Change {
    Formula formula;
    bool add;
    bool important;
    std::size_t line;
    std::size_t column;
  };
  std::vector<Change> block;
  std::size_t block_line = 0;
  bool in_block = false;

  auto close_block = [&]() {
    std::map<std::string, const Change*> seen;
    for (const auto& c : block) {
      auto key = c.formula.to_string();
      auto [it, inserted] = seen.emplace(key, &c);
      if (!inserted && it->second->add != c.add)
        throw ParseError(c.line, c.column, "add/remove conflict on " + key);
    }
    const Fabula prev = steps.empty() ? Fabula::empty(universe, limits) : steps.back();
    std::vector<Proposition> props;
    std::set<std::string> removed;
    for (const auto& c : block) {
      if (c.add) continue;
      if (!prev.contains(c.formula))
        throw ParseError(c.line, c.column,
                         "cannot remove " + c.formula.to_string() + ": not asserted");
      removed.insert(c.formula.to_string());
    }
    std::set<std::string> readded;
    for (const auto& c : block)
      if (c.add) readded.insert(c.formula.to_string());
    for (std::size_t i = 0; i < prev.size(); ++i) {
      const auto& key = prev.keys()[i];
      if (!removed.count(key) && !readded.count(key)) props.push_back(prev.propositions()[i]);
    }
    for (const auto& c : block)
      if (c.add) props.push_back({c.formula, c.important});
    try {
      steps.emplace_back(universe, std::move(props), limits);
    } catch (const InconsistencyError& e) {
      throw StepInconsistencyError(steps.size(), block_line, e.conflict());
    }
    block.clear();
  };

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string_view line = detail::strip_comment(raw);
    detail::LineCursor in(line, line_no);
    if (in.at_end()) {
      if (end == text.size()) break;
      continue;
    }

    const char lead = in.rest().front();
    if (lead == '+' || lead == '-') {
      in.accept(std::string_view(&lead, 1));
      const bool add = lead == '+';
      bool important = true;
      if (add && in.rest().substr(0, 1) == "?") {
        in.accept("?");
        important = false;
      }
      if (!in_block) in.fail_at(1, "proposition outside a 't=<k>:' block");
      in.skip_space();
      const std::size_t col = in.column();
      detail::FormulaParser parser(in, *universe);
      block.push_back({parser.parse(), add, important, line_no, col});
    } else if (detail::is_step_header(in.rest())) {
      in.expect("t");
      in.expect("=");
      in.skip_space();
      const std::size_t col = in.column();
      std::size_t k = 0;
      bool digits = false;
      while (!in.rest().empty() && std::isdigit(static_cast<unsigned char>(in.rest().front()))) {
        k = k * 10 + static_cast<std::size_t>(in.rest().front() - '0');
        in.accept(in.rest().substr(0, 1));
        digits = true;
      }
      if (!digits) in.fail("expected a step number");
      in.expect(":");
      if (!in.at_end()) in.fail("unexpected input after step header");
      if (!in_block) {
        try {
          universe = Universe::make(sorts, relations);
        } catch (const SymbolError& e) {
          in.fail_at(1, e.what());
        }
        limits.check(*universe);
      } else {
        close_block();
      }
      if (k != steps.size())
        in.fail_at(col, "expected step t=" + std::to_string(steps.size()) + ", found t=" +
                            std::to_string(k));
      in_block = true;
      block_line = line_no;
    } else if (in.peek_ident()) {
      const std::size_t col = in.column();
      std::string keyword = in.ident("a declaration");
      if (keyword != "sort" && keyword != "rel")
        in.fail_at(col, "unknown declaration '" + keyword + "'");
      if (in_block) in.fail_at(col, "declarations must precede the first step");
      in.skip_space();
      const std::size_t name_col = in.column();
      std::string name = in.ident(keyword == "sort" ? "a sort name" : "a relation name");
      if (keyword == "sort") {
        if (std::any_of(sorts.begin(), sorts.end(), [&](const Sort& s) { return s.name == name; }))
          in.fail_at(name_col, "duplicate sort '" + name + "'");
        in.expect(":");
        Sort sort{name, {}};
        if (!in.at_end()) {
          do {
            in.skip_space();
            const std::size_t c = in.column();
            std::string constant = in.ident("a constant name");
            if (std::find(sort.constants.begin(), sort.constants.end(), constant) !=
                sort.constants.end())
              in.fail_at(c, "duplicate constant '" + constant + "'");
            sort.constants.push_back(std::move(constant));
          } while (in.accept(","));
        }
        if (!in.at_end()) in.fail("unexpected input in sort declaration");
        sorts.push_back(std::move(sort));
      } else {
        if (std::any_of(relations.begin(), relations.end(),
                        [&](const Relation& r) { return r.name == name; }))
          in.fail_at(name_col, "duplicate relation '" + name + "'");
        in.expect("(");
        Relation rel{name, {}};
        do {
          in.skip_space();
          const std::size_t c = in.column();
          std::string sort = in.ident("a sort name");
          if (std::none_of(sorts.begin(), sorts.end(), [&](const Sort& s) { return s.name == sort; }))
            in.fail_at(c, "unknown sort '" + sort + "'");
          rel.arg_sorts.push_back(std::move(sort));
        } while (in.accept(","));
        in.expect(")");
        if (!in.at_end()) in.fail("unexpected input in relation declaration");
        relations.push_back(std::move(rel));
      }
    } else {
      in.fail("unrecognized line");
    }
    if (end == text.size()) break;
  }

  if (!in_block) throw ParseError(line_no == 0 ? 1 : line_no, 1, "empty timeline");
  close_block();
  return Timeline{universe, std::move(steps)};
}

// Emits the story format. Each step lists its removals then its additions
// relative to the previous step, both in canonical order.
inline std::string serialize_story(const Timeline& timeline) {
  const Universe& u = *timeline.universe;
  std::string out;
  for (const auto& sort : u.sorts()) {
    out += "sort " + sort.name + ":";
    for (std::size_t i = 0; i < sort.constants.size(); ++i)
      out += (i ? ", " : " ") + sort.constants[i];
    out += "\n";
  }
  for (const auto& rel : u.relations()) {
    out += "rel " + rel.name + "(";
    for (std::size_t i = 0; i < rel.arg_sorts.size(); ++i)
      out += (i ? ", " : "") + rel.arg_sorts[i];
    out += ")\n";
  }
  const Fabula none = Fabula::empty(timeline.universe);
  for (std::size_t t = 0; t < timeline.steps.size(); ++t) {
    out += "\nt=" + std::to_string(t) + ":\n";
    const Fabula& prev = t == 0 ? none : timeline.steps[t - 1];
    TransitionEdit d = delta(prev, timeline.steps[t]);
    for (const auto& f : d.removals()) out += "  - " + f.to_string() + "\n";
    for (const auto& p : d.additions())
      out += std::string(p.important ? "  + " : "  +? ") + p.formula.to_string() + "\n";
  }
  return out;
}

}  // namespace storyworld
