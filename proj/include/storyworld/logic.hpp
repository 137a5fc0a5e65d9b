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

// Propositional logic over the ground atoms of a finite typed universe:
// universes, atoms, formulas, worlds, satisfaction, consistency and
// entailment. Everything here is an immutable value.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "storyworld/error.hpp"

namespace storyworld {

struct Sort {
  std::string name;
  std::vector<std::string> constants;

  bool operator==(const Sort&) const = default;
};

struct Relation {
  std::string name;
  std::vector<std::string> arg_sorts;

  bool operator==(const Relation&) const = default;
};

// A ground atom. The defaulted ordering (relation, then argument names) is
// the canonical atom order.
struct Atom {
  std::string relation;
  std::vector<std::string> args;

  auto operator<=>(const Atom&) const = default;
  bool operator==(const Atom&) const = default;

  std::string to_string() const {
    std::string s = relation + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) s += ",";
      s += args[i];
    }
    return s + ")";
  }
};

class Universe {
 public:
  Universe(std::vector<Sort> sorts, std::vector<Relation> relations)
      : sorts_(std::move(sorts)), relations_(std::move(relations)) {
    std::set<std::string> sort_names;
    for (const auto& sort : sorts_) {
      if (!sort_names.insert(sort.name).second)
        throw SymbolError("duplicate sort '" + sort.name + "'");
      std::set<std::string> seen;
      for (const auto& c : sort.constants)
        if (!seen.insert(c).second)
          throw SymbolError("duplicate constant '" + c + "' in sort '" + sort.name + "'");
    }
    std::set<std::string> rel_names;
    for (const auto& rel : relations_) {
      if (!rel_names.insert(rel.name).second)
        throw SymbolError("duplicate relation '" + rel.name + "'");
      if (rel.arg_sorts.empty())
        throw SymbolError("relation '" + rel.name + "' must have arity >= 1");
      for (const auto& s : rel.arg_sorts)
        if (!sort_names.count(s))
          throw SymbolError("relation '" + rel.name + "' uses undeclared sort '" + s + "'");
    }
    ground();
  }

  static std::shared_ptr<const Universe> make(std::vector<Sort> sorts,
                                              std::vector<Relation> relations) {
    return std::make_shared<const Universe>(std::move(sorts), std::move(relations));
  }

  const std::vector<Sort>& sorts() const { return sorts_; }
  const std::vector<Relation>& relations() const { return relations_; }

  const Sort* find_sort(const std::string& name) const {
    auto it = std::find_if(sorts_.begin(), sorts_.end(),
                           [&](const Sort& s) { return s.name == name; });
    return it == sorts_.end() ? nullptr : &*it;
  }

  const Relation* find_relation(const std::string& name) const {
    auto it = std::find_if(relations_.begin(), relations_.end(),
                           [&](const Relation& r) { return r.name == name; });
    return it == relations_.end() ? nullptr : &*it;
  }

  // Ground atoms in canonical order.
  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t atom_count() const { return atoms_.size(); }

  std::optional<std::size_t> index_of(const Atom& atom) const {
    auto it = index_.find(atom);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Throws SymbolError naming the first problem with `atom`.
  void check_atom(const Atom& atom) const {
    const Relation* rel = find_relation(atom.relation);
    if (!rel) throw SymbolError("unknown relation '" + atom.relation + "'");
    if (rel->arg_sorts.size() != atom.args.size())
      throw SymbolError("relation '" + atom.relation + "' expects " +
                        std::to_string(rel->arg_sorts.size()) + " argument(s), got " +
                        std::to_string(atom.args.size()));
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      const Sort* sort = find_sort(rel->arg_sorts[i]);
      if (std::find(sort->constants.begin(), sort->constants.end(), atom.args[i]) ==
          sort->constants.end())
        throw SymbolError("'" + atom.args[i] + "' is not a constant of sort '" + sort->name +
                          "' (argument " + std::to_string(i + 1) + " of '" + atom.relation +
                          "')");
    }
  }

  std::size_t require_index(const Atom& atom) const {
    if (auto i = index_of(atom)) return *i;
    check_atom(atom);
    throw SymbolError("unknown atom " + atom.to_string());
  }

  bool operator==(const Universe& other) const {
    return sorts_ == other.sorts_ && relations_ == other.relations_;
  }

 private:
  void ground() {
    for (const auto& rel : relations_) {
      std::vector<const Sort*> arg_sorts;
      for (const auto& s : rel.arg_sorts) arg_sorts.push_back(find_sort(s));
      if (std::any_of(arg_sorts.begin(), arg_sorts.end(),
                      [](const Sort* s) { return s->constants.empty(); }))
        continue;
      std::vector<std::size_t> odometer(arg_sorts.size(), 0);
      for (bool more = true; more;) {
        Atom atom{rel.name, {}};
        for (std::size_t i = 0; i < odometer.size(); ++i)
          atom.args.push_back(arg_sorts[i]->constants[odometer[i]]);
        atoms_.push_back(std::move(atom));
        more = false;
        for (std::size_t k = odometer.size(); k-- > 0;) {
          if (++odometer[k] < arg_sorts[k]->constants.size()) {
            more = true;
            break;
          }
          odometer[k] = 0;
        }
      }
    }
    std::sort(atoms_.begin(), atoms_.end());
    for (std::size_t i = 0; i < atoms_.size(); ++i) index_.emplace(atoms_[i], i);
  }

  std::vector<Sort> sorts_;
  std::vector<Relation> relations_;
  std::vector<Atom> atoms_;
  std::map<Atom, std::size_t> index_;
};

using UniversePtr = std::shared_ptr<const Universe>;

inline std::vector<Atom> ground_atoms(const Universe& u) {
  return {u.atoms().begin(), u.atoms().end()};
}

// Propositional formula over ground atoms. Shares immutable nodes, so copies
// are cheap.
class Formula {
 public:
  enum class Kind : std::uint8_t { kConstant, kAtom, kNot, kAnd, kOr, kImplies };

  Formula() : Formula(constant(true)) {}

  static Formula constant(bool value) {
    return Formula(std::make_shared<const Node>(Node{Kind::kConstant, value, {}, {}}));
  }
  static Formula atom(Atom a) {
    return Formula(std::make_shared<const Node>(Node{Kind::kAtom, false, std::move(a), {}}));
  }
  static Formula atom(std::string relation, std::vector<std::string> args) {
    return atom(Atom{std::move(relation), std::move(args)});
  }
  static Formula make(Kind kind, std::vector<Formula> operands) {
    return Formula(std::make_shared<const Node>(Node{kind, false, {}, std::move(operands)}));
  }

  Kind kind() const { return node_->kind; }
  bool constant_value() const { return node_->value; }
  const Atom& atom() const { return node_->atom; }
  std::span<const Formula> operands() const { return node_->operands; }

  bool is_literal() const {
    return kind() == Kind::kAtom || (kind() == Kind::kNot && operands()[0].kind() == Kind::kAtom);
  }

  std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& op : operands()) d = std::max(d, op.depth() + 1);
    return d;
  }

  // Canonical text in the story-file formula syntax.
  std::string to_string() const {
    std::string out;
    write(out);
    return out;
  }

  bool operator==(const Formula& other) const {
    if (node_ == other.node_) return true;
    if (kind() != other.kind()) return false;
    switch (kind()) {
      case Kind::kConstant: return constant_value() == other.constant_value();
      case Kind::kAtom: return atom() == other.atom();
      default:
        return std::equal(operands().begin(), operands().end(), other.operands().begin(),
                          other.operands().end());
    }
  }

 private:
  struct Node {
    Kind kind;
    bool value;
    Atom atom;
    std::vector<Formula> operands;
  };

  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  int precedence() const {
    switch (kind()) {
      case Kind::kImplies: return 1;
      case Kind::kOr: return 2;
      case Kind::kAnd: return 3;
      case Kind::kNot: return 4;
      default: return 5;
    }
  }

  void write_operand(std::string& out, const Formula& op, int min_precedence) const {
    if (op.precedence() < min_precedence) {
      out += '(';
      op.write(out);
      out += ')';
    } else {
      op.write(out);
    }
  }

  void write(std::string& out) const {
    switch (kind()) {
      case Kind::kConstant: out += constant_value() ? "true" : "false"; break;
      case Kind::kAtom: out += atom().to_string(); break;
      case Kind::kNot:
        out += '!';
        write_operand(out, operands()[0], 4);
        break;
      case Kind::kAnd:
      case Kind::kOr: {
        const char* sep = kind() == Kind::kAnd ? " & " : " | ";
        for (std::size_t i = 0; i < operands().size(); ++i) {
          if (i) out += sep;
          write_operand(out, operands()[i], precedence() + 1);
        }
        break;
      }
      case Kind::kImplies:
        write_operand(out, operands()[0], 2);
        out += " -> ";
        write_operand(out, operands()[1], 1);
        break;
    }
  }

  std::shared_ptr<const Node> node_;
};

inline Formula negation(Formula f) { return Formula::make(Formula::Kind::kNot, {std::move(f)}); }

// Negation that strips a leading `!` instead of stacking another one.
inline Formula negate(const Formula& f) {
  if (f.kind() == Formula::Kind::kNot) return f.operands()[0];
  return negation(f);
}

// Empty conjunction is `true`; a single operand is returned as is.
inline Formula conjunction(std::vector<Formula> operands) {
  if (operands.empty()) return Formula::constant(true);
  if (operands.size() == 1) return operands.front();
  return Formula::make(Formula::Kind::kAnd, std::move(operands));
}

// Empty disjunction is `false`; a single operand is returned as is.
inline Formula disjunction(std::vector<Formula> operands) {
  if (operands.empty()) return Formula::constant(false);
  if (operands.size() == 1) return operands.front();
  return Formula::make(Formula::Kind::kOr, std::move(operands));
}

inline Formula implication(Formula antecedent, Formula consequent) {
  return Formula::make(Formula::Kind::kImplies, {std::move(antecedent), std::move(consequent)});
}

inline Formula literal(const Atom& atom, bool value) {
  Formula a = Formula::atom(atom);
  return value ? a : negation(a);
}

// Throws SymbolError if any atom of `f` is not a ground atom of `u`.
inline void check_formula(const Formula& f, const Universe& u) {
  if (f.kind() == Formula::Kind::kAtom) {
    u.require_index(f.atom());
    return;
  }
  for (const auto& op : f.operands()) check_formula(op, u);
}

inline void collect_atoms(const Formula& f, std::set<Atom>& out) {
  if (f.kind() == Formula::Kind::kAtom) out.insert(f.atom());
  for (const auto& op : f.operands()) collect_atoms(op, out);
}

// Worlds carry at most this many atoms; enumeration bounds are capped here.
inline constexpr std::size_t kMaxWorldAtoms = 62;

// A complete truth assignment: atom i of the universe is bit i of `bits`.
class World {
 public:
  World(UniversePtr universe, std::uint64_t bits) : universe_(std::move(universe)), bits_(bits) {
    if (universe_->atom_count() > kMaxWorldAtoms)
      throw BoundError(universe_->atom_count(), kMaxWorldAtoms);
    bits_ &= (std::uint64_t{1} << universe_->atom_count()) - 1;
  }

  const Universe& universe() const { return *universe_; }
  const UniversePtr& universe_ptr() const { return universe_; }
  std::uint64_t bits() const { return bits_; }

  bool value(std::size_t index) const { return (bits_ >> index) & 1U; }
  bool value(const Atom& atom) const { return value(universe_->require_index(atom)); }

  // One literal per ground atom, in canonical atom order.
  std::vector<Formula> literals() const {
    std::vector<Formula> out;
    const auto atoms = universe_->atoms();
    for (std::size_t i = 0; i < atoms.size(); ++i) out.push_back(literal(atoms[i], value(i)));
    return out;
  }

  bool operator==(const World& other) const {
    return bits_ == other.bits_ &&
           (universe_ == other.universe_ || *universe_ == *other.universe_);
  }

 private:
  UniversePtr universe_;
  std::uint64_t bits_;
};

// Direct recursive satisfaction. Throws SymbolError on atoms outside the
// world's universe.
inline bool evaluate(const World& w, const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::kConstant: return f.constant_value();
    case K::kAtom: return w.value(f.atom());
    case K::kNot: return !evaluate(w, f.operands()[0]);
    case K::kAnd:
      return std::all_of(f.operands().begin(), f.operands().end(),
                         [&](const Formula& op) { return evaluate(w, op); });
    case K::kOr:
      return std::any_of(f.operands().begin(), f.operands().end(),
                         [&](const Formula& op) { return evaluate(w, op); });
    case K::kImplies: return !evaluate(w, f.operands()[0]) || evaluate(w, f.operands()[1]);
  }
  return false;
}

struct Limits {
  std::size_t max_atoms = 24;

  void check(const Universe& u) const {
    const std::size_t bound = std::min(max_atoms, kMaxWorldAtoms);
    if (u.atom_count() > bound) throw BoundError(u.atom_count(), bound);
  }
};

namespace detail {

enum class Tri : std::uint8_t { kFalse, kTrue, kUnknown };

// Index-resolved formula for the assignment search.
class CompiledFormula {
 public:
  CompiledFormula(const Formula& f, const Universe& u) { root_ = add(f, u); }

  // Three-valued evaluation under a partial assignment.
  Tri eval(std::uint64_t known, std::uint64_t values) const { return eval(root_, known, values); }

 private:
  struct Node {
    Formula::Kind kind;
    bool value = false;
    std::uint32_t atom = 0;
    std::vector<std::uint32_t> operands;
  };

  std::uint32_t add(const Formula& f, const Universe& u) {
    Node node{f.kind(), f.kind() == Formula::Kind::kConstant && f.constant_value(), 0, {}};
    if (f.kind() == Formula::Kind::kAtom)
      node.atom = static_cast<std::uint32_t>(u.require_index(f.atom()));
    for (const auto& op : f.operands()) node.operands.push_back(add(op, u));
    nodes_.push_back(std::move(node));
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  Tri eval(std::uint32_t id, std::uint64_t known, std::uint64_t values) const {
    const Node& n = nodes_[id];
    using K = Formula::Kind;
    switch (n.kind) {
      case K::kConstant: return n.value ? Tri::kTrue : Tri::kFalse;
      case K::kAtom:
        if (!((known >> n.atom) & 1U)) return Tri::kUnknown;
        return ((values >> n.atom) & 1U) ? Tri::kTrue : Tri::kFalse;
      case K::kNot: {
        Tri t = eval(n.operands[0], known, values);
        return t == Tri::kUnknown ? t : (t == Tri::kTrue ? Tri::kFalse : Tri::kTrue);
      }
      case K::kAnd: {
        Tri result = Tri::kTrue;
        for (auto op : n.operands) {
          Tri t = eval(op, known, values);
          if (t == Tri::kFalse) return Tri::kFalse;
          if (t == Tri::kUnknown) result = Tri::kUnknown;
        }
        return result;
      }
      case K::kOr: {
        Tri result = Tri::kFalse;
        for (auto op : n.operands) {
          Tri t = eval(op, known, values);
          if (t == Tri::kTrue) return Tri::kTrue;
          if (t == Tri::kUnknown) result = Tri::kUnknown;
        }
        return result;
      }
      case K::kImplies: {
        Tri a = eval(n.operands[0], known, values);
        if (a == Tri::kFalse) return Tri::kTrue;
        Tri b = eval(n.operands[1], known, values);
        if (b == Tri::kTrue) return Tri::kTrue;
        if (a == Tri::kTrue && b == Tri::kFalse) return Tri::kFalse;
        return Tri::kUnknown;
      }
    }
    return Tri::kUnknown;
  }

  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
};

// Backtracking search over assignments, most significant atom first with
// `false` tried before `true`, so satisfying assignments are visited in
// ascending integer order. `visit` returns false to stop early. Returns
// false if stopped.
class AssignmentSearch {
 public:
  AssignmentSearch(std::span<const Formula> formulas, const Universe& u)
      : atom_count_(u.atom_count()) {
    for (const auto& f : formulas) compiled_.emplace_back(f, u);
  }

  template <class Visit>
  bool run(Visit&& visit) const {
    return descend(static_cast<int>(atom_count_) - 1, 0, 0, visit);
  }

 private:
  template <class Visit>
  bool descend(int level, std::uint64_t known, std::uint64_t values, Visit& visit) const {
    bool all_true = true;
    for (const auto& f : compiled_) {
      Tri t = f.eval(known, values);
      if (t == Tri::kFalse) return true;
      if (t == Tri::kUnknown) all_true = false;
    }
    if (all_true || level < 0) {
      const std::uint64_t free = std::uint64_t{1} << (level + 1);
      for (std::uint64_t x = 0; x < free; ++x)
        if (!visit(values | x)) return false;
      return true;
    }
    const std::uint64_t bit = std::uint64_t{1} << level;
    if (!descend(level - 1, known | bit, values, visit)) return false;
    return descend(level - 1, known | bit, values | bit, visit);
  }

  std::size_t atom_count_;
  std::vector<CompiledFormula> compiled_;
};

}  // namespace detail

// True iff some world satisfies every formula in `props`.
inline bool consistent(std::span<const Formula> props, const Universe& u, const Limits& limits = {}) {
  limits.check(u);
  bool found = false;
  detail::AssignmentSearch(props, u).run([&](std::uint64_t) {
    found = true;
    return false;
  });
  return found;
}

inline bool entails(std::span<const Formula> props, const Formula& q, const Universe& u,
                    const Limits& limits = {}) {
  std::vector<Formula> extended(props.begin(), props.end());
  extended.push_back(negation(q));
  return !consistent(extended, u, limits);
}

// Greedy deletion: drops every formula whose removal keeps the rest
// inconsistent. The result is a minimal unsatisfiable subset of an
// inconsistent input, or empty when `props` is consistent.
inline std::vector<Formula> minimal_conflict(std::span<const Formula> props, const Universe& u,
                                             const Limits& limits = {}) {
  std::vector<Formula> core(props.begin(), props.end());
  if (consistent(core, u, limits)) return {};
  for (std::size_t i = 0; i < core.size();) {
    std::vector<Formula> rest;
    for (std::size_t j = 0; j < core.size(); ++j)
      if (j != i) rest.push_back(core[j]);
    if (!consistent(rest, u, limits))
      core = std::move(rest);
    else
      ++i;
  }
  return core;
}

}  // namespace storyworld
