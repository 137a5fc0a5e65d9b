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

// Narrator-to-Reader conveyance: compression of a world into a fabula (phi),
// transmission through a channel (d), reconstruction of the Reader's world
// set (psi), fabula transitions over time (zeta), and the accuracy check that
// compares the mediated path against the Narrator's world.

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "storyworld/error.hpp"
#include "storyworld/logic.hpp"
#include "storyworld/model_space.hpp"
#include "storyworld/plausibility.hpp"
#include "storyworld/rational.hpp"
#include "storyworld/story.hpp"

namespace storyworld {

using RelationMap = std::map<std::string, std::string>;

struct IdentityChannel {};
struct DropChannel {
  std::vector<Formula> formulas;
};
struct RenameChannel {
  RelationMap relations;
};
struct CorruptChannel {
  std::vector<Formula> formulas;
};

class Channel {
 public:
  using Kind = std::variant<IdentityChannel, DropChannel, RenameChannel, CorruptChannel>;

  static Channel identity() { return Channel(IdentityChannel{}); }
  static Channel drop(std::vector<Formula> formulas) { return Channel(DropChannel{std::move(formulas)}); }
  static Channel corrupt(std::vector<Formula> formulas) {
    return Channel(CorruptChannel{std::move(formulas)});
  }
  static Channel rename(RelationMap relations) {
    std::set<std::string> targets;
    for (const auto& [from, to] : relations)
      if (!targets.insert(to).second)
        throw StoryError("rename channel maps two relations onto '" + to + "'");
    return Channel(RenameChannel{std::move(relations)});
  }

  const Kind& kind() const { return kind_; }
  // Reserved for stochastic channels; no current channel reads it.
  std::uint64_t seed = 0;

  // Relation correspondence between Narrator and Reader vocabularies.
  RelationMap correspondence() const {
    if (auto* r = std::get_if<RenameChannel>(&kind_)) return r->relations;
    return {};
  }

  // The formulas a drop or corrupt channel acts on.
  std::vector<Formula> targets() const {
    if (auto* d = std::get_if<DropChannel>(&kind_)) return d->formulas;
    if (auto* c = std::get_if<CorruptChannel>(&kind_)) return c->formulas;
    return {};
  }

  // The Narrator universe as the Reader sees it: relations renamed.
  UniversePtr reader_universe(const UniversePtr& narrator) const {
    auto* r = std::get_if<RenameChannel>(&kind_);
    if (!r) return narrator;
    std::vector<Relation> relations = narrator->relations();
    for (auto& rel : relations)
      if (auto it = r->relations.find(rel.name); it != r->relations.end()) rel.name = it->second;
    return Universe::make(narrator->sorts(), std::move(relations));
  }

  // What the Reader receives for one formula; nullopt when dropped.
  std::optional<Formula> carry(const Formula& f) const {
    if (auto* d = std::get_if<DropChannel>(&kind_)) {
      for (const auto& g : d->formulas)
        if (g == f) return std::nullopt;
      return f;
    }
    if (auto* c = std::get_if<CorruptChannel>(&kind_)) {
      for (const auto& g : c->formulas)
        if (g == f) return negate(f);
      return f;
    }
    if (auto* r = std::get_if<RenameChannel>(&kind_)) return rename_atoms(f, r->relations);
    return f;
  }

  static Formula rename_atoms(const Formula& f, const RelationMap& relations) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::kConstant: return f;
      case K::kAtom: {
        auto it = relations.find(f.atom().relation);
        if (it == relations.end()) return f;
        return Formula::atom(it->second, f.atom().args);
      }
      default: {
        std::vector<Formula> ops;
        for (const auto& op : f.operands()) ops.push_back(rename_atoms(op, relations));
        return Formula::make(f.kind(), std::move(ops));
      }
    }
  }

 private:
  explicit Channel(Kind kind) : kind_(std::move(kind)) {}

  Kind kind_;
};

// Checks that every Narrator relation maps to a Reader relation with the
// same argument sorts.
inline void check_correspondence(const Universe& narrator, const Universe& reader,
                                 const RelationMap& correspondence) {
  for (const auto& rel : narrator.relations()) {
    auto it = correspondence.find(rel.name);
    const std::string& target = it == correspondence.end() ? rel.name : it->second;
    const Relation* mapped = reader.find_relation(target);
    if (!mapped)
      throw StoryError("relation '" + rel.name + "' maps to '" + target +
                       "', which the Reader universe does not declare");
    if (mapped->arg_sorts != rel.arg_sorts)
      throw StoryError("relation '" + rel.name + "' maps to '" + target +
                       "' with a different signature");
  }
}

inline Atom translate_atom(const Atom& atom, const RelationMap& correspondence) {
  auto it = correspondence.find(atom.relation);
  return it == correspondence.end() ? atom : Atom{it->second, atom.args};
}

// Carries a Narrator world into the Reader vocabulary.
inline World translate_world(const World& w, const RelationMap& correspondence,
                             const UniversePtr& reader) {
  check_correspondence(w.universe(), *reader, correspondence);
  std::uint64_t bits = 0;
  const auto atoms = w.universe().atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (w.value(i)) bits |= std::uint64_t{1} << reader->require_index(translate_atom(atoms[i], correspondence));
  return World(reader, bits);
}

using AtomPredicate = std::function<bool(const Atom&)>;

inline AtomPredicate accept_all() {
  return [](const Atom&) { return true; };
}
inline AtomPredicate accept_none() {
  return [](const Atom&) { return false; };
}
inline AtomPredicate relation_is(std::string name) {
  return [name = std::move(name)](const Atom& a) { return a.relation == name; };
}

// phi: the literals of `w` whose atoms pass `importance`.
inline Fabula compress_phi(const World& w, const AtomPredicate& importance, Limits limits = {}) {
  std::vector<Proposition> props;
  const auto atoms = w.universe().atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (importance(atoms[i])) props.push_back({literal(atoms[i], w.value(i)), true});
  return Fabula(w.universe_ptr(), std::move(props), limits);
}

struct Transmission {
  Fabula fabula;
  std::vector<std::string> warnings;
};

// d: the Reader's copy of `f`. A drop or corrupt target absent from `f` is
// reported as a warning. An inconsistent result throws InconsistencyError.
inline Transmission transmit_d(const Fabula& f, const Channel& c, UniversePtr reader = nullptr) {
  if (!reader) reader = c.reader_universe(f.universe_ptr());
  check_correspondence(f.universe(), *reader, c.correspondence());
  std::vector<std::string> warnings;
  for (const auto& target : c.targets())
    if (!f.contains(target))
      warnings.push_back("channel target " + target.to_string() + " is not in the fabula");
  std::vector<Proposition> props;
  for (const auto& p : f.propositions())
    if (auto carried = c.carry(p.formula)) props.push_back({*carried, p.important});
  return {Fabula(reader, std::move(props), f.limits()), std::move(warnings)};
}

struct ReaderState {
  std::size_t step = 0;
  Fabula fabula;
  WorldSet worlds;
  WeakFilter filter;
  // Ground literals decided by every world, canonical atom order.
  std::vector<Formula> beliefs;
  // The zeta edit that produced `fabula` from the previous step.
  TransitionEdit edit;
};

// Literals true in every world of a non-empty set, computed on assignment
// bits. Agrees with plausible_facts over the whole set.
inline std::vector<Formula> decided_literals(const WorldSet& s) {
  if (s.empty()) throw StoryError("decided_literals of an empty world set");
  std::uint64_t all_true = ~std::uint64_t{0};
  std::uint64_t all_false = ~std::uint64_t{0};
  for (auto b : s.assignments()) {
    all_true &= b;
    all_false &= ~b;
  }
  std::vector<Formula> out;
  const auto atoms = s.universe().atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if ((all_true >> i) & 1U) out.push_back(literal(atoms[i], true));
    if ((all_false >> i) & 1U) out.push_back(literal(atoms[i], false));
  }
  return out;
}

// psi: the Reader's world set for `f`, with the principal filter generated
// by the whole set (plausible = decided by every world).
inline ReaderState reconstruct_psi(const Fabula& f, std::size_t step = 0, TransitionEdit edit = {}) {
  WorldSet worlds = enumerate_models(f);
  if (worlds.empty()) throw InconsistencyError("reader fabula is inconsistent", {});
  auto beliefs = decided_literals(worlds);
  WeakFilter filter = WeakFilter::top(worlds);
  return ReaderState{step, f, std::move(worlds), std::move(filter), std::move(beliefs),
                     std::move(edit)};
}

struct ConveyanceReport {
  std::size_t matched = 0;
  std::size_t mismatched = 0;
  std::size_t undetermined = 0;
  // matched / (matched + mismatched); 1 when nothing is decided.
  Rational accuracy{1};
  std::vector<Atom> mismatching;
  std::vector<Atom> undetermined_atoms;
  bool commutes = true;
};

// Compares each atom of the Narrator's world with the Reader's belief about
// the corresponding atom.
inline ConveyanceReport accuracy_report(const World& narrator, const ReaderState& reader,
                                        const RelationMap& correspondence = {}) {
  const Universe& ru = reader.fabula.universe();
  check_correspondence(narrator.universe(), ru, correspondence);
  std::set<std::string> beliefs;
  for (const auto& b : reader.beliefs) beliefs.insert(b.to_string());
  ConveyanceReport report;
  const auto atoms = narrator.universe().atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Atom mapped = translate_atom(atoms[i], correspondence);
    ru.require_index(mapped);
    const bool truth = narrator.value(i);
    if (beliefs.count(literal(mapped, truth).to_string())) {
      ++report.matched;
    } else if (beliefs.count(literal(mapped, !truth).to_string())) {
      ++report.mismatched;
      report.mismatching.push_back(atoms[i]);
    } else {
      ++report.undetermined;
      report.undetermined_atoms.push_back(atoms[i]);
    }
  }
  const std::size_t decided = report.matched + report.mismatched;
  if (decided > 0)
    report.accuracy = Rational(static_cast<std::int64_t>(report.matched),
                               static_cast<std::int64_t>(decided));
  report.commutes = report.mismatched == 0;
  return report;
}

struct Evolution {
  std::vector<ReaderState> states;
  std::vector<std::string> warnings;
};

// Runs the timeline through the channel step by step: the Narrator's delta
// at each step is carried through `c` and applied to the Reader's fabula.
// Throws StepInconsistencyError naming the first step whose Reader fabula is
// inconsistent.
inline Evolution evolve(const Timeline& timeline, const Channel& c, UniversePtr reader = nullptr) {
  if (timeline.steps.empty()) throw StoryError("evolve needs a non-empty timeline");
  if (!reader) reader = c.reader_universe(timeline.universe);
  check_correspondence(*timeline.universe, *reader, c.correspondence());
  const Limits limits = timeline.steps.front().limits();

  Evolution out;
  std::set<std::string> touched;
  Fabula narrator_prev = Fabula::empty(timeline.universe, limits);
  Fabula reader_prev = Fabula::empty(reader, limits);
  for (std::size_t t = 0; t < timeline.steps.size(); ++t) {
    const TransitionEdit narrator_edit = delta(narrator_prev, timeline.steps[t]);
    for (const auto& target : c.targets()) {
      const auto key = target.to_string();
      for (const auto& p : narrator_edit.additions())
        if (p.formula == target) touched.insert(key);
      for (const auto& r : narrator_edit.removals())
        if (r == target) touched.insert(key);
    }
    std::vector<Proposition> additions;
    for (const auto& p : narrator_edit.additions())
      if (auto carried = c.carry(p.formula)) additions.push_back({*carried, p.important});
    std::vector<Formula> removals;
    for (const auto& r : narrator_edit.removals())
      if (auto carried = c.carry(r)) removals.push_back(*carried);

    Fabula next = reader_prev;
    TransitionEdit reader_edit;
    try {
      reader_edit = TransitionEdit(std::move(additions), std::move(removals));
      next = apply_transition(reader_prev, reader_edit);
    } catch (const InconsistencyError& e) {
      throw StepInconsistencyError(t, 0, e.conflict());
    } catch (const StoryError& e) {
      throw StoryError("step t=" + std::to_string(t) + ": " + e.what());
    }
    out.states.push_back(reconstruct_psi(next, t, reader_edit));
    narrator_prev = timeline.steps[t];
    reader_prev = std::move(next);
  }
  for (const auto& target : c.targets())
    if (!touched.count(target.to_string()))
      out.warnings.push_back("channel target " + target.to_string() +
                             " never appears in the timeline");
  return out;
}

}  // namespace storyworld
