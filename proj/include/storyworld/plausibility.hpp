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

// Weak filters and weak ultrafilters over a finite base of worlds.
//
// A subset of the base is a bitmask over the base's canonical world order:
// bit i stands for base[i]. Families are stored either extensionally (a
// membership table over all 2^n masks, n <= kMaxExtensionalBase) or, for
// principal filters, by their generator alone.

#include <boost/dynamic_bitset.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "storyworld/error.hpp"
#include "storyworld/logic.hpp"
#include "storyworld/model_space.hpp"

namespace storyworld {

using WorldMask = std::uint32_t;
using Subset = boost::dynamic_bitset<>;

inline constexpr std::size_t kMaxExtensionalBase = 24;

namespace detail {

inline void check_extensional(std::size_t base_size) {
  if (base_size > kMaxExtensionalBase) throw BoundError(base_size, kMaxExtensionalBase);
}

inline WorldMask full_mask(std::size_t base_size) {
  return static_cast<WorldMask>((std::uint64_t{1} << base_size) - 1);
}

inline std::vector<bool> membership_table(std::span<const WorldMask> members,
                                          std::size_t base_size) {
  check_extensional(base_size);
  std::vector<bool> table(std::size_t{1} << base_size, false);
  const WorldMask full = full_mask(base_size);
  for (auto m : members) {
    if (m & ~full) throw StoryError("filter member is not a subset of the base");
    table[m] = true;
  }
  return table;
}

// Upward closure holds iff adding any single missing world to a member
// yields a member.
inline bool upward_closed(const std::vector<bool>& table, std::size_t base_size) {
  for (WorldMask x = 0; x < table.size(); ++x) {
    if (!table[x]) continue;
    for (std::size_t i = 0; i < base_size; ++i)
      if (!table[x | (WorldMask{1} << i)]) return false;
  }
  return true;
}

inline void add_upward(std::vector<bool>& table, WorldMask y, WorldMask full) {
  const WorldMask free = full & ~y;
  for (WorldMask s = free;; s = (s - 1) & free) {
    table[y | s] = true;
    if (s == 0) break;
  }
}

inline WorldMask to_mask(const Subset& s) {
  WorldMask m = 0;
  for (auto i = s.find_first(); i != Subset::npos; i = s.find_next(i)) m |= WorldMask{1} << i;
  return m;
}

}  // namespace detail

inline Subset to_subset(WorldMask mask, std::size_t base_size) {
  Subset s(base_size);
  for (std::size_t i = 0; i < base_size; ++i)
    if ((mask >> i) & 1U) s.set(i);
  return s;
}

// Non-empty, upward closed, and free of complementary pairs.
inline bool is_weak_filter(std::span<const WorldMask> members, std::size_t base_size) {
  auto table = detail::membership_table(members, base_size);
  if (members.empty()) return false;
  if (!detail::upward_closed(table, base_size)) return false;
  const WorldMask full = detail::full_mask(base_size);
  for (WorldMask x = 0; x < table.size(); ++x)
    if (table[x] && table[full & ~x]) return false;
  return true;
}

// Upward closed, and each subset is a member exactly when its complement is
// not.
inline bool is_weak_ultrafilter(std::span<const WorldMask> members, std::size_t base_size) {
  auto table = detail::membership_table(members, base_size);
  if (!detail::upward_closed(table, base_size)) return false;
  const WorldMask full = detail::full_mask(base_size);
  for (WorldMask x = 0; x < table.size(); ++x)
    if (table[x] == table[full & ~x]) return false;
  return true;
}

// Worlds of `base` where `p` holds.
inline Subset support(const WorldSet& base, const Formula& p) {
  Subset s(base.size());
  for (std::size_t i = 0; i < base.size(); ++i)
    if (evaluate(base[i], p)) s.set(i);
  return s;
}

class WeakFilter {
 public:
  // All supersets of a non-empty generator.
  static WeakFilter principal(WorldSet base, Subset generator) {
    if (generator.size() != base.size())
      throw StoryError("principal generator does not match the base size");
    if (generator.none()) throw StoryError("principal generator must be non-empty");
    WeakFilter f(std::move(base));
    f.generator_ = std::move(generator);
    return f;
  }

  // The filter whose only member is the base itself.
  static WeakFilter top(WorldSet base) {
    Subset all(base.size());
    all.set();
    return principal(std::move(base), std::move(all));
  }

  static WeakFilter from_members(WorldSet base, std::span<const WorldMask> members) {
    if (!is_weak_filter(members, base.size()))
      throw StoryError("family is not a weak filter over the base");
    WeakFilter f(std::move(base));
    f.table_ = detail::membership_table(members, f.base_.size());
    return f;
  }

  const WorldSet& base() const { return base_; }
  bool is_principal() const { return generator_.has_value(); }
  const std::optional<Subset>& generator() const { return generator_; }

  bool contains(const Subset& x) const {
    if (x.size() != base_.size()) throw StoryError("subset does not match the base size");
    if (generator_) return generator_->is_subset_of(x);
    return table_[detail::to_mask(x)];
  }

  bool contains(WorldMask x) const {
    detail::check_extensional(base_.size());
    return contains(to_subset(x, base_.size()));
  }

  // Every member as a mask, ascending. Needs an extensional-size base.
  std::vector<WorldMask> members() const {
    detail::check_extensional(base_.size());
    std::vector<WorldMask> out;
    const WorldMask count = detail::full_mask(base_.size());
    for (WorldMask x = 0;; ++x) {
      if (contains(x)) out.push_back(x);
      if (x == count) break;
    }
    return out;
  }

  bool is_ultra() const {
    if (generator_) return generator_->count() == 1;
    const WorldMask full = detail::full_mask(base_.size());
    for (WorldMask x = 0; x < table_.size(); ++x)
      if (table_[x] == table_[full & ~x]) return false;
    return true;
  }

 private:
  explicit WeakFilter(WorldSet base) : base_(std::move(base)) {
    if (base_.empty()) throw StoryError("a filter needs a non-empty base");
  }

  WorldSet base_;
  std::optional<Subset> generator_;
  std::vector<bool> table_;
};

class WeakUltrafilter {
 public:
  explicit WeakUltrafilter(WeakFilter f) : filter_(std::move(f)) {
    if (!filter_.is_ultra()) throw StoryError("filter is not a weak ultrafilter");
  }

  const WeakFilter& filter() const { return filter_; }
  const WorldSet& base() const { return filter_.base(); }
  bool contains(const Subset& x) const { return filter_.contains(x); }
  bool contains(WorldMask x) const { return filter_.contains(x); }
  std::vector<WorldMask> members() const { return filter_.members(); }

 private:
  WeakFilter filter_;
};

// Decides every subset left open by `f`, visiting masks in ascending order.
// Of an undecided pair {X, base minus X}, the side holding the lower-indexed
// world joins, with its upward closure.
inline WeakUltrafilter extend_to_ultrafilter(const WeakFilter& f) {
  if (f.is_ultra()) return WeakUltrafilter(f);
  const std::size_t n = f.base().size();
  detail::check_extensional(n);
  const WorldMask full = detail::full_mask(n);
  std::vector<bool> table(std::size_t{1} << n, false);
  for (auto m : f.members()) table[m] = true;
  for (WorldMask x = 0;; ++x) {
    const WorldMask complement = full & ~x;
    if (!table[x] && !table[complement]) {
      const WorldMask lowest = (x & 1U) ? x : complement;
      detail::add_upward(table, lowest, full);
    }
    if (x == full) break;
  }
  std::vector<WorldMask> members;
  for (WorldMask x = 0;; ++x) {
    if (table[x]) members.push_back(x);
    if (x == full) break;
  }
  return WeakUltrafilter(WeakFilter::from_members(f.base(), members));
}

// Ground literals in canonical atom order, positive before negative.
inline std::vector<Formula> ground_literals(const Universe& u) {
  std::vector<Formula> out;
  for (const auto& a : u.atoms()) {
    out.push_back(literal(a, true));
    out.push_back(literal(a, false));
  }
  return out;
}

// The candidates true in every world of `member`.
inline std::vector<Formula> plausible_facts(const WorldSet& base, const Subset& member,
                                            std::span<const Formula> candidates) {
  if (member.size() != base.size()) throw StoryError("subset does not match the base size");
  if (member.none()) throw StoryError("plausible_facts of an empty set of worlds");
  std::vector<Formula> out;
  for (const auto& c : candidates) {
    bool everywhere = true;
    for (auto i = member.find_first(); i != Subset::npos && everywhere; i = member.find_next(i))
      everywhere = evaluate(base[i], c);
    if (everywhere) out.push_back(c);
  }
  return out;
}

inline std::vector<Formula> plausible_facts(const WorldSet& base, const Subset& member) {
  return plausible_facts(base, member, ground_literals(base.universe()));
}

enum class Plausibility { kPlausible, kImplausible, kUndetermined };

inline const char* to_string(Plausibility p) {
  switch (p) {
    case Plausibility::kPlausible: return "plausible";
    case Plausibility::kImplausible: return "implausible";
    case Plausibility::kUndetermined: return "undetermined";
  }
  return "undetermined";
}

inline Plausibility plausibility_status(const WeakFilter& f, const Formula& p) {
  Subset s = support(f.base(), p);
  if (f.contains(s)) return Plausibility::kPlausible;
  s.flip();
  if (f.contains(s)) return Plausibility::kImplausible;
  return Plausibility::kUndetermined;
}

// Atom-wise vote: an atom is true iff the worlds where it holds form a member.
inline World ultraproduct(const WeakUltrafilter& uf) {
  const WorldSet& base = uf.base();
  const auto atoms = base.universe().atoms();
  std::uint64_t bits = 0;
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    Subset s(base.size());
    for (std::size_t i = 0; i < base.size(); ++i)
      if ((base.assignments()[i] >> a) & 1U) s.set(i);
    if (uf.contains(s)) bits |= std::uint64_t{1} << a;
  }
  return World(base.universe_ptr(), bits);
}

}  // namespace storyworld
