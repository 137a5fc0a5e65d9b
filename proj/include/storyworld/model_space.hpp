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

// Possible-worlds sets: every world satisfying a fabula, set operations on
// them, and exact truth proportions under the counting measure.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "storyworld/error.hpp"
#include "storyworld/logic.hpp"
#include "storyworld/rational.hpp"
#include "storyworld/story.hpp"

namespace storyworld {

// Worlds over one universe in canonical order (assignment integer ascending).
class WorldSet {
 public:
  WorldSet(UniversePtr universe, std::vector<std::uint64_t> assignments)
      : universe_(std::move(universe)), bits_(std::move(assignments)) {
    if (universe_->atom_count() > kMaxWorldAtoms)
      throw BoundError(universe_->atom_count(), kMaxWorldAtoms);
    const std::uint64_t mask = (std::uint64_t{1} << universe_->atom_count()) - 1;
    for (auto b : bits_)
      if (b & ~mask) throw StoryError("assignment has bits beyond the universe's atoms");
    std::sort(bits_.begin(), bits_.end());
    bits_.erase(std::unique(bits_.begin(), bits_.end()), bits_.end());
  }

  static WorldSet of(const std::vector<World>& worlds) {
    if (worlds.empty()) throw StoryError("WorldSet::of needs at least one world");
    std::vector<std::uint64_t> bits;
    for (const auto& w : worlds) {
      if (!(w.universe() == worlds.front().universe())) throw StoryError("universe mismatch");
      bits.push_back(w.bits());
    }
    return WorldSet(worlds.front().universe_ptr(), std::move(bits));
  }

  const Universe& universe() const { return *universe_; }
  const UniversePtr& universe_ptr() const { return universe_; }
  std::span<const std::uint64_t> assignments() const { return bits_; }
  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }

  World operator[](std::size_t i) const { return World(universe_, bits_[i]); }

  std::optional<std::size_t> index_of(std::uint64_t bits) const {
    auto it = std::lower_bound(bits_.begin(), bits_.end(), bits);
    if (it == bits_.end() || *it != bits) return std::nullopt;
    return static_cast<std::size_t>(it - bits_.begin());
  }
  bool contains(const World& w) const {
    return w.universe() == *universe_ && index_of(w.bits()).has_value();
  }

  bool operator==(const WorldSet& other) const {
    return bits_ == other.bits_ && *universe_ == *other.universe_;
  }

 private:
  UniversePtr universe_;
  std::vector<std::uint64_t> bits_;
};

inline WorldSet enumerate_models(std::span<const Formula> formulas, const UniversePtr& universe,
                                 const Limits& limits = {}) {
  limits.check(*universe);
  std::vector<std::uint64_t> found;
  detail::AssignmentSearch(formulas, *universe).run([&](std::uint64_t bits) {
    found.push_back(bits);
    return true;
  });
  return WorldSet(universe, std::move(found));
}

// Every world over the fabula's universe that satisfies all its propositions.
inline WorldSet enumerate_models(const Fabula& f) {
  return enumerate_models(f.formulas(), f.universe_ptr(), f.limits());
}

inline WorldSet all_worlds(const UniversePtr& universe, const Limits& limits = {}) {
  return enumerate_models(std::span<const Formula>{}, universe, limits);
}

inline WorldSet intersect(const WorldSet& a, const WorldSet& b) {
  if (!(a.universe() == b.universe())) throw StoryError("intersect: universe mismatch");
  std::vector<std::uint64_t> out;
  std::set_intersection(a.assignments().begin(), a.assignments().end(), b.assignments().begin(),
                        b.assignments().end(), std::back_inserter(out));
  return WorldSet(a.universe_ptr(), std::move(out));
}

inline std::size_t count_satisfying(const WorldSet& s, const Formula& q) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (evaluate(s[i], q)) ++n;
  return n;
}

// Fraction of worlds in `s` where `q` holds.
inline Rational truth_proportion(const WorldSet& s, const Formula& q) {
  if (s.empty()) throw StoryError("truth_proportion of an empty world set");
  check_formula(q, s.universe());
  return Rational(static_cast<std::int64_t>(count_satisfying(s, q)),
                  static_cast<std::int64_t>(s.size()));
}

// True iff every world of `shared` satisfies every formula in `rho`.
inline bool agreement_check(const WorldSet& shared, std::span<const Formula> rho) {
  for (std::size_t i = 0; i < shared.size(); ++i) {
    const World w = shared[i];
    for (const auto& f : rho)
      if (!evaluate(w, f)) return false;
  }
  return true;
}

namespace detail {

// Uniform draw in [0, n) by rejection; independent of the standard
// library's distribution implementations so samples are reproducible.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace detail

// Deterministic uniform subset of min(k, |s|) worlds.
inline WorldSet sample_worlds(const WorldSet& s, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw StoryError("sample size must be at least 1");
  if (s.empty()) throw StoryError("cannot sample from an empty world set");
  if (k >= s.size()) return s;
  std::vector<std::uint64_t> pool(s.assignments().begin(), s.assignments().end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    auto j = i + detail::bounded_draw(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return WorldSet(s.universe_ptr(), std::move(pool));
}

// The k highest-scoring worlds; ties keep canonical order.
inline WorldSet sample_worlds(const WorldSet& s, std::size_t k,
                              const std::function<double(const World&)>& score) {
  if (k == 0) throw StoryError("sample size must be at least 1");
  if (s.empty()) throw StoryError("cannot sample from an empty world set");
  if (k >= s.size()) return s;
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < s.size(); ++i) ranked.emplace_back(score(s[i]), i);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::uint64_t> chosen;
  for (std::size_t i = 0; i < k; ++i) chosen.push_back(s.assignments()[ranked[i].second]);
  return WorldSet(s.universe_ptr(), std::move(chosen));
}

}  // namespace storyworld
