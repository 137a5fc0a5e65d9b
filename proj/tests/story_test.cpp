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

#include <gtest/gtest.h>

#include <random>

#include "storyworld/story.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace storyworld {
namespace {

using testing::atom;

ParseError parse_error_of(std::string_view text) {
  try {
    parse_story(text);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no ParseError for:\n" << text;
  return ParseError(0, 0, "");
}

TEST(ParseStory, CardsFixture) {
  Timeline tl = parse_story(testing::kCardsStory);
  ASSERT_EQ(tl.steps.size(), 2u);
  EXPECT_EQ(tl.universe->atom_count(), 8u);
  EXPECT_EQ(tl.steps[0].size(), 2u);
  EXPECT_EQ(tl.steps[1].size(), 3u);
  EXPECT_TRUE(tl.steps[0].contains(atom("wears", {"jay", "blue"})));
  EXPECT_TRUE(tl.steps[0].contains(atom("plays", {"ali", "jay"})));
  EXPECT_TRUE(tl.steps[1].contains(atom("wears", {"ali", "blue"})));
  EXPECT_EQ(tl.steps[0], testing::cards_f1(tl.universe));
}

TEST(ParseStory, CommentsBlankLinesAndOperators) {
  Timeline tl = parse_story(R"(# header
sort c: a, b   # two constants
rel p(c)

t=0:
  + p(a) -> !p(b)   # implication
  + (p(a) | p(b)) & true
t=1:
  - p(a) -> !p(b)
  +? p(b)
)");
  ASSERT_EQ(tl.steps.size(), 2u);
  EXPECT_TRUE(tl.steps[0].contains(implication(atom("p", {"a"}), negation(atom("p", {"b"})))));
  EXPECT_EQ(tl.steps[1].size(), 2u);
  const Proposition* pb = tl.steps[1].find(atom("p", {"b"}));
  ASSERT_NE(pb, nullptr);
  EXPECT_FALSE(pb->important);
}

TEST(ParseStory, EmptyStepKeepsPreviousFabula) {
  Timeline tl = parse_story("sort c: a\nrel p(c)\nt=0:\n  + p(a)\nt=1:\n");
  ASSERT_EQ(tl.steps.size(), 2u);
  EXPECT_EQ(tl.steps[0], tl.steps[1]);
}

TEST(ParseStory, EmptyTimelineIsAParseError) {
  auto e = parse_error_of("sort c: a\nrel p(c)\n");
  EXPECT_NE(e.message().find("empty timeline"), std::string::npos);
  parse_error_of("");
}

TEST(ParseStory, ErrorsCarryLineAndColumn) {
  {
    auto e = parse_error_of("sort c: a\nrel p(c)\nt=0:\n  + q(a)\n");
    EXPECT_EQ(e.line(), 4u);
    EXPECT_EQ(e.column(), 5u);
    EXPECT_NE(e.message().find("relation"), std::string::npos);
  }
  {
    auto e = parse_error_of("sort c: a\nrel p(c)\nt=0:\n  + p(zz)\n");
    EXPECT_EQ(e.line(), 4u);
    EXPECT_EQ(e.column(), 7u);
  }
  {
    auto e = parse_error_of("sort c: a\nrel p(d)\nt=0:\n");
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 7u);
  }
  {
    auto e = parse_error_of("sort c: a\nrel p(c)\nt=1:\n");
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 3u);
  }
  {
    auto e = parse_error_of("sort c: a\nrel p(c)\nt=0:\n  + p(a) &\n");
    EXPECT_EQ(e.line(), 4u);
  }
  {
    auto e = parse_error_of("sort c: a\nt=0:\nrel p(c)\n");
    EXPECT_EQ(e.line(), 3u);
  }
  {
    auto e = parse_error_of("sort c: a\nrel p(c)\n  + p(a)\nt=0:\n");
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseStory, AddRemoveConflictInOneBlock) {
  auto e = parse_error_of("sort c: a\nrel p(c)\nt=0:\n  + p(a)\nt=1:\n  + p(a)\n  - p(a)\n");
  EXPECT_EQ(e.line(), 7u);
  EXPECT_NE(e.message().find("conflict"), std::string::npos);
}

TEST(ParseStory, RemovingSomethingNeverAssertedIsAnError) {
  auto e = parse_error_of("sort c: a\nrel p(c)\nt=0:\n  - p(a)\n");
  EXPECT_EQ(e.line(), 4u);
}

TEST(ParseStory, InconsistentStepNamesStepAndConflict) {
  const char* text = "sort c: a, b\nrel p(c)\nt=0:\n  + p(b)\nt=1:\n  + p(a)\n  + !p(a)\n";
  try {
    parse_story(text);
    FAIL() << "expected StepInconsistencyError";
  } catch (const StepInconsistencyError& e) {
    EXPECT_EQ(e.step(), 1u);
    EXPECT_EQ(e.line(), 5u);
    EXPECT_EQ(e.conflict(), (std::vector<std::string>{"!p(a)", "p(a)"}));
  }
}

TEST(ParseStory, BoundIsEnforced) {
  std::string text = "sort c: a, b, c, d, e\nrel p(c, c)\nt=0:\n";
  EXPECT_THROW(parse_story(text), BoundError);
  EXPECT_EQ(parse_story(text, Limits{25}).universe->atom_count(), 25u);
}

TEST(Fabula, CanonicalOrderAndDuplicates) {
  auto u = testing::cards_universe();
  const Formula a = atom("wears", {"jay", "blue"}), b = atom("plays", {"ali", "jay"});
  Fabula f(u, {{a, false}, {b, true}, {a, true}});
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.keys()[0], "plays(ali,jay)");
  EXPECT_EQ(f.keys()[1], "wears(jay,blue)");
  EXPECT_TRUE(f.find(a)->important);
  EXPECT_EQ(f, Fabula::of(u, {b, a}));
}

TEST(Fabula, InconsistentConstructionThrows) {
  auto u = testing::cards_universe();
  const Formula a = atom("wears", {"jay", "blue"});
  EXPECT_THROW(Fabula::of(u, {a, negation(a)}), InconsistencyError);
  EXPECT_THROW(Fabula::of(u, {atom("wears", {"nobody", "blue"})}), SymbolError);
}

TEST(Transition, DeltaOfFixtureStepsIsTheSingleAddition) {
  Timeline tl = parse_story(testing::kCardsStory);
  TransitionEdit d = delta(tl.steps[0], tl.steps[1]);
  ASSERT_EQ(d.additions().size(), 1u);
  EXPECT_EQ(d.additions()[0].formula, atom("wears", {"ali", "blue"}));
  EXPECT_TRUE(d.removals().empty());
  EXPECT_EQ(apply_transition(tl.steps[0], d), tl.steps[1]);
  TransitionEdit back = delta(tl.steps[1], tl.steps[0]);
  EXPECT_TRUE(back.additions().empty());
  ASSERT_EQ(back.removals().size(), 1u);
}

TEST(Transition, ApplyRejectsInconsistency) {
  auto u = testing::cards_universe();
  Fabula f1 = testing::cards_f1(u);
  try {
    apply_transition(f1, TransitionEdit::adding({negation(atom("wears", {"jay", "blue"}))}));
    FAIL();
  } catch (const InconsistencyError& e) {
    EXPECT_EQ(e.conflict(), (std::vector<std::string>{"!wears(jay,blue)", "wears(jay,blue)"}));
  }
}

TEST(Transition, RemovingAnAbsentFormulaIsANoOp) {
  auto u = testing::cards_universe();
  Fabula f1 = testing::cards_f1(u);
  TransitionEdit e({}, {atom("wears", {"ali", "red"})});
  EXPECT_EQ(apply_transition(f1, e), f1);
}

TEST(Transition, EditCannotAddAndRemoveTheSameFormula) {
  const Formula a = atom("p", {"c0"});
  EXPECT_THROW(TransitionEdit({{a, true}}, {a}), StoryError);
}

TEST(Transition, DeltaTracksImportanceChanges) {
  auto u = testing::unary_universe(2);
  const Formula a = atom("p", {"c0"});
  Fabula x(u, {{a, true}}), y(u, {{a, false}});
  TransitionEdit d = delta(x, y);
  ASSERT_EQ(d.additions().size(), 1u);
  EXPECT_FALSE(d.additions()[0].important);
  EXPECT_EQ(apply_transition(x, d), y);
}

Timeline random_timeline(std::mt19937_64& rng) {
  auto u = testing::random_universe(rng, 10);
  std::vector<Fabula> steps;
  Fabula cur = Fabula::empty(u);
  const std::size_t n = 1 + rng() % 4;
  while (steps.size() < n) {
    std::vector<Proposition> adds;
    std::vector<Formula> removes;
    for (const auto& p : cur.propositions())
      if (rng() % 3 == 0) removes.push_back(p.formula);
    const std::size_t k = rng() % 3;
    for (std::size_t i = 0; i < k; ++i) {
      Formula f = testing::random_formula(rng, *u, 2);
      bool clash = false;
      for (const auto& r : removes) clash = clash || r == f;
      if (!clash) adds.push_back({f, rng() % 4 != 0});
    }
    try {
      cur = apply_transition(cur, TransitionEdit(adds, removes));
      steps.push_back(cur);
    } catch (const InconsistencyError&) {
    }
  }
  return Timeline{u, steps};
}

TEST(StoryProperties, SerializeThenParseRoundTrips) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 200; ++i) {
    Timeline tl = random_timeline(rng);
    const std::string text = serialize_story(tl);
    Timeline back = parse_story(text);
    ASSERT_EQ(back, tl) << text;
    EXPECT_EQ(serialize_story(back), text);
  }
}

TEST(StoryProperties, DeltaThenApplyReconstructs) {
  std::mt19937_64 rng(78);
  for (int i = 0; i < 200; ++i) {
    Timeline tl = random_timeline(rng);
    for (std::size_t t = 1; t < tl.steps.size(); ++t)
      EXPECT_EQ(apply_transition(tl.steps[t - 1], delta(tl.steps[t - 1], tl.steps[t])), tl.steps[t]);
  }
}

TEST(ParseFormula, PrecedenceAndAssociativity) {
  auto u = testing::unary_universe(3);
  const Formula a = atom("p", {"c0"}), b = atom("p", {"c1"}), c = atom("p", {"c2"});
  EXPECT_EQ(parse_formula("p(c0) | p(c1) & p(c2)", *u), disjunction({a, conjunction({b, c})}));
  EXPECT_EQ(parse_formula("p(c0) -> p(c1) -> p(c2)", *u), implication(a, implication(b, c)));
  EXPECT_EQ(parse_formula("!p(c0) & p(c1)", *u), conjunction({negation(a), b}));
  EXPECT_THROW(parse_formula("p(c0) p(c1)", *u), ParseError);
  EXPECT_THROW(parse_formula("p(c0, c1)", *u), ParseError);
}

TEST(ParseFormula, PrintedTextReparsesToTheSameFormula) {
  std::mt19937_64 rng(9);
  auto u = testing::unary_universe(4);
  for (int i = 0; i < 500; ++i) {
    Formula f = testing::random_formula(rng, *u, 4);
    EXPECT_EQ(parse_formula(f.to_string(), *u), f) << f.to_string();
  }
}

}  // namespace
}  // namespace storyworld
