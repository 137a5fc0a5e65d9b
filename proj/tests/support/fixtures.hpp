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

#include <string>
#include <vector>

#include "storyworld/storyworld.hpp"

namespace storyworld::testing {

inline constexpr const char* kCardsStory = R"(sort person: jay, ali
sort color: blue, red
rel wears(person, color)
rel plays(person, person)

t=0:
  + wears(jay,blue)
  + plays(ali,jay)
t=1:
  + wears(ali,blue)
)";

inline UniversePtr cards_universe() {
  return Universe::make({{"person", {"jay", "ali"}}, {"color", {"blue", "red"}}},
                        {{"wears", {"person", "color"}}, {"plays", {"person", "person"}}});
}

inline Formula atom(const std::string& rel, std::vector<std::string> args) {
  return Formula::atom(rel, std::move(args));
}

// {wears(jay,blue), plays(ali,jay)}
inline Fabula cards_f1(const UniversePtr& u) {
  return Fabula::of(u, {atom("wears", {"jay", "blue"}), atom("plays", {"ali", "jay"})});
}

// Universe of n unary atoms p(c0) .. p(c{n-1}).
inline UniversePtr unary_universe(std::size_t n, const std::string& rel = "p") {
  Sort sort{"c", {}};
  for (std::size_t i = 0; i < n; ++i) sort.constants.push_back("c" + std::to_string(i));
  return Universe::make({sort}, {{rel, {"c"}}});
}

}  // namespace storyworld::testing
