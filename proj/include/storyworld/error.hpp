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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace storyworld {

// Base of every error the library throws.
class StoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A name that does not resolve in the universe, or a malformed atom.
class SymbolError : public StoryError {
 public:
  using StoryError::StoryError;
};

// Exhaustive enumeration refused: the ground-atom count exceeds the bound.
class BoundError : public StoryError {
 public:
  BoundError(std::size_t atoms, std::size_t bound)
      : StoryError("universe has " + std::to_string(atoms) +
                   " ground atoms, exceeding the enumeration bound of " +
                   std::to_string(bound)),
        atoms_(atoms),
        bound_(bound) {}

  std::size_t atoms() const { return atoms_; }
  std::size_t bound() const { return bound_; }

 private:
  std::size_t atoms_;
  std::size_t bound_;
};

// A set of propositions with no satisfying world. `conflict` holds a
// minimal unsatisfiable subset in serialized form.
class InconsistencyError : public StoryError {
 public:
  InconsistencyError(const std::string& what, std::vector<std::string> conflict)
      : StoryError(what), conflict_(std::move(conflict)) {}

  const std::vector<std::string>& conflict() const { return conflict_; }

 private:
  std::vector<std::string> conflict_;
};

// Syntax or declaration error in story text. Line and column are 1-based.
class ParseError : public StoryError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : StoryError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        message_(message) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

// A story step that is well-formed but inconsistent.
class StepInconsistencyError : public InconsistencyError {
 public:
  StepInconsistencyError(std::size_t step, std::size_t line, std::vector<std::string> conflict)
      : InconsistencyError(describe(step, line, conflict), std::move(conflict)),
        step_(step),
        line_(line) {}

  std::size_t step() const { return step_; }
  std::size_t line() const { return line_; }

 private:
  static std::string describe(std::size_t step, std::size_t line,
                              const std::vector<std::string>& conflict) {
    std::string s = "step t=" + std::to_string(step);
    if (line != 0) s += " (line " + std::to_string(line) + ")";
    s += " is inconsistent; conflicting subset: {";
    for (std::size_t i = 0; i < conflict.size(); ++i) {
      if (i) s += ", ";
      s += conflict[i];
    }
    return s + "}";
  }

  std::size_t step_;
  std::size_t line_;
};

}  // namespace storyworld
