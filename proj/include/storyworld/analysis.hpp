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

// End-to-end analysis of a story: evolve the Reader through a channel, then
// report world-set sizes, coherence metrics, kernels, satellites, ETC and
// conveyance accuracy. Output is a deterministic function of the config and
// the story text.

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "storyworld/conveyance.hpp"
#include "storyworld/error.hpp"
#include "storyworld/logic.hpp"
#include "storyworld/metrics.hpp"
#include "storyworld/model_space.hpp"
#include "storyworld/plausibility.hpp"
#include "storyworld/rational.hpp"
#include "storyworld/story.hpp"

namespace storyworld {

// Ultraproduct reconciliation is attempted only on world sets this small.
inline constexpr std::size_t kUltraproductCheckLimit = 12;

struct RunConfig {
  std::string story_path;
  // identity | drop:<f>;<f>... | corrupt:<f>;<f>... | rename:<from>=<to>,...
  std::string channel = "identity";
  // first-canonical | <literal>;<literal>...
  std::string truth = "first-canonical";
  std::size_t sample_k = 16;
  std::uint64_t seed = 0;
  Rational theta{1, 2};
  double epsilon = 0.0;
  std::size_t bound = 24;
  std::string format = "json";
  std::string out;
  // EWC questions, each "A -> B" (or F for "true -> F"). Empty: derived.
  std::vector<std::string> questions;

  void validate() const {
    if (sample_k == 0) throw StoryError("sample-k must be positive");
    if (bound == 0) throw StoryError("bound must be positive");
    if (bound > kMaxWorldAtoms)
      throw StoryError("bound may not exceed " + std::to_string(kMaxWorldAtoms));
    if (theta < Rational(0) || theta > Rational(1)) throw StoryError("theta must lie in [0, 1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw StoryError("epsilon must lie in [0, 1]");
    if (format != "json" && format != "csv") throw StoryError("format must be json or csv");
    const auto colon = channel.find(':');
    const std::string kind = channel.substr(0, colon);
    if (kind != "identity" && kind != "drop" && kind != "corrupt" && kind != "rename")
      throw StoryError("unknown channel kind '" + kind + "'");
    if (kind == "identity" && colon != std::string::npos)
      throw StoryError("identity channel takes no arguments");
    if (kind != "identity" && colon == std::string::npos)
      throw StoryError("channel '" + kind + "' needs arguments after ':'");
  }
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    auto piece = s.substr(start, pos == std::string_view::npos ? s.npos : pos - start);
    while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.front())))
      piece.remove_prefix(1);
    while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.back())))
      piece.remove_suffix(1);
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline Channel parse_channel(std::string_view spec, const Universe& narrator) {
  const auto colon = spec.find(':');
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view args = colon == spec.npos ? std::string_view{} : spec.substr(colon + 1);
  if (kind == "identity") return Channel::identity();
  if (kind == "drop" || kind == "corrupt") {
    std::vector<Formula> formulas;
    for (auto piece : detail::split(args, ';')) formulas.push_back(parse_formula(piece, narrator));
    if (formulas.empty()) throw StoryError("channel '" + std::string(kind) + "' lists no formulas");
    return kind == "drop" ? Channel::drop(std::move(formulas)) : Channel::corrupt(std::move(formulas));
  }
  if (kind == "rename") {
    RelationMap map;
    for (auto piece : detail::split(args, ',')) {
      auto eq = piece.find('=');
      if (eq == piece.npos) throw StoryError("rename entry '" + std::string(piece) + "' lacks '='");
      auto parts = detail::split(piece, '=');
      if (parts.size() != 2) throw StoryError("malformed rename entry '" + std::string(piece) + "'");
      if (!narrator.find_relation(std::string(parts[0])))
        throw StoryError("rename of unknown relation '" + std::string(parts[0]) + "'");
      map.emplace(std::string(parts[0]), std::string(parts[1]));
    }
    return Channel::rename(std::move(map));
  }
  throw StoryError("unknown channel kind '" + std::string(kind) + "'");
}

// The first canonical world satisfying the final fabula plus the listed
// literals.
inline World select_truth_world(const Timeline& timeline, std::string_view selector) {
  std::vector<Formula> constraints = timeline.steps.back().formulas();
  if (selector != "first-canonical")
    for (auto piece : detail::split(selector, ';'))
      constraints.push_back(parse_formula(piece, *timeline.universe));
  const WorldSet candidates =
      enumerate_models(constraints, timeline.universe, timeline.steps.back().limits());
  if (candidates.empty())
    throw InconsistencyError("truth selector contradicts the final fabula", {});
  return candidates[0];
}

// "A holds in every world, then X" for each atom the sample leaves open,
// with X the strict-majority literal. A is the conjunction of the sample's
// decided literals.
inline std::vector<Question> derived_world_questions(const WorldSet& sample) {
  const auto decided = decided_literals(sample);
  const Formula premise = conjunction(decided);
  std::vector<Question> out;
  const auto atoms = sample.universe().atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    std::size_t on = 0;
    for (auto b : sample.assignments()) on += (b >> i) & 1U;
    if (on == 0 || on == sample.size()) continue;
    if (2 * on == sample.size()) continue;
    out.push_back({premise, literal(atoms[i], 2 * on > sample.size()), {}, {}});
  }
  return out;
}

struct StepReport {
  std::size_t t = 0;
  std::size_t worlds = 0;
  std::size_t beliefs = 0;
  std::size_t sample_size = 0;
  std::size_t questions = 0;
  std::optional<Rational> ewc;
  std::optional<double> ewc_mean_entropy;
  std::optional<double> ewc_relevance_side;
  bool kernel = false;
  Rational changed{0};
  std::optional<bool> ultraproduct_in_worlds;
};

struct EtcReport {
  std::size_t t_prime = 0;
  std::size_t t = 0;
  Rational value;
  std::size_t questions = 0;
};

struct SatelliteReport {
  std::size_t kernel = 0;
  std::size_t step = 0;
  double relevance = 0.0;
};

struct AnalysisReport {
  RunConfig config;
  std::size_t atoms = 0;
  std::vector<std::string> truth_world;
  std::vector<StepReport> steps;
  ConveyanceReport accuracy;
  ConveyanceReport timeline_accuracy;
  std::vector<std::size_t> kernels;
  std::vector<SatelliteReport> satellites;
  std::vector<EtcReport> etc;
  std::vector<std::string> warnings;
};

inline AnalysisReport run_analysis(const RunConfig& config, std::string_view story_text) {
  config.validate();
  const Limits limits{config.bound};
  const Timeline timeline = parse_story(story_text, limits);
  const Channel channel = parse_channel(config.channel, *timeline.universe);
  const UniversePtr reader = channel.reader_universe(timeline.universe);
  const RelationMap correspondence = channel.correspondence();

  AnalysisReport report;
  report.config = config;
  report.atoms = timeline.universe->atom_count();

  Evolution evolution = evolve(timeline, channel, reader);
  report.warnings = evolution.warnings;
  const auto& states = evolution.states;

  const World truth = select_truth_world(timeline, config.truth);
  for (std::size_t i = 0; i < report.atoms; ++i)
    if (truth.value(i)) report.truth_world.push_back(truth.universe().atoms()[i].to_string());
  const World reader_truth = translate_world(truth, correspondence, reader);

  std::vector<Question> configured;
  for (const auto& text : config.questions)
    configured.push_back(Question::from_formula(parse_formula(text, *reader)));

  KernelReport kernels;
  if (states.size() >= 2) {
    kernels = classify_satellites(states, detect_kernels(states, config.theta), config.epsilon);
  } else {
    kernels.theta = config.theta;
    kernels.steps.push_back({states[0].step, Rational(0), false, {}});
  }

  std::vector<WorldSet> samples;
  for (std::size_t t = 0; t < states.size(); ++t) {
    const ReaderState& state = states[t];
    StepReport step;
    step.t = t;
    step.worlds = state.worlds.size();
    step.beliefs = state.beliefs.size();
    step.kernel = kernels.steps[t].kernel;
    step.changed = kernels.steps[t].changed;
    samples.push_back(sample_worlds(state.worlds, config.sample_k, config.seed + t));
    const WorldSet& sample = samples.back();
    step.sample_size = sample.size();
    const std::vector<Question> questions =
        configured.empty() ? derived_world_questions(sample) : configured;
    step.questions = questions.size();
    if (!questions.empty()) {
      step.ewc = ewc(sample, questions);
      step.ewc_mean_entropy = ewc_mean_entropy(sample, questions);
      step.ewc_relevance_side = ewc_relevance_side(sample, questions);
    }
    if (state.worlds.size() <= kUltraproductCheckLimit) {
      const World product = ultraproduct(extend_to_ultrafilter(state.filter));
      step.ultraproduct_in_worlds = state.worlds.contains(product);
      if (!*step.ultraproduct_in_worlds)
        report.warnings.push_back("t=" + std::to_string(t) +
                                  ": ultraproduct falls outside the Reader's worlds");
    }
    if (t > 0) {
      std::vector<Formula> rho;
      for (const auto& p : state.edit.additions()) rho.push_back(p.formula);
      if (!agreement_check(intersect(states[t - 1].worlds, state.worlds), rho))
        report.warnings.push_back("t=" + std::to_string(t) +
                                  ": shared worlds disagree with the added propositions");
    }
    report.steps.push_back(std::move(step));
  }

  report.kernels = kernels.kernels();
  for (const auto& k : kernels.steps)
    for (const auto& s : k.satellites) report.satellites.push_back({k.step, s.step, s.relevance});

  for (std::size_t k : report.kernels) {
    try {
      const EtcResult r = etc_metric(
          {samples[k - 1], k - 1, reader_truth, k, kernels, states[k].beliefs, std::nullopt, 64});
      report.etc.push_back({k - 1, k, r.value, r.questions.size()});
    } catch (const StoryError& e) {
      report.warnings.push_back("t=" + std::to_string(k) + ": " + e.what());
    }
  }

  const Transmission sent = transmit_d(compress_phi(truth, accept_all(), limits), channel, reader);
  report.accuracy = accuracy_report(truth, reconstruct_psi(sent.fabula), correspondence);
  report.timeline_accuracy = accuracy_report(truth, states.back(), correspondence);
  return report;
}

namespace detail {

inline nlohmann::ordered_json rational_json(const Rational& r) {
  return {{"num", r.numerator()}, {"den", r.denominator()}, {"value", to_double(r)}};
}

inline nlohmann::ordered_json conveyance_json(const ConveyanceReport& c) {
  nlohmann::ordered_json mismatching = nlohmann::ordered_json::array();
  for (const auto& a : c.mismatching) mismatching.push_back(a.to_string());
  nlohmann::ordered_json undetermined = nlohmann::ordered_json::array();
  for (const auto& a : c.undetermined_atoms) undetermined.push_back(a.to_string());
  return {{"matched", c.matched},
          {"mismatched", c.mismatched},
          {"undetermined", c.undetermined},
          {"accuracy", rational_json(c.accuracy)},
          {"commutes", c.commutes},
          {"mismatching_atoms", mismatching},
          {"undetermined_atoms", undetermined}};
}

template <class T>
nlohmann::ordered_json optional_json(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_same_v<T, Rational>)
    return rational_json(*v);
  else
    return *v;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace detail

inline std::string to_json(const AnalysisReport& r) {
  using nlohmann::ordered_json;
  ordered_json config = {{"story", r.config.story_path},
                         {"channel", r.config.channel},
                         {"truth", r.config.truth},
                         {"sample_k", r.config.sample_k},
                         {"seed", r.config.seed},
                         {"theta", detail::rational_json(r.config.theta)},
                         {"epsilon", r.config.epsilon},
                         {"bound", r.config.bound},
                         {"questions", r.config.questions}};
  ordered_json steps = ordered_json::array();
  for (const auto& s : r.steps)
    steps.push_back({{"t", s.t},
                     {"worlds", s.worlds},
                     {"beliefs", s.beliefs},
                     {"sample_size", s.sample_size},
                     {"questions", s.questions},
                     {"ewc", detail::optional_json(s.ewc)},
                     {"ewc_mean_entropy", detail::optional_json(s.ewc_mean_entropy)},
                     {"ewc_relevance_side", detail::optional_json(s.ewc_relevance_side)},
                     {"kernel", s.kernel},
                     {"changed", detail::rational_json(s.changed)},
                     {"ultraproduct_in_worlds", detail::optional_json(s.ultraproduct_in_worlds)}});
  ordered_json satellites = ordered_json::array();
  for (const auto& s : r.satellites)
    satellites.push_back({{"kernel", s.kernel}, {"step", s.step}, {"relevance", s.relevance}});
  ordered_json etc = ordered_json::array();
  for (const auto& e : r.etc)
    etc.push_back({{"t_prime", e.t_prime},
                   {"t", e.t},
                   {"value", detail::rational_json(e.value)},
                   {"questions", e.questions}});
  ordered_json doc = {{"format_version", 1},
                      {"config", config},
                      {"atoms", r.atoms},
                      {"truth_world", r.truth_world},
                      {"steps", steps},
                      {"accuracy", detail::conveyance_json(r.accuracy)},
                      {"timeline_accuracy", detail::conveyance_json(r.timeline_accuracy)},
                      {"kernels", r.kernels},
                      {"satellites", satellites},
                      {"etc", etc},
                      {"warnings", r.warnings}};
  return doc.dump(2) + "\n";
}

inline constexpr const char* kCsvHeader =
    "t,worlds,beliefs,sample_size,questions,ewc_num,ewc_den,ewc,ewc_mean_entropy,kernel,"
    "changed_num,changed_den,changed";

// One row per step; empty cells where EWC is undefined.
inline std::string to_csv(const AnalysisReport& r) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const auto& s : r.steps) {
    out << s.t << ',' << s.worlds << ',' << s.beliefs << ',' << s.sample_size << ','
        << s.questions << ',';
    if (s.ewc)
      out << s.ewc->numerator() << ',' << s.ewc->denominator() << ','
          << detail::format_double(to_double(*s.ewc)) << ',';
    else
      out << ",,,";
    if (s.ewc_mean_entropy) out << detail::format_double(*s.ewc_mean_entropy);
    out << ',' << (s.kernel ? "true" : "false") << ',' << s.changed.numerator() << ','
        << s.changed.denominator() << ',' << detail::format_double(to_double(s.changed)) << "\n";
  }
  return out.str();
}

// Applies the keys of a JSON config object onto `config`.
inline void apply_config_json(const nlohmann::json& j, RunConfig& config) {
  if (!j.is_object()) throw StoryError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "story") config.story_path = value.get<std::string>();
    else if (key == "channel") config.channel = value.get<std::string>();
    else if (key == "truth") config.truth = value.get<std::string>();
    else if (key == "sample_k") config.sample_k = value.get<std::size_t>();
    else if (key == "seed") config.seed = value.get<std::uint64_t>();
    else if (key == "theta" || key == "epsilon") {
      const std::string text = value.is_string() ? value.get<std::string>() : value.dump();
      auto r = parse_rational(text);
      if (!r) throw StoryError("malformed " + key + " '" + text + "'");
      if (key == "theta") config.theta = *r;
      else config.epsilon = to_double(*r);
    }
    else if (key == "bound") config.bound = value.get<std::size_t>();
    else if (key == "format") config.format = value.get<std::string>();
    else if (key == "out") config.out = value.get<std::string>();
    else if (key == "questions") config.questions = value.get<std::vector<std::string>>();
    else throw StoryError("unknown config key '" + key + "'");
  }
}

}  // namespace storyworld
