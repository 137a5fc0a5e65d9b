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

// storyworld: validate, enumerate and analyze story files.
//
// Exit codes: 0 success, 1 parse or usage error, 2 inconsistent story,
// 3 I/O failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "storyworld/storyworld.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kParseError = 1;
constexpr int kInconsistent = 2;
constexpr int kIoError = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read '" + path + "'");
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("cannot write '" + path + "'");
}

template <class Body>
int guarded(const std::string& context, Body&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const storyworld::ParseError& e) {
    std::cerr << context << ":" << e.what() << "\n";
    return kParseError;
  } catch (const storyworld::InconsistencyError& e) {
    std::cerr << context << ": " << e.what() << "\n";
    return kInconsistent;
  } catch (const storyworld::StoryError& e) {
    std::cerr << context << ": " << e.what() << "\n";
    return kParseError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << context << ": " << e.what() << "\n";
    return kParseError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Possible-worlds analysis of story timelines"};
  app.require_subcommand(1);

  std::string story;
  std::size_t bound = 24;

  auto* validate = app.add_subcommand("validate", "Parse and consistency-check a story file");
  validate->add_option("story", story, "Story file")->required();
  validate->add_option("--bound", bound, "Ground-atom bound for exhaustive checks");

  std::size_t step = 0;
  bool list = false;
  auto* enumerate = app.add_subcommand("enumerate", "Count the worlds consistent with a step");
  enumerate->add_option("story", story, "Story file")->required();
  enumerate->add_option("-t,--t", step, "Time step");
  enumerate->add_flag("--list", list, "Print each world's true atoms");
  enumerate->add_option("--bound", bound, "Ground-atom bound for enumeration");

  storyworld::RunConfig config;
  std::string config_path, channel, truth, theta, epsilon, format, out;
  std::size_t sample_k = 0;
  std::uint64_t seed = 0;
  auto* analyze = app.add_subcommand("analyze", "Run the conveyance pipeline and metric suite");
  analyze->add_option("story", story, "Story file (overrides the config's story)");
  analyze->add_option("--config", config_path, "JSON config file; flags override its keys");
  auto* channel_opt = analyze->add_option("--channel", channel,
                                          "identity | drop:<f>;... | corrupt:<f>;... | rename:a=b,...");
  auto* truth_opt = analyze->add_option("--truth", truth, "first-canonical | <literal>;...");
  auto* k_opt = analyze->add_option("--sample-k", sample_k, "Worlds sampled per step");
  auto* seed_opt = analyze->add_option("--seed", seed, "Sampling seed");
  auto* theta_opt = analyze->add_option("--theta", theta, "Kernel threshold, e.g. 0.5 or 1/2");
  auto* eps_opt = analyze->add_option("--epsilon", epsilon, "Satellite relevance threshold");
  auto* bound_opt = analyze->add_option("--bound", bound, "Ground-atom enumeration bound");
  auto* format_opt = analyze->add_option("--format", format, "json | csv");
  auto* out_opt = analyze->add_option("--out", out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParseError;
  }

  if (validate->parsed()) {
    return guarded(story, [&] {
      const auto timeline = storyworld::parse_story(read_file(story), storyworld::Limits{bound});
      std::cout << "ok: " << timeline.universe->atom_count() << " ground atoms, "
                << timeline.steps.size() << " step(s)\n";
      return kOk;
    });
  }

  if (enumerate->parsed()) {
    return guarded(story, [&] {
      const auto timeline = storyworld::parse_story(read_file(story), storyworld::Limits{bound});
      if (step >= timeline.steps.size()) {
        std::cerr << story << ": step t=" << step << " out of range (story has "
                  << timeline.steps.size() << " step(s))\n";
        return kParseError;
      }
      const auto worlds = storyworld::enumerate_models(timeline.steps[step]);
      std::cout << worlds.size() << "\n";
      if (list) {
        for (std::size_t i = 0; i < worlds.size(); ++i) {
          const auto w = worlds[i];
          std::cout << "{";
          bool first = true;
          for (std::size_t a = 0; a < w.universe().atom_count(); ++a) {
            if (!w.value(a)) continue;
            std::cout << (first ? "" : ", ") << w.universe().atoms()[a].to_string();
            first = false;
          }
          std::cout << "}\n";
        }
      }
      return kOk;
    });
  }

  return guarded(story.empty() ? config_path : story, [&] {
    std::string story_file = story;
    if (!config_path.empty()) {
      storyworld::apply_config_json(nlohmann::json::parse(read_file(config_path)), config);
      const std::filesystem::path from_config(config.story_path);
      if (story.empty() && !config.story_path.empty())
        story_file = from_config.is_absolute()
                         ? from_config.string()
                         : (std::filesystem::path(config_path).parent_path() / from_config).string();
    }
    if (!story.empty()) config.story_path = story;
    if (*channel_opt) config.channel = channel;
    if (*truth_opt) config.truth = truth;
    if (*k_opt) config.sample_k = sample_k;
    if (*seed_opt) config.seed = seed;
    if (*theta_opt) {
      auto r = storyworld::parse_rational(theta);
      if (!r) throw storyworld::StoryError("malformed --theta '" + theta + "'");
      config.theta = *r;
    }
    if (*eps_opt) {
      auto r = storyworld::parse_rational(epsilon);
      if (!r) throw storyworld::StoryError("malformed --epsilon '" + epsilon + "'");
      config.epsilon = storyworld::to_double(*r);
    }
    if (*bound_opt) config.bound = bound;
    if (*format_opt) config.format = format;
    if (*out_opt) config.out = out;
    if (config.story_path.empty()) throw storyworld::StoryError("no story file given");

    const auto report = storyworld::run_analysis(config, read_file(story_file));
    write_output(config.out, config.format == "csv" ? storyworld::to_csv(report)
                                                    : storyworld::to_json(report));
    return kOk;
  });
}
