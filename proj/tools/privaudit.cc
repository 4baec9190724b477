// Copyright 2026 The privaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// privaudit: runs the named experiments and writes their reports.
//
//   privaudit <experiment> [--config PATH] [--seed N] [--out DIR]
//                          [--trials N] [--jobs N] [--print-config]
//   privaudit all [--seed N] [--out DIR] [--trials N] [--jobs N]
//   privaudit schema
//
// Reports land in <out>/<experiment>/. The output root is --out, else
// $PRIVAUDIT_OUT, else the config's `out`.
//
// Exit status: 0 success, 1 runtime or IO error, 2 config error,
// 3 an invariant was violated.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "privaudit/cli/config.h"
#include "privaudit/cli/experiments.h"
#include "privaudit/cli/report.h"

namespace {

using privaudit::cli::ExperimentConfig;
using privaudit::cli::ExperimentKind;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

struct Flags {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  std::optional<int> trials;
  std::optional<int> jobs;
  bool print_config = false;
};

int ExitCodeFor(const absl::Status& status) {
  return status.code() == absl::StatusCode::kInvalidArgument ? kExitConfig : kExitError;
}

absl::StatusOr<ExperimentConfig> Resolve(ExperimentKind kind, const Flags& flags) {
  ExperimentConfig config = privaudit::cli::DefaultConfig(kind);
  if (!flags.config.empty()) {
    auto loaded = privaudit::cli::LoadConfigFile(kind, flags.config);
    if (!loaded.ok()) return loaded.status();
    config = *std::move(loaded);
  }
  if (flags.seed) config.seed = *flags.seed;
  if (flags.jobs) config.jobs = *flags.jobs;
  if (flags.trials) {
    if (auto s = privaudit::cli::ApplyTrialsOverride(config, *flags.trials); !s.ok()) {
      return s;
    }
  }
  if (!flags.out.empty()) {
    config.out = flags.out;
  } else if (const char* env = std::getenv("PRIVAUDIT_OUT"); env && *env) {
    config.out = env;
  }
  return config;
}

int RunOne(ExperimentKind kind, const Flags& flags) {
  const std::string name(privaudit::cli::ExperimentKindName(kind));
  auto config = Resolve(kind, flags);
  if (!config.ok()) {
    std::cerr << name << ": " << config.status().message() << "\n";
    return ExitCodeFor(config.status());
  }
  if (flags.print_config) {
    std::cout << privaudit::cli::ConfigToJson(*config).dump(2) << "\n";
    return kExitOk;
  }
  auto report = privaudit::cli::RunExperiment(*config);
  if (!report.ok()) {
    std::cerr << report.status().message() << "\n";
    return ExitCodeFor(report.status());
  }
  const std::string dir = (std::filesystem::path(config->out) / name).string();
  if (auto s = privaudit::cli::EmitReport(*report, dir); !s.ok()) {
    std::cerr << name << ": " << s.message() << "\n";
    return kExitError;
  }
  int violated = 0;
  for (const auto& inv : report->invariants) {
    if (!inv.ok) {
      ++violated;
      std::cerr << name << ": invariant " << inv.name << " violated: " << inv.detail
                << "\n";
    }
  }
  std::cout << name << ": wrote " << dir << "/report.json ("
            << report->invariants.size() << " invariants, " << violated
            << " violated, " << report->provenance.wall_time_seconds << " s)\n";
  return violated ? kExitInvariant : kExitOk;
}

void AddRunFlags(CLI::App* cmd, Flags& flags, bool with_config) {
  if (with_config) {
    cmd->add_option("--config", flags.config, "YAML experiment config")
        ->check(CLI::ExistingFile);
    cmd->add_flag("--print-config", flags.print_config,
                  "print the resolved config as JSON and exit");
  }
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_option("--out", flags.out, "output root (overrides $PRIVAUDIT_OUT)");
  cmd->add_option("--trials", flags.trials, "repetition count of the experiment")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", flags.jobs, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privaudit: membership-inference and privacy-audit experiments"};
  app.set_version_flag("--version", std::string(privaudit::cli::CodeVersion()));
  app.require_subcommand(1);

  Flags flags;
  std::optional<ExperimentKind> chosen;
  for (ExperimentKind kind : privaudit::cli::kAllExperiments) {
    const std::string name(privaudit::cli::ExperimentKindName(kind));
    CLI::App* cmd = app.add_subcommand(name, "run the " + name + " experiment");
    AddRunFlags(cmd, flags, true);
    cmd->callback([&chosen, kind] { chosen = kind; });
  }
  CLI::App* all = app.add_subcommand("all", "run every experiment with its defaults");
  AddRunFlags(all, flags, false);
  CLI::App* schema = app.add_subcommand("schema", "print the config schema as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (schema->parsed()) {
    std::cout << privaudit::cli::SchemaJson().dump(2) << "\n";
    return kExitOk;
  }
  if (all->parsed()) {
    int status = kExitOk;
    for (ExperimentKind kind : privaudit::cli::kAllExperiments) {
      Flags each = flags;
      if (kind == ExperimentKind::kEmCheck) each.trials.reset();
      const int code = RunOne(kind, each);
      if (status == kExitOk) status = code;
    }
    return status;
  }
  return RunOne(*chosen, flags);
}
