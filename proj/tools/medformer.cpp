/**
 * Copyright 2026 The Medformer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
// Command-line front end. Talks to the library through the C API only.
#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "mdf/mdf.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDivergence = 2;

int report_failure(mdf_status s) {
  std::cerr << "error: " << mdf_status_name(s) << ": " << mdf_last_error() << "\n";
  return s == MDF_ERR_DIVERGENCE ? kExitDivergence : kExitConfig;
}

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::optional<double> lr;
  std::optional<std::string> out;
  std::optional<std::string> from;
  std::optional<std::string> ttsa;
};

void add_run_flags(CLI::App *cmd, RunFlags &f, bool wants_from, bool wants_ttsa) {
  cmd->add_option("--config", f.config, "Run config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Override the run seed");
  cmd->add_option("--steps", f.steps, "Override the step count")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", f.lr, "Override the peak learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Override the output directory");
  if (wants_from) cmd->add_option("--from", f.from, "Checkpoint to start from");
  if (wants_ttsa) cmd->add_option("--ttsa", f.ttsa, "Test-time sum augmentation, e.g. K=2,reps=4");
}

int run_command(const std::string &mode, const RunFlags &f) {
  mdf_run_config *cfg = nullptr;
  mdf_status s = mdf_config_load(f.config.c_str(), &cfg);
  if (s != MDF_OK) return report_failure(s);
  if (s == MDF_OK && f.seed) s = mdf_config_set_seed(cfg, *f.seed);
  if (s == MDF_OK && f.steps) s = mdf_config_set_steps(cfg, *f.steps);
  if (s == MDF_OK && f.lr) s = mdf_config_set_lr(cfg, *f.lr);
  if (s == MDF_OK && f.out) s = mdf_config_set_out_dir(cfg, f.out->c_str());
  if (s == MDF_OK && f.from) s = mdf_config_set_from(cfg, f.from->c_str());
  if (s == MDF_OK && f.ttsa) s = mdf_config_set_ttsa(cfg, f.ttsa->c_str());
  char *summary = nullptr;
  if (s == MDF_OK) s = mdf_run(cfg, mode.c_str(), &summary);
  mdf_config_free(cfg);
  if (s != MDF_OK) return report_failure(s);
  std::cout << summary << "\n";
  mdf_string_free(summary);
  return kExitOk;
}

int inspect_command(const std::string &path, bool as_json) {
  char *text = nullptr;
  const mdf_status s = mdf_inspect_checkpoint(path.c_str(), &text);
  if (s != MDF_OK) return report_failure(s);
  const std::string raw = text;
  mdf_string_free(text);
  if (as_json) {
    std::cout << raw << "\n";
    return kExitOk;
  }
  const auto j = nlohmann::ordered_json::parse(raw);
  auto row = [](const std::string &label) -> std::ostream & {
    return std::cout << std::left << std::setw(20) << label;
  };
  auto joined = [](const nlohmann::ordered_json &names) {
    std::string out;
    for (const auto &n : names) out += (out.empty() ? "" : ", ") + n.get<std::string>();
    return out.empty() ? std::string("-") : out;
  };
  row("version") << j["version"].get<int>() << "\n";
  row("config digest") << j["config_digest"].get<std::string>() << "\n";
  row("parameters") << j["parameter_count"].get<std::size_t>() << " in " << j["tensor_count"].get<std::size_t>()
                    << " tensors\n";
  for (const auto &[key, v] : j["config"].items()) row("  " + key) << v.dump() << "\n";
  for (const auto &[cat, names] : j["latents"].items()) row(cat + " latents") << joined(names) << "\n";
  row("tasks") << joined(j["tasks"]) << "\n";
  row("expander") << (j["has_expander"].get<bool>() ? "yes" : "no") << "\n";
  row("optimizer state") << (j["has_optimizer"].get<bool>() ? "yes" : "no") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Medformer training and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: MEDFORMER_THREADS or all cores)");

  struct Sub {
    const char *name;
    const char *help;
    bool from;
    bool ttsa;
  };
  const Sub subs[] = {
      {"train", "Single-task supervised run", false, false},
      {"multitask", "Joint supervised run over several tasks", false, false},
      {"ssl-pretrain", "Self-supervised pretraining", false, false},
      {"finetune", "Supervised run from a pretrained trunk", true, false},
      {"eval", "Metrics of a checkpoint on a split", true, true},
  };
  RunFlags flags;
  std::string mode;
  for (const auto &s : subs) {
    auto *cmd = app.add_subcommand(s.name, s.help);
    add_run_flags(cmd, flags, s.from, s.ttsa);
    cmd->callback([&mode, name = std::string(s.name)] { mode = name; });
  }
  std::string ckpt;
  bool as_json = false;
  auto *inspect = app.add_subcommand("inspect-checkpoint", "Summarise a checkpoint file");
  inspect->add_option("path", ckpt, "Checkpoint file")->required();
  inspect->add_flag("--json", as_json, "Print the raw JSON summary");
  inspect->callback([&mode] { mode = "inspect-checkpoint"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitConfig;
  }
  if (threads > 0) mdf_set_threads(threads);
  if (mode == "inspect-checkpoint") return inspect_command(ckpt, as_json);
  return run_command(mode, flags);
}
