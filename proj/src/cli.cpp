// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "risce/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

#include "risce/config_io.hpp"

namespace risce {

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonArgs {
  std::string preset;
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App &cmd, CommonArgs &args) {
  auto *preset = cmd.add_option("--preset", args.preset, "Named experiment preset")
                     ->check(CLI::IsMember(preset_names()));
  auto *config =
      cmd.add_option("--config", args.config, "JSON config (SystemConfig + sweep keys)");
  preset->excludes(config);
  cmd.add_option("--set", args.sets, "Override key=value (repeatable)")
      ->allow_extra_args(false);
  cmd.add_option("--seed", args.seed, "Base seed");
  cmd.add_option("--out", args.out, "Output CSV path (default: stdout)");
}

RunPlan load_plan(const CommonArgs &args) {
  RunPlan plan;
  if (!args.preset.empty())
    plan = make_preset(args.preset);
  else if (!args.config.empty())
    plan = load_run_config(args.config);
  else
    throw ConfigError("arguments", 0, "", "one of --preset or --config is required");
  for (const auto &s : args.sets)
    apply_override(plan, s);
  if (args.seed)
    for (auto &s : plan.sweeps)
      s.base.seed = *args.seed;
  finalize_plan(plan);
  return plan;
}

// Writes through `body` to `path`, or to `out` when the path is empty.
template <class F>
void emit(const std::string &path, std::ostream &out, F body) {
  if (path.empty()) {
    body(out);
    return;
  }
  std::ofstream file(path);
  if (!file)
    throw Error("cannot open output file '" + path + "'");
  body(file);
  if (!file)
    throw Error("failed writing '" + path + "'");
}

int cmd_run(const CommonArgs &args, std::optional<int> trials, bool json,
            bool timing, std::ostream &out) {
  RunPlan plan = load_plan(args);
  std::vector<SweepRow> rows;
  for (auto &spec : plan.sweeps) {
    if (trials)
      spec.trials = *trials;
    spec.timing = timing;
    auto part = run_sweep(spec);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  sort_rows(rows);
  if (json && args.out.empty()) {
    write_json(out, rows);
    return 0;
  }
  emit(args.out, out, [&](std::ostream &o) { write_csv(o, rows); });
  if (json) {
    const auto path = std::filesystem::path(args.out).replace_extension(".json");
    emit(path.string(), out, [&](std::ostream &o) { write_json(o, rows); });
  }
  return 0;
}

int cmd_spectrum(const CommonArgs &args, const std::string &kind,
                 std::ostream &out) {
  RunPlan plan = load_plan(args);
  const SweepSpec &spec = plan.sweeps.front();
  SystemConfig cfg = spec.base;
  apply_variable(cfg, spec.variable, spec.values.front());
  cfg.validate();
  AlgorithmOptions options = spec.options;
  const bool music = kind == "music";
  if (!music)
    options.known_bs_dod = false;

  Rng arng = analog_rng(cfg.seed);
  const CMatrix analog = draw_analog_beamformer(cfg, arng);
  Rng rng(cfg.seed);
  const TrialData trial = simulate_trial(cfg, analog, rng, spec.bs_dod_indices);
  const ProposedFrontEnd front = proposed_front_end(trial, 0, options, music);

  emit(args.out, out, [&](std::ostream &o) {
    if (!music) {
      const RVector &e = front.angles.bs.energy_spectrum;
      const double peak = e.maxCoeff() > 0 ? e.maxCoeff() : 1.0;
      o << "index,dod,energy\n";
      for (int q = 0; q < cfg.q_tx; ++q)
        o << q + 1 << ',' << format_number(grid_sample(q, cfg.q_tx)) << ','
          << format_number(e(q) / peak) << '\n';
      return;
    }
    o << "path,sc,index,coupled_angle,value\n";
    const auto &spectra = front.angles.ris.spectra;
    for (std::size_t l = 0; l < spectra[0].size(); ++l) {
      for (std::size_t s = 0; s < 2; ++s) {
        const MusicSpectrum &sp = spectra[s][l];
        const double peak = sp.values.maxCoeff() > 0 ? sp.values.maxCoeff() : 1.0;
        for (Index q = 0; q < sp.values.size(); ++q)
          o << l + 1 << ',' << front.phase1.sc[s] + 1 << ',' << q + 1 << ','
            << format_number(sp.grid[static_cast<std::size_t>(q)]) << ','
            << format_number(sp.values(q) / peak) << '\n';
      }
    }
  });
  return 0;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"Two-phase wideband RIS channel estimation simulator", "risce"};
  app.require_subcommand(1);

  CommonArgs run_args;
  std::optional<int> trials;
  bool json = false, timing = false;
  int threads = 0;
  auto *run = app.add_subcommand("run", "Execute a sweep and write CSV rows");
  add_common(*run, run_args);
  run->add_option("--trials", trials, "Monte Carlo trials per point")
      ->check(CLI::PositiveNumber);
  run->add_flag("--json", json, "Also write JSON (next to --out, or to stdout)");
  run->add_flag("--timing", timing, "Record mean wall-clock per trial");
  run->add_option("--threads", threads, "Worker threads (0: OpenMP default)")
      ->check(CLI::NonNegativeNumber);

  CommonArgs spec_args;
  std::string kind = "enm";
  auto *spectrum =
      app.add_subcommand("spectrum", "Single-trial EnM or MUSIC spectrum CSV");
  add_common(*spectrum, spec_args);
  spectrum->add_option("--kind", kind, "enm or music")
      ->check(CLI::IsMember({"enm", "music"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (threads > 0)
      omp_set_num_threads(threads);
    if (run->parsed())
      return cmd_run(run_args, trials, json, timing, out);
    return cmd_spectrum(spec_args, kind, out);
  } catch (const InvalidConfig &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

} // namespace risce
