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

#include "risce/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>

#include <json.hpp>

namespace risce {

using nlohmann::json;

ConfigError::ConfigError(const std::string &source, int line,
                         const std::string &field, const std::string &message)
    : InvalidConfig(source + (line > 0 ? ":" + std::to_string(line) : "") +
                    (field.empty() ? "" : ": field '" + field + "'") + ": " +
                    message),
      line_(line), field_(field) {}

// ---------------------------------------------------------------- presets

namespace {

const char *const kPresetNames[] = {
    "fig3_enm_spectrum",  "fig4_rmse_vs_snr",   "fig5_nmse_vs_snr",
    "fig6_nmse_vs_T",     "fig7_nmse_vs_P",     "fig8_nmse_vs_paths",
    "fig9_nmse_vs_ris",
};

const std::vector<std::string> kAllAlgorithms{
    "proposed", "cbs_gamp_all_sc", "omp_conventional", "omp_bsa", "oracle_ls"};

void set_mmwave(SystemConfig &c) {
  c.f_c = 28e9;
  c.bandwidth = 600e6;
  c.tau_max = 53e-9;
}

std::vector<double> range(double first, double last, double step) {
  std::vector<double> v;
  for (double x = first; x <= last + 1e-9; x += step)
    v.push_back(x);
  return v;
}

SweepSpec base_sweep() {
  SweepSpec s;
  s.trials = 50;
  return s;
}

} // namespace

std::vector<std::string> preset_names() {
  return {std::begin(kPresetNames), std::end(kPresetNames)};
}

RunPlan make_preset(const std::string &name) {
  RunPlan plan;
  plan.name = name;
  plan.values_explicit = true;
  SweepSpec s = base_sweep();
  if (name == "fig3_enm_spectrum") {
    s.values = {20.0};
    s.algorithms = {"proposed"};
    s.bs_dod_indices = {2, 3, 23};
    s.trials = 100;
    plan.sweeps.push_back(s);
  } else if (name == "fig4_rmse_vs_snr") {
    s.base.n_paths_bs = 1;
    s.base.n_paths_ue = 2;
    s.base.n_subframes = 25;
    s.base.n_slots = 12;
    s.base.on_grid = false;
    s.options.known_bs_dod = true;
    s.values = range(0, 30, 5);
    s.algorithms = {"proposed"};
    for (const bool mmwave : {false, true}) {
      for (const int q : {64, 128}) {
        SweepSpec v = s;
        if (mmwave)
          set_mmwave(v.base);
        v.base.q_ris = q;
        v.label = std::string(mmwave ? "mmwave" : "thz") + "_q" +
                  std::to_string(q);
        plan.sweeps.push_back(v);
      }
    }
  } else if (name == "fig5_nmse_vs_snr") {
    s.values = range(0, 30, 5);
    s.algorithms = kAllAlgorithms;
    plan.sweeps.push_back(s);
  } else if (name == "fig6_nmse_vs_T") {
    s.variable = "n_subframes";
    s.values = range(10, 50, 10);
    s.base.n_slots = 15;
    s.algorithms = kAllAlgorithms;
    plan.sweeps.push_back(s);
  } else if (name == "fig7_nmse_vs_P") {
    s.variable = "n_slots";
    s.values = range(5, 30, 5);
    s.base.n_subframes = 30;
    s.algorithms = kAllAlgorithms;
    plan.sweeps.push_back(s);
  } else if (name == "fig8_nmse_vs_paths") {
    s.variable = "n_paths";
    s.values = {1, 2, 3, 4};
    s.algorithms = {"proposed", "cbs_gamp_all_sc", "oracle_ls"};
    plan.sweeps.push_back(s);
  } else if (name == "fig9_nmse_vs_ris") {
    s.variable = "n_ris";
    s.values = {16, 32, 48, 64};
    s.algorithms = {"proposed", "cbs_gamp_all_sc", "omp_bsa", "oracle_ls"};
    plan.sweeps.push_back(s);
  } else {
    std::string known;
    for (const char *n : kPresetNames)
      known += std::string(known.empty() ? "" : ", ") + n;
    throw InvalidConfig("unknown preset '" + name + "' (known: " + known + ")");
  }
  return plan;
}

// ---------------------------------------------------------------- parsing

namespace {

struct Context {
  std::string source;
  const std::string *text = nullptr; // for line lookup, may be null

  int line_of(const std::string &field) const {
    if (!text)
      return 0;
    const std::regex re("\"" + field + "\"\\s*:");
    std::smatch m;
    if (!std::regex_search(*text, m, re))
      return 0;
    const auto pos = static_cast<std::size_t>(m.position(0));
    return 1 + static_cast<int>(
                   std::count(text->begin(),
                              text->begin() + static_cast<std::ptrdiff_t>(pos),
                              '\n'));
  }

  [[noreturn]] void fail(const std::string &field,
                         const std::string &message) const {
    throw ConfigError(source, line_of(field), field, message);
  }
};

double as_number(const json &v, const Context &ctx, const std::string &field,
                 bool allow_inf = false) {
  if (v.is_number())
    return v.get<double>();
  if (allow_inf && v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf")
      return std::numeric_limits<double>::infinity();
    if (s == "-inf")
      return -std::numeric_limits<double>::infinity();
  }
  ctx.fail(field, allow_inf ? "expected a number or \"inf\"" : "expected a number");
}

long long as_integer(const json &v, const Context &ctx,
                     const std::string &field) {
  if (v.is_number_integer())
    return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15)
      return static_cast<long long>(d);
  }
  ctx.fail(field, "expected an integer");
}

int as_int(const json &v, const Context &ctx, const std::string &field) {
  const long long x = as_integer(v, ctx, field);
  if (x < std::numeric_limits<int>::min() ||
      x > std::numeric_limits<int>::max())
    ctx.fail(field, "integer out of range");
  return static_cast<int>(x);
}

bool as_bool(const json &v, const Context &ctx, const std::string &field) {
  if (!v.is_boolean())
    ctx.fail(field, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json &v, const Context &ctx,
                      const std::string &field) {
  if (!v.is_string())
    ctx.fail(field, "expected a string");
  return v.get<std::string>();
}

const json &as_array(const json &v, const Context &ctx,
                     const std::string &field) {
  if (!v.is_array())
    ctx.fail(field, "expected an array");
  return v;
}

void apply_gamp(GampParams &g, const json &obj, const Context &ctx) {
  if (!obj.is_object())
    ctx.fail("gamp", "expected an object");
  for (const auto &[key, v] : obj.items()) {
    const std::string f = key;
    if (f == "max_iter")
      g.max_iter = as_int(v, ctx, f);
    else if (f == "damping")
      g.damping = as_number(v, ctx, f);
    else if (f == "tol")
      g.tol = as_number(v, ctx, f);
    else if (f == "em")
      g.em = as_bool(v, ctx, f);
    else if (f == "sparsity_rate")
      g.sparsity_rate = as_number(v, ctx, f);
    else if (f == "prior_var")
      g.prior_var = as_number(v, ctx, f);
    else if (f == "noise_floor")
      g.noise_floor = as_number(v, ctx, f);
    else
      ctx.fail(f, "unknown gamp key");
  }
  if (g.max_iter < 1)
    ctx.fail("max_iter", "must be >= 1");
  if (!(g.damping > 0.0 && g.damping <= 1.0))
    ctx.fail("damping", "must lie in (0, 1]");
}

double variable_value(const SystemConfig &c, const std::string &variable) {
  if (variable == "snr_db")
    return c.snr_db;
  if (variable == "n_subframes")
    return c.n_subframes;
  if (variable == "n_slots")
    return c.n_slots;
  if (variable == "n_paths")
    return c.n_paths_bs;
  if (variable == "n_ris")
    return c.n_ris;
  throw InvalidConfig("unknown sweep variable '" + variable + "'");
}

// Applies one top-level key to one sweep. Returns false for unknown keys.
bool apply_key(RunPlan &plan, SweepSpec &s, const std::string &key,
               const json &v, const Context &ctx) {
  SystemConfig &c = s.base;
  if (key == "n_tx")
    c.n_tx = as_int(v, ctx, key);
  else if (key == "n_ris")
    c.n_ris = as_int(v, ctx, key);
  else if (key == "n_rf") {
    c.n_rf = as_int(v, ctx, key);
    plan.n_rf_explicit = true;
  } else if (key == "n_users")
    c.n_users = as_int(v, ctx, key);
  else if (key == "n_sc")
    c.n_sc = as_int(v, ctx, key);
  else if (key == "f_c")
    c.f_c = as_number(v, ctx, key);
  else if (key == "bandwidth")
    c.bandwidth = as_number(v, ctx, key);
  else if (key == "n_subframes")
    c.n_subframes = as_int(v, ctx, key);
  else if (key == "n_slots")
    c.n_slots = as_int(v, ctx, key);
  else if (key == "q_tx")
    c.q_tx = as_int(v, ctx, key);
  else if (key == "q_ris")
    c.q_ris = as_int(v, ctx, key);
  else if (key == "n_paths_bs")
    c.n_paths_bs = as_int(v, ctx, key);
  else if (key == "n_paths_ue")
    c.n_paths_ue = as_int(v, ctx, key);
  else if (key == "n_paths")
    c.n_paths_bs = c.n_paths_ue = as_int(v, ctx, key);
  else if (key == "snr_db")
    c.snr_db = as_number(v, ctx, key, true);
  else if (key == "tau_max")
    c.tau_max = as_number(v, ctx, key);
  else if (key == "on_grid")
    c.on_grid = as_bool(v, ctx, key);
  else if (key == "seed") {
    const long long x = as_integer(v, ctx, key);
    if (x < 0)
      ctx.fail(key, "must be >= 0");
    c.seed = static_cast<std::uint64_t>(x);
  } else if (key == "variable") {
    s.variable = as_string(v, ctx, key);
    try {
      variable_value(c, s.variable);
    } catch (const InvalidConfig &e) {
      ctx.fail(key, e.what());
    }
  } else if (key == "values") {
    s.values.clear();
    for (const auto &x : as_array(v, ctx, key))
      s.values.push_back(as_number(x, ctx, key, true));
    if (s.values.empty())
      ctx.fail(key, "must be non-empty");
    plan.values_explicit = true;
  } else if (key == "algorithms") {
    s.algorithms.clear();
    for (const auto &x : as_array(v, ctx, key)) {
      const std::string name = as_string(x, ctx, key);
      try {
        parse_algorithm(name);
      } catch (const Error &e) {
        ctx.fail(key, e.what());
      }
      s.algorithms.push_back(name);
    }
    if (s.algorithms.empty())
      ctx.fail(key, "must be non-empty");
  } else if (key == "trials") {
    s.trials = as_int(v, ctx, key);
    if (s.trials < 1)
      ctx.fail(key, "must be >= 1");
  } else if (key == "solver") {
    try {
      s.options.solver = parse_solver(as_string(v, ctx, key));
    } catch (const ConfigError &) {
      throw;
    } catch (const Error &e) {
      ctx.fail(key, e.what());
    }
  } else if (key == "gamp")
    apply_gamp(s.options.gamp, v, ctx);
  else if (key == "n_sub")
    s.options.n_sub = as_int(v, ctx, key);
  else if (key == "rmse_squared")
    s.rmse_squared = as_bool(v, ctx, key);
  else if (key == "bs_dod_indices") {
    // 1-based, as printed in reports.
    s.bs_dod_indices.clear();
    for (const auto &x : as_array(v, ctx, key)) {
      const int q = as_int(x, ctx, key);
      if (q < 1)
        ctx.fail(key, "indices are 1-based");
      s.bs_dod_indices.push_back(q - 1);
    }
  } else if (key == "known_bs_dod")
    s.options.known_bs_dod = as_bool(v, ctx, key);
  else if (key == "label")
    s.label = as_string(v, ctx, key);
  else if (key == "timing")
    s.timing = as_bool(v, ctx, key);
  else
    return false;
  return true;
}

void apply_object(RunPlan &plan, const json &obj, const Context &ctx) {
  if (!obj.is_object())
    throw ConfigError(ctx.source, 1, "", "top level must be a JSON object");
  for (const auto &[key, v] : obj.items()) {
    for (auto &s : plan.sweeps)
      if (!apply_key(plan, s, key, v, ctx))
        ctx.fail(key, "unknown key");
  }
}

} // namespace

RunPlan parse_run_config(const std::string &text, const std::string &source) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error &e) {
    const std::size_t byte = std::min<std::size_t>(
        e.byte > 0 ? e.byte - 1 : 0, text.size());
    const int line =
        1 + static_cast<int>(std::count(
                text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte),
                '\n'));
    throw ConfigError(source, line, "", "malformed JSON");
  }
  RunPlan plan;
  plan.name = source;
  plan.sweeps.push_back(base_sweep());
  apply_object(plan, obj, Context{source, &text});
  return plan;
}

RunPlan load_run_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(path, 0, "", "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path);
}

void apply_override(RunPlan &plan, const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set", 0, "", "expected key=value, got '" +
                                          assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded())
    value = raw;
  const Context ctx{"--set", nullptr};

  if (key.rfind("gamp.", 0) == 0) {
    const json obj{{key.substr(5), value}};
    for (auto &s : plan.sweeps)
      apply_gamp(s.options.gamp, obj, ctx);
    return;
  }
  for (auto &s : plan.sweeps) {
    if (key == s.variable && key != "variable") {
      s.values = {as_number(value, ctx, key, true)};
      plan.values_explicit = true;
      continue;
    }
    if (!apply_key(plan, s, key, value, ctx))
      ctx.fail(key, "unknown key");
  }
}

void finalize_plan(RunPlan &plan) {
  for (auto &s : plan.sweeps) {
    if (!plan.n_rf_explicit)
      s.base.n_rf = std::max(1, s.base.n_tx / 2);
    if (!plan.values_explicit)
      s.values = {variable_value(s.base, s.variable)};
    if (!s.bs_dod_indices.empty() &&
        static_cast<int>(s.bs_dod_indices.size()) != s.base.n_paths_bs)
      throw ConfigError(plan.name, 0, "bs_dod_indices",
                        "needs one index per BS path");
    for (double v : s.values) {
      SystemConfig c = s.base;
      apply_variable(c, s.variable, v);
      try {
        c.validate();
      } catch (const InvalidConfig &e) {
        throw ConfigError(plan.name, 0, s.variable,
                          "at value " + format_number(v) + ": " + e.what());
      }
    }
  }
}

} // namespace risce
