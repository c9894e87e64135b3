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

#pragma once

#include <string>
#include <vector>

#include "risce/errors.hpp"
#include "risce/harness.hpp"

namespace risce {

/// Configuration error with the offending field and 1-based line (0 when
/// unknown).
class ConfigError : public InvalidConfig {
public:
  ConfigError(const std::string &source, int line, const std::string &field,
              const std::string &message);
  int line() const noexcept { return line_; }
  const std::string &field() const noexcept { return field_; }

private:
  int line_;
  std::string field_;
};

/// One or more sweeps sharing a name; the fig4 preset has four (band x Q_R).
struct RunPlan {
  std::string name;
  std::vector<SweepSpec> sweeps;
  bool n_rf_explicit = false; // otherwise n_rf follows n_tx / 2
  bool values_explicit = false;
};

std::vector<std::string> preset_names();

/// Throws InvalidConfig for an unknown name.
RunPlan make_preset(const std::string &name);

/// Starts from the defaults (a single sweep) and applies the JSON object in
/// `text`. `source` names the input in diagnostics.
RunPlan parse_run_config(const std::string &text, const std::string &source);

/// Reads and parses a file. A missing or unreadable file throws ConfigError
/// naming the path.
RunPlan load_run_config(const std::string &path);

/// Applies "key=value" to every sweep. Values are read as JSON when they
/// parse, otherwise as strings; "gamp.<field>" reaches the GAMP knobs.
/// Setting the sweep variable itself replaces the sweep values.
void apply_override(RunPlan &plan, const std::string &assignment);

/// Re-derives dependent defaults (n_rf) and validates every sweep.
void finalize_plan(RunPlan &plan);

} // namespace risce
