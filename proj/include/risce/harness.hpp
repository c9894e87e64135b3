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

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "risce/angles.hpp"
#include "risce/model.hpp"
#include "risce/reconstruct.hpp"
#include "risce/recovery.hpp"
#include "risce/sounding.hpp"

namespace risce {

// ---------------------------------------------------------------- metrics

/// Mean over entries of ||h - ĥ||^2 / ||h||^2.
///
/// Throws UndefinedMetric on a zero true channel.
double nmse(const std::vector<CVector> &h_true,
            const std::vector<CVector> &h_est);

/// Greedy minimum-distance one-to-one matching; returns (true, est) index
/// pairs, min(|true|, |est|) of them.
std::vector<std::pair<int, int>> match_angles(const std::vector<double> &truth,
                                              const std::vector<double> &est);

/// sqrt(mean |θ - θ̂|) over matched pairs, or sqrt(mean |θ - θ̂|^2) when
/// `squared`. Throws InvalidArgument on a cardinality mismatch.
double rmse_angle(const std::vector<double> &truth,
                  const std::vector<double> &est, bool squared = false);

/// Fraction of true angles whose matched estimate lies within interval/2.
double correct_probability(const std::vector<double> &truth,
                           const std::vector<double> &est, double interval);

// ---------------------------------------------------------------- trials

enum class Algorithm {
  proposed,
  cbs_gamp_all_sc,
  omp_conventional,
  omp_bsa,
  oracle_ls
};

Algorithm parse_algorithm(const std::string &name);
std::string algorithm_name(Algorithm algorithm);

struct AlgorithmOptions {
  SolverKind solver = SolverKind::omp_cbs; // `proposed` and CBS all-SC
  GampParams gamp;
  int n_sub = 0;            // 0: default_n_sub(N_R)
  bool known_bs_dod = false; // `proposed` skips EnM and uses true DoDs
};

/// Everything one Monte Carlo trial shares across algorithms.
struct TrialData {
  SystemConfig config;
  ChannelRealization channel;
  PilotSchedule pilots;
  MeasurementSet measurements;
};

/// Draws paths, pilots and noise in that order from `rng`.
///
/// Non-empty `bs_dod_indices` (0-based, one per BS path) overrides the drawn
/// BS DoDs with those grid samples.
TrialData simulate_trial(const SystemConfig &config, const CMatrix &analog_bf,
                         Rng &rng,
                         const std::vector<int> &bs_dod_indices = {});

/// Angle estimates of one user, for metrics and spectra.
struct UserAngles {
  BsAngleEstimate bs;
  RisAngleEstimate ris;
};

struct ProposedFrontEnd {
  Phase1Result phase1;
  UserAngles angles;
};

/// Phase I, EnM and (when `with_music`) DS-MUSIC of `proposed` for user k.
ProposedFrontEnd proposed_front_end(const TrialData &trial, int k,
                                    const AlgorithmOptions &options,
                                    bool with_music = true);

struct AlgorithmOutcome {
  double nmse = 0.0;
  std::vector<double> angle_errors; // |γ - γ̂| over matched RIS angles
  double pc_bs = NAN;
  double pc_ris = NAN;
  double solver_calls = 0.0; // per user
  int ls_solves = 0;         // per user
  double runtime_ms = 0.0;
  std::vector<UserAngles> angles; // `proposed` only
};

/// Runs one algorithm on every user of a trial.
AlgorithmOutcome run_algorithm(Algorithm algorithm, const TrialData &trial,
                               const AlgorithmOptions &options);

// ---------------------------------------------------------------- sweeps

struct SweepSpec {
  std::string variable = "snr_db"; // snr_db|n_subframes|n_slots|n_paths|n_ris
  std::vector<double> values{20.0};
  std::vector<std::string> algorithms{"proposed"};
  int trials = 50;
  SystemConfig base;
  AlgorithmOptions options;
  std::vector<int> bs_dod_indices; // 0-based
  std::string label;               // appended to algorithm names as "/label"
  bool rmse_squared = false;
  bool timing = false;
};

/// Applies one sweep value to a configuration. n_paths sets L and J.
void apply_variable(SystemConfig &config, const std::string &variable,
                    double value);

struct SweepRow {
  std::string algorithm;
  std::string variable;
  double value = 0.0;
  int trials = 0;
  double nmse_mean = NAN;
  double nmse_ci = NAN;
  double rmse_mean = NAN;
  double pc_bs = NAN;
  double pc_ris = NAN;
  double runtime_ms = NAN;
  double solver_calls = NAN;
  int failures = 0;
};

/// Stream of the per-sweep analog beamformer, independent of trial streams.
Rng analog_rng(std::uint64_t seed);

/// Trial i uses seed base ^ i; W_RF is drawn once per sweep value from the
/// base seed. Throws Error when more than 10% of an algorithm's trials fail.
std::vector<SweepRow> run_sweep(const SweepSpec &spec);

/// Sorts by (algorithm, value).
void sort_rows(std::vector<SweepRow> &rows);

void write_csv(std::ostream &out, const std::vector<SweepRow> &rows);
void write_json(std::ostream &out, const std::vector<SweepRow> &rows);

/// Shortest "%.10g" rendering; "nan" for NaN.
std::string format_number(double v);

} // namespace risce
