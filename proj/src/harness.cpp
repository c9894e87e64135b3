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

#include "risce/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <limits>
#include <optional>
#include <ostream>

#include <json.hpp>

#include "risce/errors.hpp"

namespace risce {

// ---------------------------------------------------------------- metrics

double nmse(const std::vector<CVector> &h_true,
            const std::vector<CVector> &h_est) {
  if (h_true.size() != h_est.size() || h_true.empty())
    throw InvalidArgument("NMSE: channel lists must be non-empty and match");
  double acc = 0.0;
  for (std::size_t i = 0; i < h_true.size(); ++i) {
    if (h_true[i].size() != h_est[i].size())
      throw InvalidArgument("NMSE: channel shapes differ");
    const double e = h_true[i].squaredNorm();
    if (e == 0.0)
      throw UndefinedMetric("NMSE: true channel has zero energy");
    acc += (h_true[i] - h_est[i]).squaredNorm() / e;
  }
  return acc / static_cast<double>(h_true.size());
}

std::vector<std::pair<int, int>> match_angles(const std::vector<double> &truth,
                                              const std::vector<double> &est) {
  struct Cand {
    double d;
    int i, j;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t j = 0; j < est.size(); ++j)
      cands.push_back({std::abs(truth[i] - est[j]), static_cast<int>(i),
                       static_cast<int>(j)});
  std::sort(cands.begin(), cands.end(), [](const Cand &a, const Cand &b) {
    if (a.d != b.d)
      return a.d < b.d;
    if (a.i != b.i)
      return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<char> used_t(truth.size(), 0), used_e(est.size(), 0);
  std::vector<std::pair<int, int>> out;
  for (const Cand &c : cands) {
    if (used_t[static_cast<std::size_t>(c.i)] ||
        used_e[static_cast<std::size_t>(c.j)])
      continue;
    used_t[static_cast<std::size_t>(c.i)] = 1;
    used_e[static_cast<std::size_t>(c.j)] = 1;
    out.emplace_back(c.i, c.j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double rmse_angle(const std::vector<double> &truth,
                  const std::vector<double> &est, bool squared) {
  if (truth.size() != est.size())
    throw InvalidArgument("RMSE: angle sets differ in size");
  if (truth.empty())
    throw InvalidArgument("RMSE: empty angle sets");
  double acc = 0.0;
  for (auto [i, j] : match_angles(truth, est)) {
    const double d = std::abs(truth[static_cast<std::size_t>(i)] -
                              est[static_cast<std::size_t>(j)]);
    acc += squared ? d * d : d;
  }
  return std::sqrt(acc / static_cast<double>(truth.size()));
}

double correct_probability(const std::vector<double> &truth,
                           const std::vector<double> &est, double interval) {
  if (truth.empty())
    throw InvalidArgument("correct probability: empty truth");
  int hits = 0;
  for (auto [i, j] : match_angles(truth, est))
    if (std::abs(truth[static_cast<std::size_t>(i)] -
                 est[static_cast<std::size_t>(j)]) < interval / 2)
      ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

// ---------------------------------------------------------------- trials

Algorithm parse_algorithm(const std::string &name) {
  if (name == "proposed")
    return Algorithm::proposed;
  if (name == "cbs_gamp_all_sc")
    return Algorithm::cbs_gamp_all_sc;
  if (name == "omp_conventional")
    return Algorithm::omp_conventional;
  if (name == "omp_bsa")
    return Algorithm::omp_bsa;
  if (name == "oracle_ls")
    return Algorithm::oracle_ls;
  throw InvalidConfig("unknown algorithm '" + name + "'");
}

std::string algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
  case Algorithm::proposed:
    return "proposed";
  case Algorithm::cbs_gamp_all_sc:
    return "cbs_gamp_all_sc";
  case Algorithm::omp_conventional:
    return "omp_conventional";
  case Algorithm::omp_bsa:
    return "omp_bsa";
  case Algorithm::oracle_ls:
    return "oracle_ls";
  }
  return "unknown";
}

TrialData simulate_trial(const SystemConfig &config, const CMatrix &analog_bf,
                         Rng &rng, const std::vector<int> &bs_dod_indices) {
  config.validate();
  TrialData d;
  d.config = config;
  PathDraw paths = draw_paths(config, rng);
  if (!bs_dod_indices.empty()) {
    if (static_cast<int>(bs_dod_indices.size()) != config.n_paths_bs)
      throw InvalidConfig("bs_dod_indices needs one index per BS path");
    auto &dod = paths.bs_ris.dod_bs;
    for (std::size_t l = 0; l < dod.size(); ++l) {
      const int q = bs_dod_indices[l];
      if (q < 0 || q >= config.q_tx)
        throw InvalidConfig("bs_dod_indices entry outside the BS grid");
      dod[l] = grid_sample(q, config.q_tx);
    }
  }
  const auto freqs =
      subcarrier_frequencies(config.f_c, config.bandwidth, config.n_sc);
  d.channel = synthesize_channels(config, paths, freqs);
  d.pilots = generate_pilots(config, analog_bf, rng);
  d.measurements = measure_all(d.channel, d.pilots,
                               noise_variance(config, config.snr_db), rng);
  return d;
}

namespace {

std::vector<double> flatten(const CoupledAngles &groups) {
  std::vector<double> out;
  for (const auto &g : groups)
    out.insert(out.end(), g.begin(), g.end());
  return out;
}

CMatrix as_matrix(const CVector &h, int n_ris, int n_tx) {
  return Eigen::Map<const CMatrix>(h.data(), n_ris, n_tx);
}

std::vector<CVector> true_channels(const ChannelRealization &ch, int k) {
  std::vector<CVector> out;
  for (int m = 0; m < ch.n_sc(); ++m)
    out.push_back(ch.cascaded_vec(k, m));
  return out;
}

} // namespace

ProposedFrontEnd proposed_front_end(const TrialData &trial, int k,
                                    const AlgorithmOptions &options,
                                    bool with_music) {
  const SystemConfig &cfg = trial.config;
  const ChannelRealization &ch = trial.channel;
  const auto &y = trial.measurements.y[static_cast<std::size_t>(k)];

  Phase1Options p1;
  p1.solver = options.solver;
  p1.gamp = options.gamp;
  ProposedFrontEnd out;
  out.phase1 = estimate_cascaded_two_sc(y, trial.pilots, cfg, ch.etas,
                                        trial.measurements.noise_var, p1);
  const Phase1Result &phase1 = out.phase1;
  UserAngles &angles = out.angles;
  if (options.known_bs_dod) {
    angles.bs.dods = ch.paths_bs_ris.dod_bs;
  } else {
    angles.bs = enm_estimate(phase1.x_hat[0], phase1.x_hat[1], cfg.n_paths_bs,
                             cfg.q_tx,
                             static_cast<int>(phase1.dict[0].ris.cols()));
  }
  if (!with_music)
    return out;

  std::array<CMatrix, 2> rest;
  std::array<double, 2> etas{};
  for (std::size_t i = 0; i < 2; ++i) {
    etas[i] = ch.etas[static_cast<std::size_t>(phase1.sc[i])];
    const CMatrix arm = array_response_matrix(angles.bs.dods, etas[i], cfg.n_tx);
    rest[i] = project_rest_csi(as_matrix(phase1.h_cas[i], cfg.n_ris, cfg.n_tx),
                               arm);
  }
  const int n_sub = options.n_sub > 0 ? options.n_sub : default_n_sub(cfg.n_ris);
  angles.ris = ds_music(rest, cfg.n_paths_ue, cfg.q_ris, etas, n_sub);
  return out;
}

namespace {

struct UserResult {
  double nmse = 0.0;
  std::vector<double> angle_errors;
  std::optional<double> pc_bs, pc_ris;
  int solver_calls = 0;
  int ls_solves = 0;
  std::optional<UserAngles> angles;
};

UserResult run_proposed(const TrialData &trial, int k,
                        const AlgorithmOptions &options) {
  const SystemConfig &cfg = trial.config;
  const ChannelRealization &ch = trial.channel;
  const auto &y = trial.measurements.y[static_cast<std::size_t>(k)];
  ProposedFrontEnd front = proposed_front_end(trial, k, options);
  const Phase1Result &phase1 = front.phase1;
  UserAngles &angles = front.angles;

  const ReconstructedCsi csi =
      reconstruct_all_sc(phase1, angles.bs.dods, angles.ris.coupled_angles,
                         trial.pilots, ch.etas, y);

  UserResult r;
  r.nmse = nmse(true_channels(ch, k), csi.h_cas);
  r.solver_calls = phase1.solver_calls;
  r.ls_solves = csi.ls_solves;
  const std::vector<double> true_coupled = true_coupled_angles(ch, k);
  const std::vector<double> est_coupled = flatten(angles.ris.coupled_angles);
  for (auto [i, j] : match_angles(true_coupled, est_coupled))
    r.angle_errors.push_back(std::abs(true_coupled[static_cast<std::size_t>(i)] -
                                      est_coupled[static_cast<std::size_t>(j)]));
  r.pc_bs = correct_probability(ch.paths_bs_ris.dod_bs, angles.bs.dods,
                                2.0 / cfg.q_tx);
  r.pc_ris = correct_probability(true_coupled, est_coupled, 2.0 / cfg.q_ris);
  r.angles = std::move(angles);
  return r;
}

UserResult run_per_subcarrier(const TrialData &trial, int k,
                              SolverKind solver,
                              const AlgorithmOptions &options) {
  const SystemConfig &cfg = trial.config;
  const ChannelRealization &ch = trial.channel;
  const auto &y = trial.measurements.y[static_cast<std::size_t>(k)];
  const DictionaryVariant variant = solver_variant(solver);
  std::vector<CVector> h_est(static_cast<std::size_t>(cfg.n_sc));
  for (int m = 0; m < cfg.n_sc; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    const SubcarrierDictionary dict = make_dictionary(cfg, ch.etas[mi], variant);
    const CVector x = solve_subcarrier(dict, trial.pilots, y[mi], cfg,
                                       trial.measurements.noise_var, solver,
                                       options.gamp);
    h_est[mi] = apply_total_dictionary(dict.bs, dict.ris, x);
  }
  UserResult r;
  r.nmse = nmse(true_channels(ch, k), h_est);
  r.solver_calls = cfg.n_sc;
  return r;
}

UserResult run_user(Algorithm algorithm, const TrialData &trial, int k,
                    const AlgorithmOptions &options) {
  switch (algorithm) {
  case Algorithm::proposed:
    return run_proposed(trial, k, options);
  case Algorithm::cbs_gamp_all_sc:
    return run_per_subcarrier(trial, k, options.solver, options);
  case Algorithm::omp_conventional:
    return run_per_subcarrier(trial, k, SolverKind::omp_conventional, options);
  case Algorithm::omp_bsa:
    return run_per_subcarrier(trial, k, SolverKind::omp_bsa, options);
  case Algorithm::oracle_ls: {
    const auto &y = trial.measurements.y[static_cast<std::size_t>(k)];
    const ReconstructedCsi csi = oracle_ls(trial.channel, k, trial.pilots, y);
    UserResult r;
    r.nmse = nmse(true_channels(trial.channel, k), csi.h_cas);
    r.ls_solves = csi.ls_solves;
    return r;
  }
  }
  throw InvalidArgument("unknown algorithm");
}

} // namespace

AlgorithmOutcome run_algorithm(Algorithm algorithm, const TrialData &trial,
                               const AlgorithmOptions &options) {
  const auto start = std::chrono::steady_clock::now();
  AlgorithmOutcome out;
  const int n_users = trial.channel.n_users();
  double pc_bs = 0.0, pc_ris = 0.0;
  bool has_pc = false;
  for (int k = 0; k < n_users; ++k) {
    UserResult r = run_user(algorithm, trial, k, options);
    out.nmse += r.nmse / n_users;
    out.solver_calls += static_cast<double>(r.solver_calls) / n_users;
    out.ls_solves = r.ls_solves;
    out.angle_errors.insert(out.angle_errors.end(), r.angle_errors.begin(),
                            r.angle_errors.end());
    if (r.pc_bs && r.pc_ris) {
      has_pc = true;
      pc_bs += *r.pc_bs / n_users;
      pc_ris += *r.pc_ris / n_users;
    }
    if (r.angles)
      out.angles.push_back(std::move(*r.angles));
  }
  if (has_pc) {
    out.pc_bs = pc_bs;
    out.pc_ris = pc_ris;
  }
  out.runtime_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return out;
}

// ---------------------------------------------------------------- sweeps

void apply_variable(SystemConfig &config, const std::string &variable,
                    double value) {
  auto as_int = [&]() {
    const double r = std::round(value);
    if (std::abs(r - value) > 1e-9 || r < 1)
      throw InvalidConfig("sweep variable '" + variable +
                          "' needs positive integer values");
    return static_cast<int>(r);
  };
  if (variable == "snr_db")
    config.snr_db = value;
  else if (variable == "n_subframes")
    config.n_subframes = as_int();
  else if (variable == "n_slots")
    config.n_slots = as_int();
  else if (variable == "n_paths")
    config.n_paths_bs = config.n_paths_ue = as_int();
  else if (variable == "n_ris")
    config.n_ris = as_int();
  else
    throw InvalidConfig("unknown sweep variable '" + variable + "'");
}

Rng analog_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), 0x52495345u};
  return Rng(seq);
}

namespace {

double mean_of(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v)
    s += x;
  return v.empty() ? NAN : s / static_cast<double>(v.size());
}

} // namespace

std::vector<SweepRow> run_sweep(const SweepSpec &spec) {
  if (spec.trials < 1)
    throw InvalidConfig("trials must be >= 1");
  if (spec.values.empty())
    throw InvalidConfig("sweep values must be non-empty");
  if (spec.algorithms.empty())
    throw InvalidConfig("sweep needs at least one algorithm");
  std::vector<Algorithm> algos;
  for (const auto &a : spec.algorithms)
    algos.push_back(parse_algorithm(a));

  std::vector<SweepRow> rows;
  for (double value : spec.values) {
    SystemConfig cfg = spec.base;
    apply_variable(cfg, spec.variable, value);
    cfg.validate();
    Rng arng = analog_rng(cfg.seed);
    const CMatrix analog = draw_analog_beamformer(cfg, arng);

    const std::size_t n_alg = algos.size();
    const int n_trials = spec.trials;
    std::vector<std::vector<std::optional<AlgorithmOutcome>>> results(
        n_alg, std::vector<std::optional<AlgorithmOutcome>>(
                   static_cast<std::size_t>(n_trials)));
    std::exception_ptr fatal;

#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < n_trials; ++t) {
      try {
        Rng rng(cfg.seed ^ static_cast<std::uint64_t>(t));
        const TrialData trial =
            simulate_trial(cfg, analog, rng, spec.bs_dod_indices);
        for (std::size_t a = 0; a < n_alg; ++a) {
          try {
            results[a][static_cast<std::size_t>(t)] =
                run_algorithm(algos[a], trial, spec.options);
          } catch (const InvalidConfig &) {
            throw;
          } catch (const Error &) {
            // counted as a failure below
          }
        }
      } catch (...) {
#pragma omp critical(risce_sweep_error)
        if (!fatal)
          fatal = std::current_exception();
      }
    }
    if (fatal)
      std::rethrow_exception(fatal);

    for (std::size_t a = 0; a < n_alg; ++a) {
      SweepRow row;
      row.algorithm = algorithm_name(algos[a]);
      if (!spec.label.empty())
        row.algorithm += "/" + spec.label;
      row.variable = spec.variable;
      row.value = value;
      row.trials = n_trials;
      std::vector<double> nm, pcb, pcr, rt, calls, errs;
      for (const auto &r : results[a]) {
        if (!r) {
          ++row.failures;
          continue;
        }
        nm.push_back(r->nmse);
        if (!std::isnan(r->pc_bs))
          pcb.push_back(r->pc_bs);
        if (!std::isnan(r->pc_ris))
          pcr.push_back(r->pc_ris);
        rt.push_back(r->runtime_ms);
        calls.push_back(r->solver_calls);
        for (double e : r->angle_errors)
          errs.push_back(spec.rmse_squared ? e * e : e);
      }
      if (row.failures * 10 > n_trials)
        throw Error("sweep aborted: " + row.algorithm + " failed " +
                    std::to_string(row.failures) + " of " +
                    std::to_string(n_trials) + " trials at " + spec.variable +
                    "=" + format_number(value));
      row.nmse_mean = mean_of(nm);
      if (nm.size() > 1) {
        double ss = 0.0;
        for (double x : nm)
          ss += (x - row.nmse_mean) * (x - row.nmse_mean);
        const double sd = std::sqrt(ss / static_cast<double>(nm.size() - 1));
        row.nmse_ci = 1.96 * sd / std::sqrt(static_cast<double>(nm.size()));
      } else if (nm.size() == 1) {
        row.nmse_ci = 0.0;
      }
      if (!errs.empty())
        row.rmse_mean = std::sqrt(mean_of(errs));
      row.pc_bs = mean_of(pcb);
      row.pc_ris = mean_of(pcr);
      if (spec.timing)
        row.runtime_ms = mean_of(rt);
      row.solver_calls = mean_of(calls);
      rows.push_back(row);
    }
  }
  sort_rows(rows);
  return rows;
}

void sort_rows(std::vector<SweepRow> &rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow &a, const SweepRow &b) {
                     if (a.algorithm != b.algorithm)
                       return a.algorithm < b.algorithm;
                     return a.value < b.value;
                   });
}

std::string format_number(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_csv(std::ostream &out, const std::vector<SweepRow> &rows) {
  out << "algorithm,variable,value,trials,nmse_mean,nmse_ci,rmse_mean,pc_bs,"
         "pc_ris,runtime_ms,solver_calls,failures\n";
  for (const auto &r : rows)
    out << r.algorithm << ',' << r.variable << ',' << format_number(r.value)
        << ',' << r.trials << ',' << format_number(r.nmse_mean) << ','
        << format_number(r.nmse_ci) << ',' << format_number(r.rmse_mean) << ','
        << format_number(r.pc_bs) << ',' << format_number(r.pc_ris) << ','
        << format_number(r.runtime_ms) << ',' << format_number(r.solver_calls)
        << ',' << r.failures << '\n';
}

void write_json(std::ostream &out, const std::vector<SweepRow> &rows) {
  auto num = [](double v) -> nlohmann::ordered_json {
    if (!std::isfinite(v))
      return nullptr;
    return std::stod(format_number(v));
  };
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto &r : rows)
    arr.push_back({{"algorithm", r.algorithm},
                   {"variable", r.variable},
                   {"value", num(r.value)},
                   {"trials", r.trials},
                   {"nmse_mean", num(r.nmse_mean)},
                   {"nmse_ci", num(r.nmse_ci)},
                   {"rmse_mean", num(r.rmse_mean)},
                   {"pc_bs", num(r.pc_bs)},
                   {"pc_ris", num(r.pc_ris)},
                   {"runtime_ms", num(r.runtime_ms)},
                   {"solver_calls", num(r.solver_calls)},
                   {"failures", r.failures}});
  out << arr.dump(2) << '\n';
}

} // namespace risce
