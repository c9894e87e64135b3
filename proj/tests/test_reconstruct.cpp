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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "risce/errors.hpp"
#include "risce/reconstruct.hpp"
#include "support/oracles.hpp"

using namespace risce;

namespace {

SystemConfig small_config() {
  SystemConfig c;
  c.n_tx = 8;
  c.n_ris = 32;
  c.n_rf = 4;
  c.n_users = 1;
  c.n_sc = 16;
  c.q_tx = 16;
  c.q_ris = 32;
  c.n_paths_bs = 2;
  c.n_paths_ue = 2;
  c.n_subframes = 20;
  c.n_slots = 10;
  return c;
}

struct Instance {
  SystemConfig config;
  ChannelRealization channel;
  PilotSchedule pilots;
  MeasurementSet meas;
};

Instance make_instance(const SystemConfig &c, std::uint64_t seed, double noise_var) {
  Rng rng(seed);
  Instance in{c, {}, {}, {}};
  const PathDraw p = draw_paths(c, rng);
  in.channel = synthesize_channels(c, p, subcarrier_frequencies(c.f_c, c.bandwidth, c.n_sc));
  in.pilots = generate_pilots(c, rng);
  in.meas = measure_all(in.channel, in.pilots, noise_var, rng);
  return in;
}

// x̃ with X(l*J + j, l') = δ(l, l') σ_l β_j / sqrt(N_R).
CVector true_reduced(const ChannelRealization &ch, int k, int m) {
  const auto &bs = ch.paths_bs_ris;
  const auto &ue = ch.paths_ris_ue[k];
  const Index L = static_cast<Index>(bs.count()), J = static_cast<Index>(ue.count());
  CVector x = CVector::Zero(L * L * J);
  const double f = ch.freqs[m];
  for (Index l = 0; l < L; ++l)
    for (Index j = 0; j < J; ++j)
      x(l * (L * J) + l * J + j) =
          bs.gains[l] * std::polar(1.0, -2 * oracle::kPi * bs.delays[l] * f) * ue.gains[j] *
          std::polar(1.0, -2 * oracle::kPi * ue.delays[j] * f) / std::sqrt(double(ch.n_ris));
  return x;
}

double rel_sq(const CVector &a, const CVector &b) {
  return (a - b).squaredNorm() / b.squaredNorm();
}

} // namespace

TEST_CASE("reduced observation") {
  SUBCASE("one path each gives one Kronecker column") {
    SystemConfig c = small_config();
    Rng rng(1);
    const PilotSchedule p = generate_pilots(c, rng);
    const std::vector<double> dod{0.3};
    const CoupledAngles g{{-0.7}};
    const ReducedObservation obs = build_reduced_observation(p, dod, g, 0.96);
    REQUIRE(obs.psi_tilde.cols() == 1);
    const CMatrix col = stack_pilot_matrix(p) *
                        oracle::kron(oracle::arv(0.3, 0.96, c.n_tx).conjugate(),
                                     oracle::arv(-0.7, 0.96, c.n_ris));
    CHECK(oracle::rel_err(obs.psi_tilde, col) < 1e-12);
    CHECK(obs.condition == doctest::Approx(1.0));
    CHECK_FALSE(obs.rank_deficient);
  }

  SUBCASE("L = J = 3 gives 27 columns") {
    SystemConfig c = small_config();
    Rng rng(2);
    const PilotSchedule p = generate_pilots(c, rng);
    const std::vector<double> dod{-0.5, 0.1, 0.6};
    const CoupledAngles g{{-1.0, 0.2, 1.3}, {-0.4, 0.5, 0.9}, {-1.5, -0.1, 0.7}};
    const ReducedObservation obs = build_reduced_observation(p, dod, g, 1.02);
    CHECK(obs.psi_tilde.cols() == 27);
    CHECK(obs.psi_tilde.rows() == c.pilot_length());
    CHECK(obs.bs_arm.cols() == 3);
    CHECK(obs.ris_arm.cols() == 9);
    CHECK(oracle::rel_err(obs.ris_arm.col(4), oracle::arv(0.5, 1.02, c.n_ris)) < 1e-13);
  }

  SUBCASE("too few measurements is rejected") {
    SystemConfig c = small_config();
    c.n_subframes = 1;
    c.n_slots = 3;
    Rng rng(3);
    const PilotSchedule p = generate_pilots(c, rng);
    const std::vector<double> dod{-0.5, 0.5};
    const CoupledAngles g{{0.1, 0.2}, {0.3, 0.4}};
    CHECK_THROWS_AS(build_reduced_observation(p, dod, g, 1.0), UnderdeterminedConfig);
  }

  SUBCASE("zero bandwidth makes every subcarrier identical") {
    SystemConfig c = small_config();
    c.bandwidth = 0.0;
    Rng rng(4);
    const PilotSchedule p = generate_pilots(c, rng);
    const auto etas = relative_frequencies(c);
    const std::vector<double> dod{-0.25, 0.5};
    const CoupledAngles g{{0.1, 0.6}, {-0.3, 1.2}};
    const CMatrix first = build_reduced_observation(p, dod, g, etas.front()).psi_tilde;
    for (double eta : etas)
      CHECK((build_reduced_observation(p, dod, g, eta).psi_tilde - first).norm() == 0.0);
  }

  SUBCASE("repeated directions are flagged") {
    SystemConfig c = small_config();
    Rng rng(5);
    const PilotSchedule p = generate_pilots(c, rng);
    const std::vector<double> dod{0.25, 0.25};
    const CoupledAngles g{{0.1, 0.6}, {-0.3, 1.2}};
    const ReducedObservation obs = build_reduced_observation(p, dod, g, 1.0);
    CHECK(obs.rank_deficient);
    CHECK(ls_solve(obs, CVector::Ones(c.pilot_length())).pseudo_inverse);
  }
}

TEST_CASE("exact angles reproduce the physical measurements") {
  const SystemConfig c = small_config();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance in = make_instance(c, seed, 0.0);
    const std::vector<double> dod = in.channel.paths_bs_ris.dod_bs;
    const CoupledAngles g = true_coupled_groups(in.channel, 0);
    for (int m : {0, 5, 15}) {
      const ReducedObservation obs =
          build_reduced_observation(in.pilots, dod, g, in.channel.etas[m]);
      const CVector &y = in.meas.y[0][m];
      const CVector xt = true_reduced(in.channel, 0, m);
      CHECK((obs.psi_tilde * xt - y).norm() < 1e-9 * y.norm());
      CHECK(oracle::rel_err(reduced_channel(obs, xt), in.channel.cascaded_vec(0, m)) < 1e-9);
      const LsSolution s = ls_solve(obs, y);
      CHECK(s.residual_norm < 1e-9 * y.norm());
      CHECK(rel_sq(reduced_channel(obs, s.x), in.channel.cascaded_vec(0, m)) < 1e-16);
    }
  }
}

TEST_CASE("least squares") {
  const SystemConfig c = small_config();
  Rng rng(6);
  const PilotSchedule p = generate_pilots(c, rng);
  const std::vector<double> dod{-0.4, 0.35};
  const CoupledAngles g{{-0.9, 0.3}, {0.2, 1.1}};
  const ReducedObservation obs = build_reduced_observation(p, dod, g, 0.98);

  CHECK(ls_solve(obs, CVector::Zero(c.pilot_length())).x.norm() == 0.0);

  std::mt19937_64 gen(7);
  const CVector y = oracle::random_cvector(c.pilot_length(), gen);
  const LsSolution s = ls_solve(obs, y);
  CHECK(oracle::rel_err(s.x, oracle::pinv_solve(obs.psi_tilde, y)) < 1e-9);

  // Appending duplicated rows of a consistent system does not move the LS fit.
  const CVector x0 = oracle::random_cvector(static_cast<int>(obs.psi_tilde.cols()), gen);
  ReducedObservation twice = obs;
  twice.psi_tilde.resize(2 * obs.psi_tilde.rows(), obs.psi_tilde.cols());
  twice.psi_tilde << obs.psi_tilde, obs.psi_tilde.topRows(obs.psi_tilde.rows());
  const CVector y0 = obs.psi_tilde * x0;
  CVector y2(2 * y0.size());
  y2 << y0, y0;
  CHECK(oracle::rel_err(ls_solve(twice, y2).x, ls_solve(obs, y0).x) < 1e-9);
  CHECK(oracle::rel_err(ls_solve(obs, y0).x, x0) < 1e-9);
}

TEST_CASE("Phase II over all subcarriers") {
  const SystemConfig c = small_config();
  const Instance in = make_instance(c, 11, 0.0);
  Phase1Result p1;
  p1.sc = phase1_subcarriers(c.n_sc);
  for (int s = 0; s < 2; ++s)
    p1.h_cas[s] = in.channel.cascaded_vec(0, p1.sc[s]);
  const std::vector<double> dod = in.channel.paths_bs_ris.dod_bs;
  const CoupledAngles g = true_coupled_groups(in.channel, 0);
  const ReconstructedCsi r =
      reconstruct_all_sc(p1, dod, g, in.pilots, in.channel.etas, in.meas.y[0]);
  CHECK(r.ls_solves == c.n_sc - 2);
  REQUIRE(r.h_cas.size() == static_cast<std::size_t>(c.n_sc));
  double nmse = 0.0;
  for (int m = 0; m < c.n_sc; ++m) {
    nmse += rel_sq(r.h_cas[m], in.channel.cascaded_vec(0, m)) / c.n_sc;
    const bool phase1 = m == p1.sc[0] || m == p1.sc[1];
    CHECK(r.x_tilde[m].size() == (phase1 ? 0 : 8));
    if (phase1)
      CHECK(r.h_cas[m] == p1.h_cas[m == p1.sc[0] ? 0 : 1]);
  }
  CHECK(nmse < 1e-6);
}

TEST_CASE("oracle LS") {
  SystemConfig c = small_config();

  SUBCASE("noiseless") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Instance in = make_instance(c, seed, 0.0);
      const ReconstructedCsi r = oracle_ls(in.channel, 0, in.pilots, in.meas.y[0]);
      CHECK(r.ls_solves == c.n_sc);
      for (int m = 0; m < c.n_sc; ++m)
        CHECK(rel_sq(r.h_cas[m], in.channel.cascaded_vec(0, m)) < 1e-10);
    }
  }

  SUBCASE("true coupled groups are DoA minus DoD per BS path") {
    const Instance in = make_instance(c, 3, 0.0);
    const CoupledAngles g = true_coupled_groups(in.channel, 0);
    REQUIRE(g.size() == 2);
    for (std::size_t l = 0; l < 2; ++l)
      for (std::size_t j = 0; j < 2; ++j)
        CHECK(g[l][j] == doctest::Approx(in.channel.paths_bs_ris.doa_ris[l] -
                                         in.channel.paths_ris_ue[0].dod_ris[j]));
  }

  SUBCASE("30 dB mean NMSE below 1e-3") {
    c.n_sc = 4;
    double acc = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const Instance in = make_instance(c, seed, noise_variance(c, 30.0));
      const ReconstructedCsi r = oracle_ls(in.channel, 0, in.pilots, in.meas.y[0]);
      for (int m = 0; m < c.n_sc; ++m)
        acc += rel_sq(r.h_cas[m], in.channel.cascaded_vec(0, m)) / c.n_sc;
    }
    CHECK(acc / 100 < 1e-3);
  }

  SUBCASE("mean NMSE falls with SNR") {
    c.n_sc = 4;
    std::vector<double> curve;
    for (double snr : {0.0, 10.0, 20.0, 30.0}) {
      double acc = 0.0;
      for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const Instance in = make_instance(c, 5000 + seed, noise_variance(c, snr));
        const ReconstructedCsi r = oracle_ls(in.channel, 0, in.pilots, in.meas.y[0]);
        for (int m = 0; m < c.n_sc; ++m)
          acc += rel_sq(r.h_cas[m], in.channel.cascaded_vec(0, m)) / c.n_sc;
      }
      curve.push_back(acc / 200);
    }
    int inversions = 0;
    for (std::size_t i = 1; i < curve.size(); ++i)
      if (curve[i] > curve[i - 1])
        ++inversions;
      else
        CHECK(curve[i] <= curve[i - 1]);
    CHECK(inversions == 0);
  }
}
