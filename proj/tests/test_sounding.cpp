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
#include "risce/sounding.hpp"
#include "support/oracles.hpp"
#include "support/truth.hpp"

using namespace risce;

namespace {

SystemConfig small_config() {
  SystemConfig c;
  c.n_tx = 4;
  c.n_ris = 8;
  c.n_rf = 2;
  c.n_users = 2;
  c.n_sc = 4;
  c.q_tx = 8;
  c.q_ris = 8;
  c.n_paths_bs = 2;
  c.n_paths_ue = 2;
  c.n_subframes = 5;
  c.n_slots = 3;
  return c;
}

ChannelRealization make_channel(const SystemConfig &c, Rng &rng) {
  const PathDraw p = draw_paths(c, rng);
  return synthesize_channels(c, p, subcarrier_frequencies(c.f_c, c.bandwidth, c.n_sc));
}

} // namespace

TEST_CASE("pilot schedule") {
  const SystemConfig c = small_config();
  Rng rng(3);
  const PilotSchedule p = generate_pilots(c, rng);
  CHECK(p.analog_bf.rows() == c.n_tx);
  CHECK(p.analog_bf.cols() == c.n_rf);
  for (Index i = 0; i < p.analog_bf.size(); ++i)
    CHECK(std::abs(p.analog_bf(i)) == doctest::Approx(1.0 / std::sqrt(c.n_tx)));
  CHECK(p.ris_phases.rows() == c.n_subframes);
  CHECK(p.ris_phases.cols() == c.n_ris);
  for (Index i = 0; i < p.ris_phases.size(); ++i)
    CHECK(std::abs(p.ris_phases(i)) == doctest::Approx(1.0));
  REQUIRE(p.processed.cols() == c.pilot_length());
  CHECK(oracle::rel_err(p.processed, p.analog_bf * p.baseband_bf) < 1e-13);
  for (Index j = 0; j < p.processed.cols(); ++j)
    CHECK(p.processed.col(j).norm() == doctest::Approx(1.0));
  CHECK((p.processed_block(2) - p.processed.middleCols(2 * c.n_slots, c.n_slots))
            .norm() == 0.0);

  Rng again(3);
  const PilotSchedule q = generate_pilots(c, again);
  CHECK(p.processed == q.processed);
  CHECK(p.ris_phases == q.ris_phases);

  Rng a(9), b(9);
  const CMatrix w = draw_analog_beamformer(c, a);
  const PilotSchedule fixed = generate_pilots(c, w, b);
  CHECK(fixed.analog_bf == w);
}

TEST_CASE("stacked pilot matrix") {
  SystemConfig c = small_config();
  Rng rng(12);
  const PilotSchedule p = generate_pilots(c, rng);
  const CMatrix r = stack_pilot_matrix(p);
  REQUIRE(r.rows() == c.pilot_length());
  REQUIRE(r.cols() == c.n_tx * c.n_ris);
  for (int t = 0; t < c.n_subframes; ++t)
    for (int s = 0; s < c.n_slots; ++s) {
      const CMatrix row =
          oracle::kron(p.processed.col(t * c.n_slots + s).transpose(), p.ris_phases.row(t));
      CHECK((r.row(t * c.n_slots + s) - row.row(0)).norm() < 1e-14);
    }

  SUBCASE("single RIS element with unit phase degenerates to the pilots") {
    c.n_ris = 1;
    c.q_ris = 2;
    c.n_paths_ue = 1;
    c.n_paths_bs = 1;
    Rng r2(1);
    PilotSchedule q = generate_pilots(c, r2);
    q.ris_phases.setOnes();
    CHECK((stack_pilot_matrix(q) - q.processed.transpose()).norm() < 1e-15);
  }
}

TEST_CASE("observation matrix") {
  const SystemConfig c = small_config();
  Rng rng(4);
  const PilotSchedule p = generate_pilots(c, rng);
  const double eta = 0.97;
  const CMatrix ct = build_bs_dictionary(c.q_tx, eta, c.n_tx);
  const CbsDictionary cbs = build_cbs_dictionary(c.q_ris, eta, c.n_ris);
  const ObservationSet obs = assemble_observation(p, build_total_dictionary(ct, eta, cbs));
  CHECK(obs.psi.rows() == c.pilot_length());
  CHECK(obs.psi.cols() == c.q_tx * cbs.q_b);
  const CMatrix pi = oracle::kron(oracle::bs_dictionary(c.q_tx, eta, c.n_tx).conjugate(),
                                  oracle::cbs(c.q_ris, eta, c.n_ris));
  CHECK(oracle::rel_err(obs.psi, obs.r_bar * pi) < 1e-13);
  const auto op = observation_operator(p, ct, cbs.columns);
  CHECK(oracle::rel_err(op->dense(), obs.psi) < 1e-12);
}

TEST_CASE("single-slot observation matches the physical model") {
  SystemConfig c = small_config();
  c.n_subframes = 1;
  c.n_slots = 1;
  c.n_ris = 4;
  std::mt19937_64 g(77);
  Rng rng(2);
  const PilotSchedule p = generate_pilots(c, rng);
  const CMatrix h = oracle::random_cmatrix(c.n_ris, c.n_tx, g);
  cd ref = 0.0;
  for (int i = 0; i < c.n_ris; ++i)
    for (int n = 0; n < c.n_tx; ++n)
      ref += p.ris_phases(0, i) * h(i, n) * p.processed(n, 0);
  const CVector y = sound_channel(h, p);
  REQUIRE(y.size() == 1);
  CHECK(std::abs(y(0) - ref) < 1e-13);
  const CVector v = Eigen::Map<const CVector>(h.data(), h.size());
  CHECK(std::abs((stack_pilot_matrix(p) * v)(0) - ref) < 1e-13);
}

TEST_CASE("noiseless on-grid measurement equals the dictionary model") {
  const SystemConfig c = small_config();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const ChannelRealization ch = make_channel(c, rng);
    const PilotSchedule p = generate_pilots(c, rng);
    for (int k = 0; k < c.n_users; ++k)
      for (int m = 0; m < c.n_sc; ++m) {
        const double eta = ch.etas[m];
        const auto op = observation_operator(p, build_bs_dictionary(c.q_tx, eta, c.n_tx),
                                             build_cbs_dictionary(c.q_ris, eta, c.n_ris).columns);
        Rng nrng(0);
        const CVector y = measure(ch, p, 0.0, nrng, m, k);
        CHECK(oracle::rel_err(op->apply(truth::sparse(c, ch, k, m)), y) < 1e-9);
      }
  }
}

TEST_CASE("measurements are linear in the channel") {
  const SystemConfig c = small_config();
  std::mt19937_64 g(5);
  Rng rng(6);
  const PilotSchedule p = generate_pilots(c, rng);
  const CMatrix h1 = oracle::random_cmatrix(c.n_ris, c.n_tx, g);
  const CMatrix h2 = oracle::random_cmatrix(c.n_ris, c.n_tx, g);
  CHECK(oracle::rel_err(sound_channel(h1 + h2, p), sound_channel(h1, p) + sound_channel(h2, p)) <
        1e-13);
  CHECK(sound_channel(CMatrix::Zero(c.n_ris, c.n_tx), p).norm() == 0.0);
}

TEST_CASE("noise") {
  SystemConfig c = small_config();
  CHECK(noise_variance(c, std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(noise_variance(c, 10.0) ==
        doctest::Approx(c.n_paths_bs * c.n_paths_ue / double(c.n_ris * c.n_tx) * 0.1));

  SUBCASE("zero channel gives noise at the requested variance") {
    Rng rng(8);
    ChannelRealization ch = make_channel(c, rng);
    for (auto &u : ch.cascaded)
      for (auto &h : u)
        h.setZero();
    const PilotSchedule p = generate_pilots(c, rng);
    const double var = 0.37;
    double acc = 0.0;
    long n = 0;
    while (n < 10000) {
      const CVector y = measure(ch, p, var, rng, 1, 0);
      acc += y.squaredNorm();
      n += y.size();
    }
    CHECK(acc / n == doctest::Approx(var).epsilon(0.05));
  }

  SUBCASE("empirical SNR within 0.2 dB of the request") {
    c.n_users = 1;
    c.n_sc = 2;
    const double snr = 7.0;
    const double var = noise_variance(c, snr);
    double sig = 0.0, noi = 0.0;
    long n = 0;
    for (std::uint64_t t = 0; n < 100000; ++t) {
      Rng rng(1000 + t);
      const ChannelRealization ch = make_channel(c, rng);
      const PilotSchedule p = generate_pilots(c, rng);
      const CVector clean = sound_channel(ch.cascaded[0][0], p);
      Rng nrng(t);
      const CVector noisy = measure(ch, p, var, nrng, 0, 0);
      sig += clean.squaredNorm();
      noi += (noisy - clean).squaredNorm();
      n += clean.size();
    }
    CHECK(std::abs(10 * std::log10(sig / noi) - snr) < 0.2);
  }

  SUBCASE("measure_all layout and determinism") {
    Rng rng(10);
    const ChannelRealization ch = make_channel(c, rng);
    const PilotSchedule p = generate_pilots(c, rng);
    Rng a(1), b(1);
    const MeasurementSet s = measure_all(ch, p, 0.2, a);
    const MeasurementSet t = measure_all(ch, p, 0.2, b);
    CHECK(s.noise_var == 0.2);
    REQUIRE(s.y.size() == static_cast<std::size_t>(c.n_users));
    REQUIRE(s.y[1].size() == static_cast<std::size_t>(c.n_sc));
    CHECK(s.y[1][3].size() == c.pilot_length());
    CHECK(s.y[1][3] == t.y[1][3]);
  }
}

TEST_CASE("real form") {
  std::mt19937_64 g(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = 8, cols = 5 + trial % 4;
    const CMatrix psi = oracle::random_cmatrix(rows, cols, g);
    const CVector x = oracle::random_cvector(cols, g);
    const CVector y = psi * x;
    const RealForm rf = realify(y, psi);
    REQUIRE(rf.psi_r.rows() == 2 * rows);
    REQUIRE(rf.psi_r.cols() == 2 * cols);
    CHECK(std::abs(rf.y_r.norm() - y.norm()) < 1e-12);
    CHECK((rf.psi_r.topLeftCorner(rows, cols) - psi.real()).norm() == 0.0);
    CHECK((rf.psi_r.topRightCorner(rows, cols) + psi.imag()).norm() == 0.0);
    CHECK((rf.psi_r.bottomLeftCorner(rows, cols) - psi.imag()).norm() == 0.0);
    CHECK((rf.psi_r.bottomRightCorner(rows, cols) - psi.real()).norm() == 0.0);
    RVector xr(2 * cols);
    xr << x.real(), x.imag();
    CHECK((rf.psi_r * xr - rf.y_r).norm() < 1e-12);
    CHECK((complexify(xr) - x).norm() == 0.0);
  }
  CHECK_THROWS_AS(complexify(RVector::Zero(3)), InvalidArgument);
}
