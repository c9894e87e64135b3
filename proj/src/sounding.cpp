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

#include "risce/sounding.hpp"

#include <cmath>
#include <limits>

#include "risce/errors.hpp"

namespace risce {

namespace {

cd random_phase(Rng &rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  return std::polar(1.0, phase(rng));
}

} // namespace

CMatrix PilotSchedule::processed_block(int t) const {
  return processed.middleCols(static_cast<Index>(t) * n_slots, n_slots);
}

CMatrix draw_analog_beamformer(const SystemConfig &config, Rng &rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.n_tx));
  CMatrix w(config.n_tx, config.n_rf);
  for (Index j = 0; j < w.cols(); ++j)
    for (Index i = 0; i < w.rows(); ++i)
      w(i, j) = scale * random_phase(rng);
  return w;
}

PilotSchedule generate_pilots(const SystemConfig &config, Rng &rng) {
  const CMatrix analog = draw_analog_beamformer(config, rng);
  return generate_pilots(config, analog, rng);
}

PilotSchedule generate_pilots(const SystemConfig &config,
                              const CMatrix &analog_bf, Rng &rng) {
  if (analog_bf.rows() != config.n_tx || analog_bf.cols() != config.n_rf)
    throw InvalidArgument("analog beamformer shape does not match config");
  PilotSchedule s;
  s.n_subframes = config.n_subframes;
  s.n_slots = config.n_slots;
  s.analog_bf = analog_bf;
  const Index tp = config.pilot_length();

  s.baseband_bf.resize(config.n_rf, tp);
  s.processed.resize(config.n_tx, tp);
  for (Index i = 0; i < tp; ++i) {
    for (Index r = 0; r < config.n_rf; ++r)
      s.baseband_bf(r, i) = complex_normal(rng);
    CVector w = analog_bf * s.baseband_bf.col(i);
    const double norm = w.norm();
    if (norm > 0) {
      s.baseband_bf.col(i) /= norm;
      w /= norm;
    }
    s.processed.col(i) = w; // s_t = 1
  }

  s.ris_phases.resize(config.n_subframes, config.n_ris);
  for (Index t = 0; t < config.n_subframes; ++t)
    for (Index n = 0; n < config.n_ris; ++n)
      s.ris_phases(t, n) = random_phase(rng);
  return s;
}

CMatrix stack_pilot_matrix(const PilotSchedule &pilots) {
  const Index nt = pilots.processed.rows();
  const Index nr = pilots.ris_phases.cols();
  const Index p = pilots.n_slots;
  CMatrix r_bar(pilots.processed.cols(), nt * nr);
  for (Index t = 0; t < pilots.n_subframes; ++t)
    for (Index pp = 0; pp < p; ++pp) {
      const Index row = t * p + pp;
      for (Index n = 0; n < nt; ++n)
        r_bar.row(row).segment(n * nr, nr) =
            pilots.processed(n, row) * pilots.ris_phases.row(t);
    }
  return r_bar;
}

ObservationSet assemble_observation(const PilotSchedule &pilots,
                                    const TotalDictionary &total_dict) {
  ObservationSet o;
  o.r_bar = stack_pilot_matrix(pilots);
  if (o.r_bar.cols() != total_dict.matrix.rows())
    throw InvalidArgument("pilot and dictionary dimensions disagree");
  o.psi = o.r_bar * total_dict.matrix;
  return o;
}

std::shared_ptr<KronOperator>
observation_operator(const PilotSchedule &pilots, const CMatrix &bs_dict,
                     const CMatrix &ris_dict, bool parallel) {
  if (bs_dict.rows() != pilots.processed.rows() ||
      ris_dict.rows() != pilots.ris_phases.cols())
    throw InvalidArgument("pilot and dictionary dimensions disagree");
  CMatrix b = pilots.processed.transpose() * bs_dict.conjugate();
  CMatrix c = pilots.ris_phases * ris_dict;
  return std::make_shared<KronOperator>(std::move(b), std::move(c),
                                        pilots.n_slots, parallel);
}

double noise_variance(const SystemConfig &config, double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0)
    return 0.0;
  const double signal = static_cast<double>(config.n_paths_bs) *
                        config.n_paths_ue /
                        (static_cast<double>(config.n_ris) * config.n_tx);
  return signal * std::pow(10.0, -snr_db / 10.0);
}

CVector sound_channel(const CMatrix &cascaded, const PilotSchedule &pilots) {
  if (cascaded.rows() != pilots.ris_phases.cols() ||
      cascaded.cols() != pilots.processed.rows())
    throw InvalidArgument("channel and pilot dimensions disagree");
  const Index p = pilots.n_slots;
  const CMatrix v = pilots.ris_phases * cascaded; // T x N_T
  CVector y(pilots.processed.cols());
  for (Index t = 0; t < pilots.n_subframes; ++t)
    y.segment(t * p, p) =
        (v.row(t) * pilots.processed.middleCols(t * p, p)).transpose();
  return y;
}

CVector measure(const ChannelRealization &channel,
                const PilotSchedule &pilots, double noise_var, Rng &rng,
                int m, int k) {
  CVector y = sound_channel(
      channel.cascaded[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)],
      pilots);
  if (noise_var > 0) {
    const double scale = std::sqrt(noise_var);
    for (Index i = 0; i < y.size(); ++i)
      y(i) += scale * complex_normal(rng);
  }
  return y;
}

MeasurementSet measure_all(const ChannelRealization &channel,
                           const PilotSchedule &pilots, double noise_var,
                           Rng &rng) {
  MeasurementSet out;
  out.noise_var = noise_var;
  out.y.resize(static_cast<std::size_t>(channel.n_users()));
  for (int k = 0; k < channel.n_users(); ++k)
    for (int m = 0; m < channel.n_sc(); ++m)
      out.y[static_cast<std::size_t>(k)].push_back(
          measure(channel, pilots, noise_var, rng, m, k));
  return out;
}

RealForm realify(const CVector &y, const CMatrix &psi) {
  if (y.size() != psi.rows())
    throw InvalidArgument("measurement length does not match observation rows");
  return {stack_real(y), real_form_matrix(psi)};
}

CVector complexify(const RVector &x_r) { return unstack_real(x_r); }

} // namespace risce
