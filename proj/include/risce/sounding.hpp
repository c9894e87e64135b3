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

#include <memory>
#include <vector>

#include "risce/dictionary.hpp"
#include "risce/model.hpp"
#include "risce/operators.hpp"

namespace risce {

/// Pilot beamformers and RIS phases of one estimation period.
///
/// Baseband beamformers are frequency-flat and pilot symbols are 1, so the
/// processed pilots R_t[m] do not depend on m and one matrix serves every
/// subcarrier.
struct PilotSchedule {
  int n_subframes = 0;
  int n_slots = 0;
  CMatrix analog_bf;   // N_T x N_RF
  CMatrix baseband_bf; // N_RF x (T*P), column t*P + p
  CMatrix ris_phases;  // T x N_R, row t = θ_t
  CMatrix processed;   // N_T x (T*P), column t*P + p = w_{t,p} s_t

  /// R_t as an N_T x P block.
  CMatrix processed_block(int t) const;
};

/// W_RF with entries exp(jφ)/sqrt(N_T).
CMatrix draw_analog_beamformer(const SystemConfig &config, Rng &rng);

/// Draws W_RF, then baseband beamformers and RIS phases.
PilotSchedule generate_pilots(const SystemConfig &config, Rng &rng);

/// Same, with a fixed analog beamformer reused across trials.
PilotSchedule generate_pilots(const SystemConfig &config,
                              const CMatrix &analog_bf, Rng &rng);

/// Explicit observation of one subcarrier.
struct ObservationSet {
  CMatrix r_bar; // PT x N_T*N_R, row block t = R_t^T ⊗ θ_t
  CMatrix psi;   // PT x Q_B*Q_T
};

/// R̄ stacked over subframes. Dense reference of the sounding model.
CMatrix stack_pilot_matrix(const PilotSchedule &pilots);

/// Ψ = R̄·Π with both factors formed explicitly.
ObservationSet assemble_observation(const PilotSchedule &pilots,
                                    const TotalDictionary &total_dict);

/// Ψ = R̄·(conj(A_T) ⊗ A_R) as a structured operator, never formed.
std::shared_ptr<KronOperator>
observation_operator(const PilotSchedule &pilots, const CMatrix &bs_dict,
                     const CMatrix &ris_dict, bool parallel = true);

/// Complex noise variance per measurement for a nominal receive SNR.
///
/// Uses the expected noiseless power L*J/(N_R*N_T) of one measurement under
/// unit-variance path gains and unit-norm hybrid beamformers; +inf gives 0.
double noise_variance(const SystemConfig &config, double snr_db);

/// Noiseless y_k[m] from the physical channel: y_{t,p} = θ_t H r_{t,p}.
CVector sound_channel(const CMatrix &cascaded, const PilotSchedule &pilots);

/// Noiseless measurement plus CN(0, noise_var) noise.
CVector measure(const ChannelRealization &channel,
                const PilotSchedule &pilots, double noise_var, Rng &rng,
                int m, int k);

/// y_k[m] for every user and subcarrier, [k][m].
struct MeasurementSet {
  double noise_var = 0.0;
  std::vector<std::vector<CVector>> y;
};

/// Noise is drawn user-major, then subcarrier, then measurement index.
MeasurementSet measure_all(const ChannelRealization &channel,
                           const PilotSchedule &pilots, double noise_var,
                           Rng &rng);

struct RealForm {
  RVector y_r;
  RMatrix psi_r;
};

RealForm realify(const CVector &y, const CMatrix &psi);

/// Inverse of the [Re; Im] stacking. Odd lengths are rejected.
CVector complexify(const RVector &x_r);

} // namespace risce
