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

#include <span>
#include <vector>

#include "risce/model.hpp"
#include "risce/recovery.hpp"
#include "risce/sounding.hpp"

namespace risce {

/// Coupled RIS angles grouped per BS path: [l][j].
using CoupledAngles = std::vector<std::vector<double>>;

/// Ψ̃ = R̄ (conj(A_T(φ)) ⊗ A_R(γ)) at one subcarrier.
///
/// Column l'*(L*J) + (l*J + j) pairs BS path l' with coupled angle γ_{l,j}.
struct ReducedObservation {
  CMatrix psi_tilde; // PT x L^2 J
  CMatrix bs_arm;    // N_T x L
  CMatrix ris_arm;   // N_R x L J
  double condition = 1.0;
  bool rank_deficient = false;
};

/// Throws UnderdeterminedConfig when PT < L^2 J.
ReducedObservation build_reduced_observation(const PilotSchedule &pilots,
                                             std::span<const double> bs_dods,
                                             const CoupledAngles &coupled,
                                             double eta);

struct LsSolution {
  CVector x;
  double residual_norm = 0.0;
  bool pseudo_inverse = false;
};

/// Normal equations, or the pseudo-inverse when condition > 1e10.
LsSolution ls_solve(const ReducedObservation &obs, const CVector &y);

/// vec(A_R X A_T^H) with X(g, l') = x[l'*(L*J) + g].
CVector reduced_channel(const ReducedObservation &obs, const CVector &x);

struct ReconstructedCsi {
  std::vector<CVector> h_cas;   // [m], vec(Ĥ_cas[m])
  std::vector<CVector> x_tilde; // [m], empty at the Phase-I subcarriers
  int ls_solves = 0;
};

/// Phase II: LS at every subcarrier except the two Phase-I ones, which keep
/// their Phase-I reconstructions.
ReconstructedCsi reconstruct_all_sc(const Phase1Result &phase1,
                                    std::span<const double> bs_dods,
                                    const CoupledAngles &coupled,
                                    const PilotSchedule &pilots,
                                    std::span<const double> etas,
                                    const std::vector<CVector> &y_user);

/// LS at all subcarriers with the true BS DoDs and coupled angles of user k.
ReconstructedCsi oracle_ls(const ChannelRealization &channel, int k,
                           const PilotSchedule &pilots,
                           const std::vector<CVector> &y_user);

/// True coupled angles of user k grouped per BS path.
CoupledAngles true_coupled_groups(const ChannelRealization &channel, int k);

} // namespace risce
