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

#include <cstdint>
#include <span>
#include <vector>

#include "risce/types.hpp"

namespace risce {

/// Scenario scalars for one RIS-assisted wideband link.
///
/// Directions are carried as sine values everywhere. Frequencies are in Hz,
/// delays in seconds.
struct SystemConfig {
  int n_tx = 16;        // BS antennas
  int n_ris = 64;       // RIS elements
  int n_rf = 8;         // RF chains
  int n_users = 8;      // single-antenna UEs
  int n_sc = 128;       // subcarriers, even
  double f_c = 100e9;   // carrier
  double bandwidth = 15e9;
  int n_subframes = 50; // T
  int n_slots = 30;     // P
  int q_tx = 32;        // BS grid size
  int q_ris = 128;      // RIS grid size
  int n_paths_bs = 3;   // L
  int n_paths_ue = 3;   // J_k, same for every user
  double snr_db = 20.0; // +inf disables noise
  double tau_max = 20e-9;
  bool on_grid = true;
  std::uint64_t seed = 1;

  /// Throws InvalidConfig naming the first violated constraint.
  void validate() const;

  int q_b() const { return 2 * q_ris - 1; }
  int pilot_length() const { return n_subframes * n_slots; }
};

/// f_m for m = 1..M (returned 0-based).
std::vector<double> subcarrier_frequencies(double f_c, double bandwidth, int n_sc);

/// η_m = f_m / f_c.
double relative_frequency(double f_m, double f_c);

/// Relative frequencies of every subcarrier.
std::vector<double> relative_frequencies(const SystemConfig &config);

/// Unit-norm ULA response, entry i = exp(-jπ·eta·u·i)/sqrt(n).
///
/// The sine argument may range over [-2, 2] so the same routine serves the
/// coupled (difference) angles at the RIS.
CVector arv(double direction_sine, double eta, Index n_elems);

/// Columns arv(sines[i], eta, n_elems).
CMatrix array_response_matrix(std::span<const double> sines, double eta,
                              Index n_elems);

/// Direction sample q (0-based) of a Q-point grid, 2(q+1)/Q - (Q+1)/Q.
double grid_sample(int q, int grid_size);

struct PathSetBsRis {
  std::vector<cd> gains;
  std::vector<double> delays;
  std::vector<double> doa_ris; // ψ_l
  std::vector<double> dod_bs;  // φ_l
  std::size_t count() const { return gains.size(); }
};

struct PathSetRisUe {
  std::vector<cd> gains;
  std::vector<double> delays;
  std::vector<double> dod_ris; // ϑ_{k,j}
  std::size_t count() const { return gains.size(); }
};

struct PathDraw {
  PathSetBsRis bs_ris;
  std::vector<PathSetRisUe> ris_ue; // one per user
};

/// Draws path gains, delays and directions. On-grid directions are sampled
/// without replacement inside each path set; continuous directions are
/// uniform on the physical angle in [-π/2, π/2].
PathDraw draw_paths(const SystemConfig &config, Rng &rng);

/// Per-subcarrier channel matrices of one realization.
struct ChannelRealization {
  int n_tx = 0;
  int n_ris = 0;
  std::vector<double> freqs;
  std::vector<double> etas;
  std::vector<CMatrix> bs_ris;                 // [m] G[m], N_R x N_T
  std::vector<std::vector<CVector>> ris_ue;    // [k][m] h_k[m] entries
  std::vector<std::vector<CMatrix>> cascaded;  // [k][m] Diag(h_k[m]) G[m]
  PathSetBsRis paths_bs_ris;
  std::vector<PathSetRisUe> paths_ris_ue;
  std::vector<CVector> angle_excluded_bs;              // [m] diag of Σ_m
  std::vector<std::vector<CVector>> angle_excluded_ue; // [k][m] β_{k,m}

  int n_sc() const { return static_cast<int>(freqs.size()); }
  int n_users() const { return static_cast<int>(cascaded.size()); }

  /// Column-major vec(H_cas) of user k at subcarrier m.
  CVector cascaded_vec(int k, int m) const;
};

/// Builds G[m], h_k[m] and the cascaded channels from the path summations.
ChannelRealization synthesize_channels(const SystemConfig &config,
                                       const PathDraw &paths,
                                       std::span<const double> freqs);

/// Cascaded channel through the factored Khatri-Rao form
/// (A_R*(ϑ) • A_R(ψ)) (β ⊗ Σ) A_T^H(φ).
CMatrix cascaded_factored(const ChannelRealization &channel, int k, int m);

/// True coupled angles ψ_l - ϑ_{k,j}, ordered path-l outer, j inner.
std::vector<double> true_coupled_angles(const ChannelRealization &channel,
                                        int k);

} // namespace risce
