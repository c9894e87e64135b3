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

#include <array>
#include <vector>

#include "risce/types.hpp"

namespace risce {

/// Energy-maximum block support of the BS dictionary.
struct BsAngleEstimate {
  std::vector<int> support; // 0-based BS grid indices, ascending
  std::vector<double> dods; // grid sines of `support`
  RVector energy_spectrum;  // merged block energy, length Q_T
};

/// Blocks of Q_B entries are aligned with the Q_T BS grid directions.
/// Each subcarrier's magnitude vector is normalized to unit l2 norm before
/// the per-block l2 norms are summed over both subcarriers.
BsAngleEstimate enm_estimate(const CVector &x_first, const CVector &x_second,
                             int n_paths, int q_tx, int q_b);

/// U = Ĥ (A^H)^+ for an N_R x N_T channel and N_T x L BS array matrix.
///
/// Throws DegenerateAngles when cond(A) exceeds 1e12.
CMatrix project_rest_csi(const CMatrix &h_cas, const CMatrix &bs_arm);

/// ceil(N_R/2) - 1, e.g. 31 for N_R = 64 (N_a = 34).
int default_n_sub(int n_ris);

/// Forward spatial smoothing over N_R - n_sub + 1 sliding windows.
///
/// With `enforce` the window count must exceed n_sub; n_sub > J and window
/// count > J are always required. Violations throw InvalidSubarrayConfig.
CMatrix spatial_smooth(const CVector &u, int n_sub, int n_paths_ue,
                       bool enforce = true);

struct MusicSpectrum {
  RVector values;              // length Q_B
  RVector padded;              // values with the minimum prepended/appended
  RVector midpoints;           // spectrum halfway between bins q and q + 1
  std::vector<double> grid;    // coupled-angle samples, length Q_B
  double eta = 1.0;
};

/// Pseudo-spectrum 1/||Ω_N^H ξ_q||^2 over unit-norm sub-CBS atoms.
MusicSpectrum music_spectrum(const CMatrix &cov, int n_paths_ue, int q_ris,
                             double eta);

/// Up to `count` largest peaks, 0-based into `values`, ordered by
/// decreasing height then index. A bin is a peak when it is a strict local
/// maximum of the padded spectrum, or when it exceeds the spectrum at both
/// half-bin offsets (two sources on adjacent bins). Without midpoints only
/// the first rule applies.
std::vector<int> find_peaks(const MusicSpectrum &spectrum, int count);

struct AmbiguityBound {
  int k_cp_max = 1;
  double eta = 1.0;
  int q_ris = 0;
};

/// floor(eta(2 - 1/Q_R)) + 1.
AmbiguityBound k_cp_max(double eta, int q_ris);

/// Right side of the subcarrier-selection inequality, +inf when B = 0.
double sc_selection_bound(int n_sc, double f_c, double bandwidth, int q_b);

/// m is 1-based.
bool sc_selection_valid(int m, int n_sc, double f_c, double bandwidth,
                        int q_b);

int peak_distance(int q, int q_prime);

struct RisAngleEstimate {
  std::vector<std::vector<int>> per_path;             // L sets of J indices
  std::vector<std::vector<double>> coupled_angles;    // same layout
  std::vector<int> support;                           // union, ascending
  std::array<std::vector<MusicSpectrum>, 2> spectra;  // [sc][path]
};

/// Coupled RIS angles from the rest CSI of the two Phase-I subcarriers.
///
/// Peaks are paired one-to-one across the subcarriers by increasing
/// distance; ties prefer the larger summed normalized height, then the
/// lower indices. Paired indices are averaged with halves rounded up.
/// Throws InsufficientPeaks naming the path when fewer than J peaks or
/// pairs exist.
RisAngleEstimate ds_music(const std::array<CMatrix, 2> &rest_csi,
                          int n_paths_ue, int q_ris,
                          const std::array<double, 2> &etas, int n_sub);

} // namespace risce
