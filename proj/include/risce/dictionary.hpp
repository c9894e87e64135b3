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

#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "risce/types.hpp"

namespace risce {

/// Q equispaced direction sines, 2q/Q - (Q+1)/Q for q = 1..Q.
struct GridSpec {
  int q = 0;
  std::vector<double> samples;
};

GridSpec make_grid(int grid_size);

/// Coupled-angle sample of CBS column q (0-based), 2(q+1-Q_R)/Q_R.
double coupled_grid_sample(int q, int q_ris);

/// The 2Q_R-1 unique columns of the coupled RIS dictionary.
struct CbsDictionary {
  double eta = 1.0;
  int q_ris = 0;
  int q_b = 0;
  CMatrix columns;                  // N_R x Q_B
  std::vector<double> coupled_grid; // length Q_B
};

/// For each CBS column, the 0-based full-dictionary columns that equal it.
struct MergeMap {
  std::vector<std::vector<int>> sets;
};

/// Π = conj(C_T) ⊗ Ξ; column qt*Q_B + qb.
struct TotalDictionary {
  double eta = 1.0;
  int q_tx = 0;
  int q_b = 0;
  CMatrix matrix;
};

/// N_T x Q_T overcomplete BS dictionary on the Q_T grid.
CMatrix build_bs_dictionary(int q_tx, double eta, int n_tx);

/// N_R x Q_R^2 Khatri-Rao coupled dictionary conj(C_R) • C_R.
///
/// Memory grows as N_R*Q_R^2; intended as a reference for small grids.
/// Column j = q2*Q_R + q1 (0-based) carries coupled angle 2(q1-q2)/Q_R.
CMatrix build_full_coupled_dictionary(int q_ris, double eta, int n_ris);

CbsDictionary build_cbs_dictionary(int q_ris, double eta, int n_ris);

MergeMap build_merge_map(int q_ris);

/// Sums rows of a Q_R^2-row coefficient matrix into Q_B rows.
CMatrix merge_coefficients(const MergeMap &map, const CMatrix &x_full);

/// Throws InvalidArgument when the two dictionaries disagree on eta.
TotalDictionary build_total_dictionary(const CMatrix &bs_dict, double bs_eta,
                                       const CbsDictionary &cbs);

/// Π·x without forming Π: vec(Ξ X C_T^H) with X = reshape(x, Q_B, Q_T).
CVector apply_total_dictionary(const CMatrix &bs_dict, const CMatrix &ris_dict,
                               const CVector &x);

/// Thread-safe memo of CBS and BS dictionaries keyed by (eta, sizes).
class DictionaryCache {
public:
  std::shared_ptr<const CbsDictionary> cbs(int q_ris, double eta, int n_ris);
  std::shared_ptr<const CMatrix> bs(int q_tx, double eta, int n_tx);

private:
  std::mutex mutex_;
  std::map<std::tuple<double, int, int>, std::shared_ptr<const CbsDictionary>>
      cbs_;
  std::map<std::tuple<double, int, int>, std::shared_ptr<const CMatrix>> bs_;
};

} // namespace risce
