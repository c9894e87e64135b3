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

// Ground-truth sparse coefficients of an on-grid channel, built from the path
// parameters rather than from the library's dictionaries.

#pragma once

#include <cmath>

#include "risce/model.hpp"
#include "support/oracles.hpp"

namespace truth {

inline int grid_index(double s, int size) {
  return static_cast<int>(std::lround((s * size + size + 1) / 2.0)) - 1;
}

// Coefficients of user k at subcarrier m on conj(C_T) ⊗ CBS, column
// qt*Q_B + qb.
inline oracle::CVector sparse(const risce::SystemConfig &c,
                              const risce::ChannelRealization &ch, int k, int m) {
  const int qb = 2 * c.q_ris - 1;
  oracle::CVector x = oracle::CVector::Zero(c.q_tx * qb);
  const auto &bs = ch.paths_bs_ris;
  const auto &ue = ch.paths_ris_ue[k];
  const double f = ch.freqs[m];
  for (std::size_t l = 0; l < bs.count(); ++l)
    for (std::size_t j = 0; j < ue.count(); ++j) {
      const int qt = grid_index(bs.dod_bs[l], c.q_tx);
      const int b = grid_index(bs.doa_ris[l], c.q_ris) -
                    grid_index(ue.dod_ris[j], c.q_ris) + c.q_ris - 1;
      x(qt * qb + b) += bs.gains[l] * ue.gains[j] *
                        std::polar(1.0, -2 * oracle::kPi *
                                            (bs.delays[l] + ue.delays[j]) * f) /
                        std::sqrt(static_cast<double>(c.n_ris));
    }
  return x;
}

} // namespace truth
