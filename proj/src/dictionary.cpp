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

#include "risce/dictionary.hpp"

#include <cmath>

#include "risce/errors.hpp"
#include "risce/model.hpp"

namespace risce {

GridSpec make_grid(int grid_size) {
  if (grid_size < 1)
    throw InvalidArgument("grid size must be >= 1");
  GridSpec g;
  g.q = grid_size;
  for (int q = 0; q < grid_size; ++q)
    g.samples.push_back(grid_sample(q, grid_size));
  return g;
}

double coupled_grid_sample(int q, int q_ris) {
  return 2.0 * (q + 1 - q_ris) / q_ris;
}

CMatrix build_bs_dictionary(int q_tx, double eta, int n_tx) {
  const GridSpec g = make_grid(q_tx);
  return array_response_matrix(g.samples, eta, n_tx);
}

CMatrix build_full_coupled_dictionary(int q_ris, double eta, int n_ris) {
  if (q_ris < 1)
    throw InvalidArgument("q_ris must be >= 1");
  const Index q = q_ris;
  CMatrix out(n_ris, q * q);
  const double delta = 2.0 / q_ris;
  for (Index q2 = 0; q2 < q; ++q2)
    for (Index q1 = 0; q1 < q; ++q1)
      out.col(q2 * q + q1) =
          arv(delta * static_cast<double>(q1 - q2), eta, n_ris);
  return out;
}

CbsDictionary build_cbs_dictionary(int q_ris, double eta, int n_ris) {
  if (q_ris < 1)
    throw InvalidArgument("q_ris must be >= 1");
  CbsDictionary d;
  d.eta = eta;
  d.q_ris = q_ris;
  d.q_b = 2 * q_ris - 1;
  for (int q = 0; q < d.q_b; ++q)
    d.coupled_grid.push_back(coupled_grid_sample(q, q_ris));
  d.columns = array_response_matrix(d.coupled_grid, eta, n_ris);
  return d;
}

MergeMap build_merge_map(int q_ris) {
  if (q_ris < 1)
    throw InvalidArgument("q_ris must be >= 1");
  MergeMap map;
  map.sets.resize(static_cast<std::size_t>(2 * q_ris - 1));
  for (int q2 = 0; q2 < q_ris; ++q2)
    for (int q1 = 0; q1 < q_ris; ++q1) {
      // angle 2(q1-q2)/Q_R is CBS column q1 - q2 + Q_R - 1
      const int i = q1 - q2 + q_ris - 1;
      map.sets[static_cast<std::size_t>(i)].push_back(q2 * q_ris + q1);
    }
  return map;
}

CMatrix merge_coefficients(const MergeMap &map, const CMatrix &x_full) {
  CMatrix out = CMatrix::Zero(static_cast<Index>(map.sets.size()), x_full.cols());
  for (std::size_t i = 0; i < map.sets.size(); ++i)
    for (int j : map.sets[i]) {
      if (j >= x_full.rows())
        throw InvalidArgument("merge map index exceeds coefficient rows");
      out.row(static_cast<Index>(i)) += x_full.row(j);
    }
  return out;
}

TotalDictionary build_total_dictionary(const CMatrix &bs_dict, double bs_eta,
                                       const CbsDictionary &cbs) {
  if (std::abs(bs_eta - cbs.eta) > 1e-15 * std::max(1.0, std::abs(bs_eta)))
    throw InvalidArgument("BS and RIS dictionaries built at different eta");
  TotalDictionary t;
  t.eta = bs_eta;
  t.q_tx = static_cast<int>(bs_dict.cols());
  t.q_b = cbs.q_b;
  const Index nt = bs_dict.rows();
  const Index nr = cbs.columns.rows();
  t.matrix.resize(nt * nr, bs_dict.cols() * cbs.q_b);
  for (Index qt = 0; qt < bs_dict.cols(); ++qt)
    for (Index qb = 0; qb < cbs.q_b; ++qb) {
      auto col = t.matrix.col(qt * cbs.q_b + qb);
      for (Index n = 0; n < nt; ++n)
        col.segment(n * nr, nr) =
            std::conj(bs_dict(n, qt)) * cbs.columns.col(qb);
    }
  return t;
}

CVector apply_total_dictionary(const CMatrix &bs_dict, const CMatrix &ris_dict,
                               const CVector &x) {
  if (x.size() != bs_dict.cols() * ris_dict.cols())
    throw InvalidArgument("coefficient length does not match dictionary");
  const Eigen::Map<const CMatrix> xm(x.data(), ris_dict.cols(), bs_dict.cols());
  const CMatrix h = ris_dict * xm * bs_dict.adjoint();
  return Eigen::Map<const CVector>(h.data(), h.size());
}

std::shared_ptr<const CbsDictionary>
DictionaryCache::cbs(int q_ris, double eta, int n_ris) {
  const auto key = std::make_tuple(eta, q_ris, n_ris);
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cbs_.find(key);
  if (it != cbs_.end())
    return it->second;
  auto d = std::make_shared<const CbsDictionary>(
      build_cbs_dictionary(q_ris, eta, n_ris));
  cbs_.emplace(key, d);
  return d;
}

std::shared_ptr<const CMatrix> DictionaryCache::bs(int q_tx, double eta,
                                                   int n_tx) {
  const auto key = std::make_tuple(eta, q_tx, n_tx);
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = bs_.find(key);
  if (it != bs_.end())
    return it->second;
  auto d = std::make_shared<const CMatrix>(build_bs_dictionary(q_tx, eta, n_tx));
  bs_.emplace(key, d);
  return d;
}

} // namespace risce
