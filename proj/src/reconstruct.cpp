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

#include "risce/reconstruct.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "risce/errors.hpp"

namespace risce {

namespace {
constexpr double kConditionLimit = 1e10;
} // namespace

ReducedObservation build_reduced_observation(const PilotSchedule &pilots,
                                             std::span<const double> bs_dods,
                                             const CoupledAngles &coupled,
                                             double eta) {
  const Index n_tx = pilots.processed.rows();
  const Index n_ris = pilots.ris_phases.cols();
  std::vector<double> flat;
  for (const auto &group : coupled)
    flat.insert(flat.end(), group.begin(), group.end());
  const Index cols = static_cast<Index>(bs_dods.size() * flat.size());
  const Index rows = pilots.processed.cols();
  if (rows < cols)
    throw UnderdeterminedConfig(
        "reduced observation: " + std::to_string(rows) +
        " measurements for " + std::to_string(cols) + " coefficients");

  ReducedObservation obs;
  obs.bs_arm = array_response_matrix(bs_dods, eta, n_tx);
  obs.ris_arm = array_response_matrix(flat, eta, n_ris);
  const KronOperator op(pilots.processed.transpose() * obs.bs_arm.conjugate(),
                        pilots.ris_phases * obs.ris_arm, pilots.n_slots,
                        false);
  obs.psi_tilde = kron_dense(op);

  // From singular values: the Gram eigenvalues bottom out at roundoff and
  // cap the estimate near 1e8.
  const Eigen::JacobiSVD<CMatrix> svd(obs.psi_tilde);
  const auto &sv = svd.singularValues();
  const double smax = sv.size() ? sv.maxCoeff() : 0.0;
  const double smin = sv.size() ? sv.minCoeff() : 0.0;
  obs.condition = smin > 0 ? smax / smin
                           : std::numeric_limits<double>::infinity();
  obs.rank_deficient = !(obs.condition <= kConditionLimit);
  return obs;
}

LsSolution ls_solve(const ReducedObservation &obs, const CVector &y) {
  if (y.size() != obs.psi_tilde.rows())
    throw InvalidArgument("LS: measurement length does not match rows");
  LsSolution sol;
  if (!obs.rank_deficient) {
    const CMatrix gram = obs.psi_tilde.adjoint() * obs.psi_tilde;
    sol.x = gram.llt().solve(obs.psi_tilde.adjoint() * y);
  } else {
    sol.pseudo_inverse = true;
    // Drop directions below the same relative level that triggers the
    // fallback; exact duplicate columns otherwise leave ~1e-16 pivots.
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod;
    cod.setThreshold(1.0 / kConditionLimit);
    cod.compute(obs.psi_tilde);
    sol.x = cod.solve(y);
  }
  sol.residual_norm = (y - obs.psi_tilde * sol.x).norm();
  return sol;
}

CVector reduced_channel(const ReducedObservation &obs, const CVector &x) {
  const Index g = obs.ris_arm.cols();
  const Index l = obs.bs_arm.cols();
  if (x.size() != g * l)
    throw InvalidArgument("reduced channel: coefficient length mismatch");
  const Eigen::Map<const CMatrix> xm(x.data(), g, l);
  const CMatrix h = obs.ris_arm * xm * obs.bs_arm.adjoint();
  return Eigen::Map<const CVector>(h.data(), h.size());
}

namespace {

// LS over the listed subcarriers; exceptions are collected and rethrown
// after the parallel loop.
void solve_subcarriers(ReconstructedCsi &out, const std::vector<int> &scs,
                       std::span<const double> bs_dods,
                       const CoupledAngles &coupled,
                       const PilotSchedule &pilots,
                       std::span<const double> etas,
                       const std::vector<CVector> &y_user) {
  std::exception_ptr error;
  const int n = static_cast<int>(scs.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const auto m = static_cast<std::size_t>(scs[static_cast<std::size_t>(i)]);
      const ReducedObservation obs =
          build_reduced_observation(pilots, bs_dods, coupled, etas[m]);
      const LsSolution ls = ls_solve(obs, y_user[m]);
      out.h_cas[m] = reduced_channel(obs, ls.x);
      out.x_tilde[m] = ls.x;
    } catch (...) {
#pragma omp critical(risce_reconstruct_error)
      if (!error)
        error = std::current_exception();
    }
  }
  if (error)
    std::rethrow_exception(error);
  out.ls_solves += n;
}

} // namespace

ReconstructedCsi reconstruct_all_sc(const Phase1Result &phase1,
                                    std::span<const double> bs_dods,
                                    const CoupledAngles &coupled,
                                    const PilotSchedule &pilots,
                                    std::span<const double> etas,
                                    const std::vector<CVector> &y_user) {
  const std::size_t n_sc = etas.size();
  if (y_user.size() != n_sc)
    throw InvalidArgument("phase II: one measurement vector per subcarrier");
  ReconstructedCsi out;
  out.h_cas.resize(n_sc);
  out.x_tilde.resize(n_sc);
  std::vector<int> scs;
  for (std::size_t m = 0; m < n_sc; ++m) {
    const int mi = static_cast<int>(m);
    if (mi == phase1.sc[0])
      out.h_cas[m] = phase1.h_cas[0];
    else if (mi == phase1.sc[1])
      out.h_cas[m] = phase1.h_cas[1];
    else
      scs.push_back(mi);
  }
  solve_subcarriers(out, scs, bs_dods, coupled, pilots, etas, y_user);
  return out;
}

CoupledAngles true_coupled_groups(const ChannelRealization &channel, int k) {
  const auto &bs = channel.paths_bs_ris;
  const auto &ue = channel.paths_ris_ue[static_cast<std::size_t>(k)];
  CoupledAngles out;
  for (double psi : bs.doa_ris) {
    std::vector<double> group;
    for (double theta : ue.dod_ris)
      group.push_back(psi - theta);
    out.push_back(std::move(group));
  }
  return out;
}

ReconstructedCsi oracle_ls(const ChannelRealization &channel, int k,
                           const PilotSchedule &pilots,
                           const std::vector<CVector> &y_user) {
  const std::size_t n_sc = channel.etas.size();
  if (y_user.size() != n_sc)
    throw InvalidArgument("oracle LS: one measurement vector per subcarrier");
  ReconstructedCsi out;
  out.h_cas.resize(n_sc);
  out.x_tilde.resize(n_sc);
  std::vector<int> scs;
  for (std::size_t m = 0; m < n_sc; ++m)
    scs.push_back(static_cast<int>(m));
  solve_subcarriers(out, scs, channel.paths_bs_ris.dod_bs,
                    true_coupled_groups(channel, k), pilots, channel.etas,
                    y_user);
  return out;
}

} // namespace risce
