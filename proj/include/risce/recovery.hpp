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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "risce/model.hpp"
#include "risce/operators.hpp"
#include "risce/sounding.hpp"

namespace risce {

/// Real sparse linear model y = Ψx + n.
struct SparseProblem {
  std::shared_ptr<const RealOperator> psi;
  RVector y;
  double noise_var = 0.0; // per real entry
  int sparsity_hint = 1;
  /// Entries i and i + n/2 are the Re/Im halves of one complex unknown and
  /// share their support.
  bool paired = false;
};

/// Real form of a complex problem; noise_var is per complex sample.
SparseProblem make_real_problem(std::shared_ptr<const ComplexOperator> psi,
                                const CVector &y, double noise_var,
                                int sparsity_hint);

struct SparseSolution {
  CVector x_hat;          // recombined complex estimate
  RVector x_real;         // solver-native real estimate (GAMP only)
  std::vector<int> support; // 0-based, ascending
  double residual_norm = 0.0;
  int iterations = 0;
};

struct GampParams {
  int max_iter = 50;
  double damping = 0.7; // weight of the new iterate
  double tol = 1e-6;
  bool em = true;
  /// Initial Bernoulli rate; <= 0 uses sparsity_hint / unknowns.
  double sparsity_rate = 0.0;
  /// Initial active-entry variance; <= 0 matches the measured energy.
  double prior_var = 0.0;
  /// Lower bound on noise variance relative to ||y||^2 / rows.
  double noise_floor = 1e-10;
};

/// Sum-product GAMP with a Bernoulli-Gaussian prior and AWGN output.
///
/// Throws SolverDiverged when a message becomes non-finite.
SparseSolution solve_gamp(const SparseProblem &problem,
                          const GampParams &params = {});

struct OmpStop {
  int sparsity = 0;          // 0: stop only on the residual
  double residual_tol = 0.0; // stop once ||r|| <= residual_tol
};

/// Complex OMP with normalized correlation and LS re-fit on the support.
SparseSolution solve_omp(const ComplexOperator &psi, const CVector &y,
                         const OmpStop &stop);

/// OMP with `sparsity` atoms, then a local search that keeps any change
/// lowering the residual: flipping one or two atoms to their `partner`
/// columns (-1: none), or replacing one atom by the best re-selected column.
SparseSolution solve_omp_refined(const ComplexOperator &psi, const CVector &y,
                                 int sparsity, std::span<const int> partner,
                                 int max_rounds = 50);

/// Partner of each column of conj(C_T) (x) CBS: the same BS index with the
/// coupled index shifted by round(Q_R/eta) bins, the nearest grating copy
/// (a shift of 2/eta in coupled angle). At eta = 1 the pairs coincide.
std::vector<int> cbs_partner_columns(int q_tx, int q_ris, double eta = 1.0);

enum class DictionaryVariant { cbs, conventional, bsa };
enum class SolverKind { gamp, omp_cbs, omp_conventional, omp_bsa };

SolverKind parse_solver(const std::string &name);
std::string solver_name(SolverKind solver);
DictionaryVariant solver_variant(SolverKind solver);

/// BS and RIS dictionaries of one subcarrier.
///
/// cbs: both at the subcarrier's eta. conventional: the CBS construction at
/// eta = 1. bsa: eta-scaled BS dictionary and eta-scaled RIS atoms over the
/// physical coupled range [-1, 1) only (Q_R columns).
struct SubcarrierDictionary {
  double eta = 1.0; // frequency the atoms were built at
  CMatrix bs;
  CMatrix ris;
};

SubcarrierDictionary make_dictionary(const SystemConfig &config, double eta,
                                     DictionaryVariant variant);

/// Per-subcarrier solve: returns x̂ for the supplied operator and y.
using SolverOverride =
    std::function<CVector(int m, const KronOperator &psi, const CVector &y)>;

struct Phase1Result {
  std::array<int, 2> sc{}; // 0-based selected subcarriers
  std::array<CVector, 2> x_hat;
  std::array<CVector, 2> h_cas; // vec(Ĥ_cas), column-major
  std::array<SubcarrierDictionary, 2> dict;
  int solver_calls = 0;
};

/// The two Phase-I subcarriers, 0-based: m = 1 and m = M/2.
std::array<int, 2> phase1_subcarriers(int n_sc);

struct Phase1Options {
  SolverKind solver = SolverKind::omp_cbs;
  GampParams gamp;
  SolverOverride override_solver; // replaces the solver when set
};

/// Sparse recovery at the two selected subcarriers of one user.
///
/// `y_user` holds y_k[m] for all m; only the selected entries are read.
Phase1Result estimate_cascaded_two_sc(const std::vector<CVector> &y_user,
                                      const PilotSchedule &pilots,
                                      const SystemConfig &config,
                                      std::span<const double> etas,
                                      double noise_var,
                                      const Phase1Options &options = {});

/// One sparse solve at subcarrier m with the given solver.
CVector solve_subcarrier(const SubcarrierDictionary &dict,
                         const PilotSchedule &pilots, const CVector &y,
                         const SystemConfig &config, double noise_var,
                         SolverKind solver, const GampParams &gamp);

} // namespace risce
