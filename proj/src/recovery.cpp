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

#include "risce/recovery.hpp"

#include <algorithm>
#include <functional>
#include <cmath>

#include "risce/dictionary.hpp"
#include "risce/errors.hpp"

namespace risce {

SparseProblem make_real_problem(std::shared_ptr<const ComplexOperator> psi,
                                const CVector &y, double noise_var,
                                int sparsity_hint) {
  if (y.size() != psi->rows())
    throw InvalidArgument("measurement length does not match operator rows");
  SparseProblem p;
  p.psi = std::make_shared<RealFormOperator>(std::move(psi));
  p.y = stack_real(y);
  p.noise_var = noise_var / 2.0;
  p.sparsity_hint = sparsity_hint;
  p.paired = true;
  return p;
}

// ---------------------------------------------------------------- GAMP

namespace {

// log N(r; 0, v_r + phi) - log N(r; 0, v_r)
double active_log_ratio(double r, double vr, double phi) {
  const double vt = vr + phi;
  return 0.5 * std::log(vr / vt) + 0.5 * r * r * (1.0 / vr - 1.0 / vt);
}

double sigmoid(double a) {
  a = std::clamp(a, -700.0, 700.0);
  return 1.0 / (1.0 + std::exp(-a));
}

bool all_finite(const RVector &v) { return v.array().isFinite().all(); }

} // namespace

SparseSolution solve_gamp(const SparseProblem &problem,
                          const GampParams &params) {
  if (!problem.psi)
    throw InvalidArgument("GAMP: null observation operator");
  if (params.max_iter < 1)
    throw InvalidArgument("GAMP: max_iter must be >= 1");
  const RealOperator &a = *problem.psi;
  const Index m = a.rows();
  const Index n = a.cols();
  if (problem.y.size() != m)
    throw InvalidArgument("GAMP: measurement length does not match operator");
  if (problem.paired && n % 2 != 0)
    throw InvalidArgument("GAMP: paired problem needs an even column count");
  if (!all_finite(problem.y))
    throw SolverDiverged("GAMP: non-finite measurements", 0);

  SparseSolution sol;
  const RVector &y = problem.y;
  const double y_energy = y.squaredNorm();
  if (y_energy == 0.0) {
    sol.x_real = RVector::Zero(n);
    sol.x_hat = problem.paired ? unstack_real(sol.x_real)
                               : sol.x_real.cast<cd>().eval();
    return sol;
  }

  const double noise = std::max(problem.noise_var,
                                params.noise_floor * y_energy / m);
  const Index n_unknown = problem.paired ? n / 2 : n;
  double lambda = params.sparsity_rate > 0
                      ? params.sparsity_rate
                      : static_cast<double>(problem.sparsity_hint) / n_unknown;
  lambda = std::clamp(lambda, 1.0 / n_unknown, 0.5);

  double phi = params.prior_var;
  if (phi <= 0) {
    const double frob = a.adjoint_abs2(RVector::Ones(m)).sum();
    phi = std::max(y_energy - m * noise, 1e-3 * y_energy) / (lambda * frob);
  }

  const double beta = params.damping;
  RVector x = RVector::Zero(n);
  RVector vx = RVector::Constant(n, lambda * phi);
  RVector s = RVector::Zero(m);
  RVector vs = RVector::Zero(m);
  RVector pi(n), mean(n), var(n);

  int it = 0;
  for (it = 1; it <= params.max_iter; ++it) {
    // output side
    const RVector vp = a.apply_abs2(vx);
    const RVector p = a.apply(x) - vp.cwiseProduct(s);
    const RVector vs_new = (vp.array() + noise).inverse().matrix();
    const RVector s_new = (y - p).cwiseProduct(vs_new);
    if (it == 1) {
      s = s_new;
      vs = vs_new;
    } else {
      s = beta * s_new + (1 - beta) * s;
      vs = beta * vs_new + (1 - beta) * vs;
    }

    // input side
    const RVector vr = a.adjoint_abs2(vs).array().inverse().matrix();
    const RVector r = x + vr.cwiseProduct(a.adjoint(s));
    if (!all_finite(vr) || !all_finite(r))
      throw SolverDiverged("GAMP: non-finite input messages", it);

    const double prior_log = std::log(lambda / (1 - lambda));
    if (problem.paired) {
      const Index h = n / 2;
      for (Index i = 0; i < h; ++i) {
        const double llr = prior_log +
                           active_log_ratio(r(i), vr(i), phi) +
                           active_log_ratio(r(i + h), vr(i + h), phi);
        pi(i) = pi(i + h) = sigmoid(llr);
      }
    } else {
      for (Index i = 0; i < n; ++i)
        pi(i) = sigmoid(prior_log + active_log_ratio(r(i), vr(i), phi));
    }
    for (Index i = 0; i < n; ++i) {
      const double g = phi / (phi + vr(i));
      mean(i) = g * r(i);
      var(i) = g * vr(i);
    }
    const RVector x_new = pi.cwiseProduct(mean);
    const RVector vx_new =
        (pi.array() * (var.array() + mean.array().square()) -
         x_new.array().square())
            .matrix();

    if (params.em) {
      const double pi_sum = pi.sum();
      lambda = std::clamp(pi_sum / n, 1.0 / n_unknown, 0.5);
      if (pi_sum > 0) {
        const double phi_new =
            (pi.array() * (var.array() + mean.array().square())).sum() /
            pi_sum;
        if (phi_new > 0 && std::isfinite(phi_new))
          phi = phi_new;
      }
    }

    const RVector x_old = x;
    x = beta * x_new + (1 - beta) * x;
    vx = (beta * vx_new + (1 - beta) * vx).cwiseMax(0.0);
    if (!all_finite(x) || !all_finite(vx))
      throw SolverDiverged("GAMP: non-finite estimate", it);

    const double xn = x.norm();
    if (xn > 0 && (x - x_old).norm() <= params.tol * xn)
      break;
  }
  sol.iterations = std::min(it, params.max_iter);
  sol.x_real = x;
  sol.residual_norm = (y - a.apply(x)).norm();
  if (problem.paired) {
    sol.x_hat = unstack_real(x);
    const Index h = n / 2;
    for (Index i = 0; i < h; ++i)
      if (pi(i) > 0.5)
        sol.support.push_back(static_cast<int>(i));
  } else {
    sol.x_hat = x.cast<cd>();
    for (Index i = 0; i < n; ++i)
      if (pi(i) > 0.5)
        sol.support.push_back(static_cast<int>(i));
  }
  return sol;
}

// ---------------------------------------------------------------- OMP

SparseSolution solve_omp(const ComplexOperator &psi, const CVector &y,
                         const OmpStop &stop) {
  const Index n = psi.cols();
  if (y.size() != psi.rows())
    throw InvalidArgument("OMP: measurement length does not match operator");
  if (stop.sparsity < 0 || stop.sparsity > n)
    throw InvalidArgument("OMP: requested sparsity " +
                          std::to_string(stop.sparsity) +
                          " exceeds column count " + std::to_string(n));
  const int max_atoms = stop.sparsity > 0
                            ? stop.sparsity
                            : static_cast<int>(std::min<Index>(n, psi.rows()));

  SparseSolution sol;
  sol.x_hat = CVector::Zero(n);
  CVector residual = y;
  sol.residual_norm = residual.norm();
  if (sol.residual_norm <= stop.residual_tol || sol.residual_norm == 0.0)
    return sol;

  RVector norms = psi.column_norms();
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  std::vector<int> support;
  CMatrix atoms(psi.rows(), 0);
  CVector coef;
  for (int it = 0; it < max_atoms; ++it) {
    const CVector corr = psi.adjoint(residual);
    Index best = -1;
    double best_val = -1.0;
    for (Index j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)] || norms(j) <= 0)
        continue;
      const double v = std::abs(corr(j)) / norms(j);
      if (v > best_val) {
        best_val = v;
        best = j;
      }
    }
    if (best < 0)
      break;
    used[static_cast<std::size_t>(best)] = 1;
    support.push_back(static_cast<int>(best));
    atoms.conservativeResize(Eigen::NoChange, atoms.cols() + 1);
    atoms.col(atoms.cols() - 1) = psi.column(best);
    coef = atoms.colPivHouseholderQr().solve(y);
    residual = y - atoms * coef;
    sol.iterations = it + 1;
    sol.residual_norm = residual.norm();
    if (sol.residual_norm <= stop.residual_tol)
      break;
  }
  for (std::size_t i = 0; i < support.size(); ++i)
    sol.x_hat(support[i]) = coef(static_cast<Index>(i));
  std::sort(support.begin(), support.end());
  sol.support = std::move(support);
  return sol;
}

namespace {

struct SupportFit {
  std::vector<int> support;
  CVector coef;
  CVector residual;
  double energy = 0.0;
};

SupportFit fit_support(const ComplexOperator &psi, const CVector &y,
                       std::vector<int> support) {
  SupportFit f;
  f.support = std::move(support);
  if (f.support.empty()) {
    f.residual = y;
  } else {
    CMatrix atoms(psi.rows(), static_cast<Index>(f.support.size()));
    for (std::size_t i = 0; i < f.support.size(); ++i)
      atoms.col(static_cast<Index>(i)) = psi.column(f.support[i]);
    f.coef = atoms.colPivHouseholderQr().solve(y);
    f.residual = y - atoms * f.coef;
  }
  f.energy = f.residual.squaredNorm();
  return f;
}

bool contains(const std::vector<int> &v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

// Column outside `support` best correlated with the residual of `fit`.
// Up to `count` columns outside the support, by normalized correlation with
// the residual, strongest first.
std::vector<int> best_new_columns(const ComplexOperator &psi,
                                  const SupportFit &fit, const RVector &norms,
                                  int count) {
  const CVector corr = psi.adjoint(fit.residual);
  std::vector<std::pair<double, int>> scored;
  for (Index j = 0; j < corr.size(); ++j) {
    if (norms(j) <= 0 || contains(fit.support, static_cast<int>(j)))
      continue;
    scored.emplace_back(std::abs(corr(j)) / norms(j), static_cast<int>(j));
  }
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(count),
                                          scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), std::greater<>());
  std::vector<int> out;
  for (std::size_t i = 0; i < keep; ++i)
    out.push_back(scored[i].second);
  return out;
}

bool improves(const SupportFit &candidate, const SupportFit &current) {
  return candidate.energy < current.energy * (1.0 - 1e-9);
}

// First flip of one atom, or of two atoms jointly, to partner columns that
// lowers the residual.
bool try_partner_flips(const ComplexOperator &psi, const CVector &y,
                       std::span<const int> partner, SupportFit &best) {
  const std::size_t n = best.support.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      std::vector<int> s = best.support;
      const int pi = partner[static_cast<std::size_t>(s[i])];
      const int pj = partner[static_cast<std::size_t>(s[j])];
      if (pi < 0 || contains(s, pi) || (j != i && (pj < 0 || contains(s, pj))))
        continue;
      s[i] = pi;
      if (j != i)
        s[j] = pj;
      SupportFit f = fit_support(psi, y, std::move(s));
      if (improves(f, best)) {
        best = std::move(f);
        return true;
      }
    }
  }
  return false;
}

bool try_single_swaps(const ComplexOperator &psi, const CVector &y,
                      const RVector &norms, SupportFit &best) {
  constexpr int kCandidates = 8;
  for (std::size_t i = 0; i < best.support.size(); ++i) {
    std::vector<int> rest = best.support;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
    const SupportFit reduced = fit_support(psi, y, rest);
    SupportFit chosen = best;
    for (int j : best_new_columns(psi, reduced, norms, kCandidates)) {
      std::vector<int> s = rest;
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(i), j);
      SupportFit f = fit_support(psi, y, std::move(s));
      if (improves(f, chosen))
        chosen = std::move(f);
    }
    if (improves(chosen, best)) {
      best = std::move(chosen);
      return true;
    }
  }
  return false;
}

} // namespace

SparseSolution solve_omp_refined(const ComplexOperator &psi, const CVector &y,
                                 int sparsity, std::span<const int> partner,
                                 int max_rounds) {
  if (static_cast<Index>(partner.size()) != psi.cols())
    throw InvalidArgument("OMP: partner map must have one entry per column");
  for (int p : partner)
    if (p >= psi.cols())
      throw InvalidArgument("OMP: partner index out of range");
  OmpStop stop;
  stop.sparsity = sparsity;
  SparseSolution sol = solve_omp(psi, y, stop);
  if (sol.support.empty())
    return sol;

  const RVector norms = psi.column_norms();
  SupportFit best = fit_support(psi, y, sol.support);
  int rounds = 0;
  while (rounds < max_rounds &&
         (try_partner_flips(psi, y, partner, best) ||
          try_single_swaps(psi, y, norms, best)))
    ++rounds;

  sol.x_hat = CVector::Zero(psi.cols());
  for (std::size_t i = 0; i < best.support.size(); ++i)
    sol.x_hat(best.support[i]) = best.coef(static_cast<Index>(i));
  std::sort(best.support.begin(), best.support.end());
  sol.support = std::move(best.support);
  sol.residual_norm = std::sqrt(best.energy);
  sol.iterations += rounds;
  return sol;
}

std::vector<int> cbs_partner_columns(int q_tx, int q_ris, double eta) {
  if (q_tx < 1 || q_ris < 1)
    throw InvalidArgument("grid sizes must be >= 1");
  if (!(eta > 0))
    throw InvalidArgument("eta must be positive");
  const int q_b = 2 * q_ris - 1;
  const int shift = std::max(1, static_cast<int>(std::lround(q_ris / eta)));
  std::vector<int> partner(static_cast<std::size_t>(q_tx) * q_b, -1);
  for (int qt = 0; qt < q_tx; ++qt)
    for (int qb = 0; qb < q_b; ++qb) {
      const int p = qb >= shift ? qb - shift : qb + shift;
      if (p < q_b)
        partner[static_cast<std::size_t>(qt * q_b + qb)] = qt * q_b + p;
    }
  return partner;
}

// ---------------------------------------------------------------- phase I

SolverKind parse_solver(const std::string &name) {
  if (name == "gamp")
    return SolverKind::gamp;
  if (name == "omp_cbs")
    return SolverKind::omp_cbs;
  if (name == "omp_conventional")
    return SolverKind::omp_conventional;
  if (name == "omp_bsa")
    return SolverKind::omp_bsa;
  throw InvalidConfig("unknown solver '" + name + "'");
}

std::string solver_name(SolverKind solver) {
  switch (solver) {
  case SolverKind::gamp:
    return "gamp";
  case SolverKind::omp_cbs:
    return "omp_cbs";
  case SolverKind::omp_conventional:
    return "omp_conventional";
  case SolverKind::omp_bsa:
    return "omp_bsa";
  }
  return "unknown";
}

DictionaryVariant solver_variant(SolverKind solver) {
  switch (solver) {
  case SolverKind::omp_conventional:
    return DictionaryVariant::conventional;
  case SolverKind::omp_bsa:
    return DictionaryVariant::bsa;
  default:
    return DictionaryVariant::cbs;
  }
}

SubcarrierDictionary make_dictionary(const SystemConfig &config, double eta,
                                     DictionaryVariant variant) {
  SubcarrierDictionary d;
  d.eta = variant == DictionaryVariant::conventional ? 1.0 : eta;
  switch (variant) {
  case DictionaryVariant::cbs:
    d.bs = build_bs_dictionary(config.q_tx, eta, config.n_tx);
    d.ris = build_cbs_dictionary(config.q_ris, eta, config.n_ris).columns;
    break;
  case DictionaryVariant::conventional:
    d.bs = build_bs_dictionary(config.q_tx, 1.0, config.n_tx);
    d.ris = build_cbs_dictionary(config.q_ris, 1.0, config.n_ris).columns;
    break;
  case DictionaryVariant::bsa: {
    d.bs = build_bs_dictionary(config.q_tx, eta, config.n_tx);
    std::vector<double> angles;
    const int half = config.q_ris / 2;
    for (int q = 0; q < config.q_ris; ++q)
      angles.push_back(2.0 * (q - half) / config.q_ris);
    d.ris = array_response_matrix(angles, eta, config.n_ris);
    break;
  }
  }
  return d;
}

std::array<int, 2> phase1_subcarriers(int n_sc) {
  if (n_sc < 2 || n_sc % 2 != 0)
    throw InvalidConfig("subcarrier count must be even and >= 2");
  return {0, n_sc / 2 - 1};
}

CVector solve_subcarrier(const SubcarrierDictionary &dict,
                         const PilotSchedule &pilots, const CVector &y,
                         const SystemConfig &config, double noise_var,
                         SolverKind solver, const GampParams &gamp) {
  auto op = observation_operator(pilots, dict.bs, dict.ris);
  const int sparsity = config.n_paths_bs * config.n_paths_ue;
  if (solver == SolverKind::gamp) {
    const SparseProblem prob = make_real_problem(op, y, noise_var, sparsity);
    return solve_gamp(prob, gamp).x_hat;
  }
  const int atoms = static_cast<int>(std::min<Index>(sparsity, op->cols()));
  if (solver == SolverKind::omp_cbs)
    return solve_omp_refined(*op, y, atoms,
                             cbs_partner_columns(config.q_tx, config.q_ris, dict.eta))
        .x_hat;
  OmpStop stop;
  stop.sparsity = atoms;
  return solve_omp(*op, y, stop).x_hat;
}

Phase1Result estimate_cascaded_two_sc(const std::vector<CVector> &y_user,
                                      const PilotSchedule &pilots,
                                      const SystemConfig &config,
                                      std::span<const double> etas,
                                      double noise_var,
                                      const Phase1Options &options) {
  Phase1Result out;
  out.sc = phase1_subcarriers(config.n_sc);
  if (static_cast<int>(y_user.size()) < config.n_sc ||
      static_cast<int>(etas.size()) < config.n_sc)
    throw InvalidArgument("phase I needs measurements for every subcarrier");
  const DictionaryVariant variant = solver_variant(options.solver);
  for (std::size_t i = 0; i < 2; ++i) {
    const int m = out.sc[i];
    const CVector &y = y_user[static_cast<std::size_t>(m)];
    out.dict[i] = make_dictionary(config, etas[static_cast<std::size_t>(m)],
                                  variant);
    if (options.override_solver) {
      auto op = observation_operator(pilots, out.dict[i].bs, out.dict[i].ris);
      out.x_hat[i] = options.override_solver(m, *op, y);
    } else {
      out.x_hat[i] = solve_subcarrier(out.dict[i], pilots, y, config,
                                      noise_var, options.solver, options.gamp);
    }
    ++out.solver_calls;
    out.h_cas[i] =
        apply_total_dictionary(out.dict[i].bs, out.dict[i].ris, out.x_hat[i]);
  }
  return out;
}

} // namespace risce
