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

// Independent reference computations for the test suite. Everything here is
// written from the defining formulas with plain loops and never calls the
// library routine it is used to check.

#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

inline CVector arv(double u, double eta, int n) {
  CVector a(n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    const double ph = -kPi * eta * u * i;
    a(i) = cd(s * std::cos(ph), s * std::sin(ph));
  }
  return a;
}

// 1-based q: 2q/Q - (Q+1)/Q
inline double grid(int q1, int size) {
  return (2.0 * q1 - (size + 1.0)) / size;
}

// 1-based CBS index q: 2(q - Q_R)/Q_R
inline double coupled(int q1, int q_ris) {
  return 2.0 * (q1 - q_ris) / q_ris;
}

inline long double subcarrier_frequency(long double f_c, long double b, int m1,
                                        int n_sc) {
  return f_c + (b / n_sc) * (m1 - 1 - (n_sc - 1) / 2.0L);
}

inline CMatrix bs_dictionary(int q_tx, double eta, int n_tx) {
  CMatrix c(n_tx, q_tx);
  for (int q = 1; q <= q_tx; ++q)
    c.col(q - 1) = arv(grid(q, q_tx), eta, n_tx);
  return c;
}

// conj(C_R) • C_R column by column, column (q2-1)*Q_R + (q1-1).
inline CMatrix full_coupled(int q_ris, double eta, int n_ris) {
  CMatrix c(n_ris, q_ris * q_ris);
  for (int q2 = 1; q2 <= q_ris; ++q2)
    for (int q1 = 1; q1 <= q_ris; ++q1) {
      const CVector a = arv(grid(q2, q_ris), eta, n_ris);
      const CVector b = arv(grid(q1, q_ris), eta, n_ris);
      CVector col(n_ris);
      for (int i = 0; i < n_ris; ++i)
        col(i) = std::sqrt(static_cast<double>(n_ris)) * std::conj(a(i)) * b(i);
      c.col((q2 - 1) * q_ris + (q1 - 1)) = col;
    }
  return c;
}

// CBS row (0-based) that full-dictionary column (q2, q1) merges into.
inline int merge_target(int q1, int q2, int q_ris) {
  return q1 - q2 + q_ris - 1;
}

inline CMatrix cbs(int q_ris, double eta, int n_ris) {
  CMatrix c(n_ris, 2 * q_ris - 1);
  for (int q = 1; q <= 2 * q_ris - 1; ++q)
    c.col(q - 1) = arv(coupled(q, q_ris), eta, n_ris);
  return c;
}

inline CMatrix kron(const CMatrix &a, const CMatrix &b) {
  CMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

// Largest number of grating-lobe copies γ + 2K/η of one coupled angle that
// fit in the closed range covered by the CBS grid cells, maximized over γ
// on a fine scan of one period.
inline int kcp_bruteforce(double eta, int q_ris) {
  const double lo = -2.0 + 1.0 / q_ris;
  const double hi = 2.0 - 1.0 / q_ris;
  const double period = 2.0 / eta;
  const int scan = 4000;
  int best = 0;
  for (int s = 0; s <= scan; ++s) {
    const double g0 = lo + period * s / scan;
    int count = 0;
    for (int k = -20; k <= 20; ++k) {
      const double g = g0 + k * period;
      if (g >= lo - 1e-12 && g <= hi + 1e-12)
        ++count;
    }
    best = std::max(best, count);
  }
  return best;
}

// Moore-Penrose solve through a full SVD.
inline CVector pinv_solve(const CMatrix &a, const CVector &y) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto &s = svd.singularValues();
  CVector uty = svd.matrixU().adjoint() * y;
  const double tol = s.size() ? s(0) * 1e-12 * std::max(a.rows(), a.cols()) : 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    uty(i) = s(i) > tol ? uty(i) / s(i) : cd(0.0);
  return svd.matrixV() * uty;
}

inline CMatrix random_cmatrix(int rows, int cols, std::mt19937_64 &rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  CMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i)
      m(i, j) = cd(n(rng), n(rng));
  return m;
}

inline CVector random_cvector(int n, std::mt19937_64 &rng) {
  return random_cmatrix(n, 1, rng).col(0);
}

inline double rel_err(const CMatrix &a, const CMatrix &b) {
  const double nb = b.norm();
  return nb > 0 ? (a - b).norm() / nb : (a - b).norm();
}

} // namespace oracle
