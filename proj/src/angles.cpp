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

#include "risce/angles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "risce/dictionary.hpp"
#include "risce/errors.hpp"
#include "risce/model.hpp"

namespace risce {

BsAngleEstimate enm_estimate(const CVector &x_first, const CVector &x_second,
                             int n_paths, int q_tx, int q_b) {
  if (n_paths < 1 || n_paths > q_tx)
    throw InvalidArgument("EnM: path count must be in [1, Q_T]");
  const Index len = static_cast<Index>(q_tx) * q_b;
  if (x_first.size() != len || x_second.size() != len)
    throw InvalidArgument("EnM: estimates must have length Q_B*Q_T");

  BsAngleEstimate est;
  est.energy_spectrum = RVector::Zero(q_tx);
  for (const CVector *x : {&x_first, &x_second}) {
    RVector mag = x->cwiseAbs();
    const double norm = mag.norm();
    if (norm > 0)
      mag /= norm;
    for (int q = 0; q < q_tx; ++q)
      est.energy_spectrum(q) += mag.segment(static_cast<Index>(q) * q_b, q_b).norm();
  }

  std::vector<int> order(static_cast<std::size_t>(q_tx));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return est.energy_spectrum(a) > est.energy_spectrum(b);
  });
  est.support.assign(order.begin(), order.begin() + n_paths);
  std::sort(est.support.begin(), est.support.end());
  for (int q : est.support)
    est.dods.push_back(grid_sample(q, q_tx));
  return est;
}

CMatrix project_rest_csi(const CMatrix &h_cas, const CMatrix &bs_arm) {
  if (h_cas.cols() != bs_arm.rows())
    throw InvalidArgument("rest CSI: channel and BS array sizes disagree");
  if (bs_arm.cols() > bs_arm.rows())
    throw DegenerateAngles("rest CSI: more paths than BS antennas");
  Eigen::JacobiSVD<CMatrix> svd(bs_arm);
  const auto &sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0) || sv(0) / smin > 1e12)
    throw DegenerateAngles("rest CSI: BS array matrix is rank deficient "
                           "(condition " +
                           std::to_string(smin > 0 ? sv(0) / smin : INFINITY) +
                           ")");
  // (A^H)^+ = A (A^H A)^-1
  const CMatrix gram = bs_arm.adjoint() * bs_arm;
  return h_cas * bs_arm * gram.inverse();
}

int default_n_sub(int n_ris) { return (n_ris + 1) / 2 - 1; }

CMatrix spatial_smooth(const CVector &u, int n_sub, int n_paths_ue,
                       bool enforce) {
  const int n = static_cast<int>(u.size());
  const int n_a = n - n_sub + 1;
  auto fail = [&](const std::string &what) {
    throw InvalidSubarrayConfig("spatial smoothing: violated " + what +
                                " (N_R=" + std::to_string(n) +
                                ", n_sub=" + std::to_string(n_sub) +
                                ", N_a=" + std::to_string(n_a) + ", J=" +
                                std::to_string(n_paths_ue) + ")");
  };
  if (n_sub < 1 || n_a < 1)
    fail("1 <= n_sub <= N_R");
  if (enforce && !(n_a > n_sub))
    fail("N_a > n_sub");
  if (!(n_sub > n_paths_ue))
    fail("n_sub > J");
  if (!(n_a > n_paths_ue))
    fail("N_a > J");

  CMatrix windows(n_sub, n_a);
  for (int i = 0; i < n_a; ++i)
    windows.col(i) = u.segment(i, n_sub);
  return windows * windows.adjoint() / static_cast<double>(n_a);
}

MusicSpectrum music_spectrum(const CMatrix &cov, int n_paths_ue, int q_ris,
                             double eta) {
  const Index n_sub = cov.rows();
  if (cov.cols() != n_sub || n_sub < n_paths_ue + 1)
    throw InvalidArgument("MUSIC: covariance must be square with size > J");
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    const double trace = cov.trace().real();
    throw NumericalError("MUSIC: eigendecomposition failed (size " +
                         std::to_string(n_sub) + ", trace " +
                         std::to_string(trace) + ")");
  }
  // ascending eigenvalues: the first N_sub - J columns span the noise space
  const CMatrix noise = eig.eigenvectors().leftCols(n_sub - n_paths_ue);

  MusicSpectrum s;
  s.eta = eta;
  const int q_b = 2 * q_ris - 1;
  s.values.resize(q_b);
  for (int q = 0; q < q_b; ++q) {
    const double g = coupled_grid_sample(q, q_ris);
    s.grid.push_back(g);
    const CVector atom = arv(g, eta, n_sub);
    const double proj = (noise.adjoint() * atom).squaredNorm();
    s.values(q) = 1.0 / std::max(proj, std::numeric_limits<double>::min());
  }
  s.midpoints.resize(std::max(q_b - 1, 0));
  for (int q = 0; q + 1 < q_b; ++q) {
    const double g = 0.5 * (s.grid[q] + s.grid[q + 1]);
    const double proj = (noise.adjoint() * arv(g, eta, n_sub)).squaredNorm();
    s.midpoints(q) = 1.0 / std::max(proj, std::numeric_limits<double>::min());
  }
  const double vmin = s.values.minCoeff();
  s.padded.resize(q_b + 2);
  s.padded << vmin, s.values, vmin;
  return s;
}

std::vector<int> find_peaks(const MusicSpectrum &spectrum, int count) {
  const RVector &p = spectrum.padded;
  std::vector<int> peaks;
  const RVector &mid = spectrum.midpoints;
  const Index n = spectrum.values.size();
  const bool has_mid = mid.size() == std::max<Index>(n - 1, 0);
  for (Index i = 1; i + 1 < p.size(); ++i) {
    const Index q = i - 1;
    bool peak = p(i) > p(i - 1) && p(i) > p(i + 1);
    if (!peak && has_mid) {
      const double left = q > 0 ? mid(q - 1) : p(0);
      const double right = q + 1 < n ? mid(q) : p(p.size() - 1);
      peak = p(i) > left && p(i) > right;
    }
    if (peak)
      peaks.push_back(static_cast<int>(q));
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](int a, int b) {
    return spectrum.values(a) > spectrum.values(b);
  });
  if (static_cast<int>(peaks.size()) > count)
    peaks.resize(static_cast<std::size_t>(count));
  return peaks;
}

AmbiguityBound k_cp_max(double eta, int q_ris) {
  if (!(eta > 0))
    throw InvalidArgument("k_cp_max: eta must be positive");
  if (q_ris < 1)
    throw InvalidArgument("k_cp_max: q_ris must be >= 1");
  AmbiguityBound b;
  b.eta = eta;
  b.q_ris = q_ris;
  b.k_cp_max = static_cast<int>(std::floor(eta * (2.0 - 1.0 / q_ris))) + 1;
  return b;
}

double sc_selection_bound(int n_sc, double f_c, double bandwidth, int q_b) {
  if (bandwidth < 0)
    throw InvalidArgument("sc selection: bandwidth must be >= 0");
  if (bandwidth == 0)
    return std::numeric_limits<double>::infinity();
  return n_sc / 2.0 + n_sc * f_c / (bandwidth * q_b) + 0.5;
}

bool sc_selection_valid(int m, int n_sc, double f_c, double bandwidth,
                        int q_b) {
  return m < sc_selection_bound(n_sc, f_c, bandwidth, q_b);
}

int peak_distance(int q, int q_prime) { return std::abs(q - q_prime); }

RisAngleEstimate ds_music(const std::array<CMatrix, 2> &rest_csi,
                          int n_paths_ue, int q_ris,
                          const std::array<double, 2> &etas, int n_sub) {
  const Index n_paths = rest_csi[0].cols();
  if (rest_csi[1].cols() != n_paths || rest_csi[0].rows() != rest_csi[1].rows())
    throw InvalidArgument("DS-MUSIC: rest CSI shapes disagree");
  const int J = n_paths_ue;

  RisAngleEstimate est;
  for (Index l = 0; l < n_paths; ++l) {
    std::array<std::vector<int>, 2> peaks;
    std::array<double, 2> peak_max{};
    for (std::size_t s = 0; s < 2; ++s) {
      const CMatrix cov = spatial_smooth(rest_csi[s].col(l), n_sub, J);
      est.spectra[s].push_back(music_spectrum(cov, J, q_ris, etas[s]));
      peaks[s] = find_peaks(est.spectra[s].back(), 2 * J);
      if (static_cast<int>(peaks[s].size()) < J)
        throw InsufficientPeaks("DS-MUSIC: fewer than J peaks at subcarrier " +
                                    std::to_string(s),
                                static_cast<int>(l));
      peak_max[s] = est.spectra[s].back().values.maxCoeff();
    }

    struct Pair {
      int a, b, dist;
      double height;
    };
    std::vector<Pair> pairs;
    for (int a : peaks[0])
      for (int b : peaks[1])
        pairs.push_back({a, b, peak_distance(a, b),
                         est.spectra[0].back().values(a) / peak_max[0] +
                             est.spectra[1].back().values(b) / peak_max[1]});
    std::sort(pairs.begin(), pairs.end(), [](const Pair &x, const Pair &y) {
      if (x.dist != y.dist)
        return x.dist < y.dist;
      if (x.height != y.height)
        return x.height > y.height;
      if (x.a != y.a)
        return x.a < y.a;
      return x.b < y.b;
    });

    std::vector<int> chosen;
    std::vector<int> used_a, used_b;
    for (const Pair &p : pairs) {
      if (static_cast<int>(chosen.size()) == J)
        break;
      if (std::find(used_a.begin(), used_a.end(), p.a) != used_a.end() ||
          std::find(used_b.begin(), used_b.end(), p.b) != used_b.end())
        continue;
      used_a.push_back(p.a);
      used_b.push_back(p.b);
      chosen.push_back((p.a + p.b + 1) / 2);
    }
    if (static_cast<int>(chosen.size()) < J)
      throw InsufficientPeaks("DS-MUSIC: fewer than J peak pairs",
                              static_cast<int>(l));
    std::sort(chosen.begin(), chosen.end());
    std::vector<double> angles;
    for (int q : chosen)
      angles.push_back(coupled_grid_sample(q, q_ris));
    est.per_path.push_back(chosen);
    est.coupled_angles.push_back(angles);
    est.support.insert(est.support.end(), chosen.begin(), chosen.end());
  }
  std::sort(est.support.begin(), est.support.end());
  est.support.erase(std::unique(est.support.begin(), est.support.end()),
                    est.support.end());
  return est;
}

} // namespace risce
