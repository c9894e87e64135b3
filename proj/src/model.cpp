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

#include "risce/model.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "risce/errors.hpp"

namespace risce {

namespace {

void require(bool ok, const std::string &what) {
  if (!ok)
    throw InvalidConfig("invalid config: " + what);
}

// Partial Fisher-Yates: `count` distinct indices out of [0, n).
std::vector<int> sample_without_replacement(int n, int count, Rng &rng) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

std::vector<double> draw_directions(bool on_grid, int grid_size, int count,
                                    Rng &rng) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  if (on_grid) {
    for (int q : sample_without_replacement(grid_size, count, rng))
      out.push_back(grid_sample(q, grid_size));
  } else {
    std::uniform_real_distribution<double> angle(-kPi / 2, kPi / 2);
    for (int i = 0; i < count; ++i)
      out.push_back(std::sin(angle(rng)));
  }
  return out;
}

cd delay_phase(double delay, double freq) {
  return std::polar(1.0, -2.0 * kPi * delay * freq);
}

} // namespace

void SystemConfig::validate() const {
  require(n_tx >= 1, "n_tx must be >= 1");
  require(n_ris >= 1, "n_ris must be >= 1");
  require(n_rf >= 1 && n_rf <= n_tx, "n_rf must be in [1, n_tx]");
  require(n_users >= 1, "n_users must be >= 1");
  require(n_sc >= 2 && n_sc % 2 == 0, "n_sc must be an even integer >= 2");
  require(f_c > 0, "f_c must be positive");
  require(bandwidth >= 0, "bandwidth must be >= 0");
  require(n_subframes >= 1, "n_subframes must be >= 1");
  require(n_slots >= 1, "n_slots must be >= 1");
  require(q_tx >= 1, "q_tx must be >= 1");
  require(q_ris >= 1, "q_ris must be >= 1");
  require(n_paths_bs >= 1, "n_paths_bs must be >= 1");
  require(n_paths_ue >= 1, "n_paths_ue must be >= 1");
  require(q_tx >= n_paths_bs, "q_tx must be >= n_paths_bs");
  require(q_ris >= n_paths_ue, "q_ris must be >= n_paths_ue");
  require(q_ris >= n_paths_bs, "q_ris must be >= n_paths_bs");
  require(tau_max >= 0, "tau_max must be >= 0");
  require(!std::isnan(snr_db), "snr_db must be a number");
}

std::vector<double> subcarrier_frequencies(double f_c, double bandwidth,
                                           int n_sc) {
  if (n_sc < 1)
    throw InvalidConfig("subcarrier count must be >= 1");
  if (bandwidth < 0)
    throw InvalidConfig("bandwidth must be >= 0");
  std::vector<double> f(static_cast<std::size_t>(n_sc));
  const double spacing = bandwidth / n_sc;
  const double centre = (n_sc - 1) / 2.0;
  for (int m = 0; m < n_sc; ++m)
    f[static_cast<std::size_t>(m)] = f_c + spacing * (m - centre);
  return f;
}

double relative_frequency(double f_m, double f_c) {
  if (f_c == 0.0)
    throw InvalidConfig("carrier frequency must be nonzero");
  return f_m / f_c;
}

std::vector<double> relative_frequencies(const SystemConfig &config) {
  auto f = subcarrier_frequencies(config.f_c, config.bandwidth, config.n_sc);
  for (double &v : f)
    v = relative_frequency(v, config.f_c);
  return f;
}

CVector arv(double direction_sine, double eta, Index n_elems) {
  CVector a(n_elems);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_elems));
  const double step = -kPi * eta * direction_sine;
  for (Index i = 0; i < n_elems; ++i)
    a(i) = std::polar(scale, step * static_cast<double>(i));
  return a;
}

CMatrix array_response_matrix(std::span<const double> sines, double eta,
                              Index n_elems) {
  CMatrix a(n_elems, static_cast<Index>(sines.size()));
  for (std::size_t i = 0; i < sines.size(); ++i)
    a.col(static_cast<Index>(i)) = arv(sines[i], eta, n_elems);
  return a;
}

double grid_sample(int q, int grid_size) {
  const double g = grid_size;
  return 2.0 * (q + 1) / g - (g + 1) / g;
}

PathDraw draw_paths(const SystemConfig &config, Rng &rng) {
  const int L = config.n_paths_bs;
  const int J = config.n_paths_ue;
  if (config.on_grid && (L > config.q_tx || L > config.q_ris ||
                         J > config.q_ris))
    throw InvalidConfig("path count exceeds grid size for on-grid draws");

  std::uniform_real_distribution<double> delay(0.0, config.tau_max);
  auto draw_delay = [&] { return config.tau_max > 0 ? delay(rng) : 0.0; };

  PathDraw out;
  auto &bs = out.bs_ris;
  for (int l = 0; l < L; ++l)
    bs.gains.push_back(complex_normal(rng));
  for (int l = 0; l < L; ++l)
    bs.delays.push_back(draw_delay());
  bs.doa_ris = draw_directions(config.on_grid, config.q_ris, L, rng);
  bs.dod_bs = draw_directions(config.on_grid, config.q_tx, L, rng);

  out.ris_ue.resize(static_cast<std::size_t>(config.n_users));
  for (auto &ue : out.ris_ue) {
    for (int j = 0; j < J; ++j)
      ue.gains.push_back(complex_normal(rng));
    for (int j = 0; j < J; ++j)
      ue.delays.push_back(draw_delay());
    ue.dod_ris = draw_directions(config.on_grid, config.q_ris, J, rng);
  }
  return out;
}

CVector ChannelRealization::cascaded_vec(int k, int m) const {
  const CMatrix &h = cascaded[static_cast<std::size_t>(k)]
                             [static_cast<std::size_t>(m)];
  return Eigen::Map<const CVector>(h.data(), h.size());
}

ChannelRealization synthesize_channels(const SystemConfig &config,
                                       const PathDraw &paths,
                                       std::span<const double> freqs) {
  const Index nt = config.n_tx;
  const Index nr = config.n_ris;
  const std::size_t M = freqs.size();
  const auto &bs = paths.bs_ris;

  ChannelRealization ch;
  ch.n_tx = config.n_tx;
  ch.n_ris = config.n_ris;
  ch.freqs.assign(freqs.begin(), freqs.end());
  ch.paths_bs_ris = bs;
  ch.paths_ris_ue = paths.ris_ue;
  for (double f : freqs)
    ch.etas.push_back(relative_frequency(f, config.f_c));

  ch.bs_ris.resize(M);
  ch.angle_excluded_bs.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    const double eta = ch.etas[m];
    CMatrix g = CMatrix::Zero(nr, nt);
    CVector sigma(static_cast<Index>(bs.count()));
    for (std::size_t l = 0; l < bs.count(); ++l) {
      const cd coef = bs.gains[l] * delay_phase(bs.delays[l], freqs[m]);
      sigma(static_cast<Index>(l)) = coef;
      g.noalias() += coef * arv(bs.doa_ris[l], eta, nr) *
                     arv(bs.dod_bs[l], eta, nt).adjoint();
    }
    ch.bs_ris[m] = std::move(g);
    ch.angle_excluded_bs[m] = std::move(sigma);
  }

  const std::size_t K = paths.ris_ue.size();
  ch.ris_ue.assign(K, std::vector<CVector>(M));
  ch.cascaded.assign(K, std::vector<CMatrix>(M));
  ch.angle_excluded_ue.assign(K, std::vector<CVector>(M));
  for (std::size_t k = 0; k < K; ++k) {
    const auto &ue = paths.ris_ue[k];
    for (std::size_t m = 0; m < M; ++m) {
      const double eta = ch.etas[m];
      CVector h = CVector::Zero(nr);
      CVector beta(static_cast<Index>(ue.count()));
      for (std::size_t j = 0; j < ue.count(); ++j) {
        const cd coef = ue.gains[j] * delay_phase(ue.delays[j], freqs[m]);
        beta(static_cast<Index>(j)) = coef;
        h += coef * arv(ue.dod_ris[j], eta, nr).conjugate();
      }
      ch.cascaded[k][m] = h.asDiagonal() * ch.bs_ris[m];
      ch.ris_ue[k][m] = std::move(h);
      ch.angle_excluded_ue[k][m] = std::move(beta);
    }
  }
  return ch;
}

CMatrix cascaded_factored(const ChannelRealization &channel, int k, int m) {
  const auto &bs = channel.paths_bs_ris;
  const auto &ue = channel.paths_ris_ue[static_cast<std::size_t>(k)];
  const double eta = channel.etas[static_cast<std::size_t>(m)];
  const Index nr = channel.n_ris;
  const Index L = static_cast<Index>(bs.count());
  const Index J = static_cast<Index>(ue.count());

  const CMatrix ar_ue = array_response_matrix(ue.dod_ris, eta, nr);
  const CMatrix ar_bs = array_response_matrix(bs.doa_ris, eta, nr);
  const CMatrix at = array_response_matrix(bs.dod_bs, eta, channel.n_tx);

  // Row-wise Kronecker of conj(A_R(ϑ)) and A_R(ψ): column j*L + l.
  CMatrix kr(nr, J * L);
  for (Index i = 0; i < nr; ++i)
    for (Index j = 0; j < J; ++j)
      for (Index l = 0; l < L; ++l)
        kr(i, j * L + l) = std::conj(ar_ue(i, j)) * ar_bs(i, l);

  const CVector &beta = channel.angle_excluded_ue[static_cast<std::size_t>(k)]
                                                 [static_cast<std::size_t>(m)];
  const CVector &sigma = channel.angle_excluded_bs[static_cast<std::size_t>(m)];
  CMatrix coupling = CMatrix::Zero(J * L, L);
  for (Index j = 0; j < J; ++j)
    for (Index l = 0; l < L; ++l)
      coupling(j * L + l, l) = beta(j) * sigma(l);

  return kr * coupling * at.adjoint();
}

std::vector<double> true_coupled_angles(const ChannelRealization &channel,
                                        int k) {
  const auto &bs = channel.paths_bs_ris;
  const auto &ue = channel.paths_ris_ue[static_cast<std::size_t>(k)];
  std::vector<double> out;
  for (double psi : bs.doa_ris)
    for (double theta : ue.dod_ris)
      out.push_back(psi - theta);
  return out;
}

} // namespace risce
