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

// Observation-operator kernels: dense Ψ = R̄Π, serial Kronecker, OpenMP
// Kronecker. Argument is the RIS grid size Q_R.

#include <map>

#include <benchmark/benchmark.h>

#include "risce/dictionary.hpp"
#include "risce/harness.hpp"
#include "risce/sounding.hpp"

using namespace risce;

namespace {

struct Fixture {
  std::shared_ptr<const ComplexOperator> serial, parallel, dense;
  CVector x, s;
};

const Fixture &fixture(int q_ris) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(q_ris);
  if (it != cache.end())
    return it->second;
  SystemConfig c;
  c.n_ris = q_ris / 2;
  c.q_ris = q_ris;
  c.n_users = 1;
  Rng rng(1);
  const PilotSchedule p = generate_pilots(c, rng);
  const double eta = 0.95;
  const CMatrix ct = build_bs_dictionary(c.q_tx, eta, c.n_tx);
  const CbsDictionary cbs = build_cbs_dictionary(c.q_ris, eta, c.n_ris);
  Fixture f;
  f.serial = observation_operator(p, ct, cbs.columns, false);
  f.parallel = observation_operator(p, ct, cbs.columns, true);
  f.dense = std::make_shared<DenseComplexOperator>(f.serial->dense());
  std::mt19937_64 g(2);
  std::normal_distribution<double> n;
  f.x = CVector::Zero(f.serial->cols());
  for (int k = 0; k < 9; ++k)
    f.x(static_cast<Index>(g() % static_cast<std::uint64_t>(f.x.size()))) = cd(n(g), n(g));
  f.s = CVector(f.serial->rows());
  for (auto &v : f.s)
    v = cd(n(g), n(g));
  return cache.emplace(q_ris, std::move(f)).first->second;
}

template <class Pick>
void apply_bench(benchmark::State &state, Pick pick) {
  const Fixture &f = fixture(static_cast<int>(state.range(0)));
  const ComplexOperator &op = *pick(f);
  for (auto _ : state)
    benchmark::DoNotOptimize(op.apply(f.x));
  state.counters["cols"] = static_cast<double>(op.cols());
}

template <class Pick>
void adjoint_bench(benchmark::State &state, Pick pick) {
  const Fixture &f = fixture(static_cast<int>(state.range(0)));
  const ComplexOperator &op = *pick(f);
  for (auto _ : state)
    benchmark::DoNotOptimize(op.adjoint(f.s));
}

void BM_ApplyDense(benchmark::State &s) { apply_bench(s, [](const Fixture &f) { return f.dense; }); }
void BM_ApplyKronSerial(benchmark::State &s) {
  apply_bench(s, [](const Fixture &f) { return f.serial; });
}
void BM_ApplyKronOmp(benchmark::State &s) {
  apply_bench(s, [](const Fixture &f) { return f.parallel; });
}
void BM_AdjointDense(benchmark::State &s) {
  adjoint_bench(s, [](const Fixture &f) { return f.dense; });
}
void BM_AdjointKronSerial(benchmark::State &s) {
  adjoint_bench(s, [](const Fixture &f) { return f.serial; });
}
void BM_AdjointKronOmp(benchmark::State &s) {
  adjoint_bench(s, [](const Fixture &f) { return f.parallel; });
}

void BM_Phase1Proposed(benchmark::State &state) {
  SystemConfig c;
  c.n_users = 1;
  c.n_sc = 32;
  c.q_ris = 64;
  Rng arng = analog_rng(1);
  const CMatrix w = draw_analog_beamformer(c, arng);
  Rng rng(3);
  const TrialData trial = simulate_trial(c, w, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(run_algorithm(Algorithm::proposed, trial, {}).nmse);
}

} // namespace

BENCHMARK(BM_ApplyDense)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyKronSerial)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyKronOmp)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdjointDense)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdjointKronSerial)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdjointKronOmp)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Phase1Proposed)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
