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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "risce/operators.hpp"
#include "support/oracles.hpp"

using namespace risce;

namespace {

// Row t*P + p of the reference is b.row(t*P + p) ⊗ c.row(t).
CMatrix kron_rows(const CMatrix &b, const CMatrix &c, int p) {
  CMatrix out(b.rows(), b.cols() * c.cols());
  for (Index r = 0; r < b.rows(); ++r)
    out.row(r) = oracle::kron(b.row(r), c.row(r / p)).row(0);
  return out;
}

RMatrix realified(const CMatrix &a) {
  const Index m = a.rows(), n = a.cols();
  RMatrix r(2 * m, 2 * n);
  r << a.real(), -a.imag(), a.imag(), a.real();
  return r;
}

} // namespace

TEST_CASE("Kronecker operator matches its dense expansion") {
  std::mt19937_64 rng(31);
  const int t = 5, p = 3, qo = 4, qi = 6;
  const CMatrix b = oracle::random_cmatrix(t * p, qo, rng);
  const CMatrix c = oracle::random_cmatrix(t, qi, rng);
  const CMatrix ref = kron_rows(b, c, p);

  for (bool parallel : {false, true}) {
    CAPTURE(parallel);
    const KronOperator op(b, c, p, parallel);
    CHECK(op.rows() == t * p);
    CHECK(op.cols() == qo * qi);
    CHECK(oracle::rel_err(kron_dense(op), ref) < 1e-14);
    CHECK(oracle::rel_err(op.dense(), ref) < 1e-13);

    const CVector x = oracle::random_cvector(qo * qi, rng);
    const CVector s = oracle::random_cvector(t * p, rng);
    CHECK(oracle::rel_err(op.apply(x), ref * x) < 1e-13);
    CHECK(oracle::rel_err(op.adjoint(s), ref.adjoint() * s) < 1e-13);
    for (Index j : {Index(0), Index(7), Index(qo * qi - 1)})
      CHECK(oracle::rel_err(op.column(j), ref.col(j)) < 1e-14);

    const RMatrix abs2 = ref.cwiseAbs2();
    const CMatrix sq = ref.cwiseProduct(ref);
    const RVector v = RVector::Random(qo * qi);
    const RVector u = RVector::Random(t * p);
    CHECK((op.apply_abs2(v) - abs2 * v).norm() < 1e-12 * (abs2 * v).norm());
    CHECK((op.adjoint_abs2(u) - abs2.transpose() * u).norm() <
          1e-12 * (abs2.transpose() * u).norm());
    CHECK(oracle::rel_err(op.apply_sq(v), sq * v.cast<cd>()) < 1e-12);
    CHECK(oracle::rel_err(op.adjoint_sq(u), sq.adjoint() * u.cast<cd>()) < 1e-12);

    const RVector norms = op.column_norms();
    for (Index j = 0; j < ref.cols(); ++j)
      CHECK(norms(j) == doctest::Approx(ref.col(j).norm()));
  }
}

TEST_CASE("serial and parallel Kronecker paths agree") {
  std::mt19937_64 rng(8);
  const CMatrix b = oracle::random_cmatrix(40 * 6, 8, rng);
  const CMatrix c = oracle::random_cmatrix(40, 15, rng);
  const KronOperator ser(b, c, 6, false), par(b, c, 6, true);
  const CVector x = oracle::random_cvector(120, rng);
  const CVector s = oracle::random_cvector(240, rng);
  CHECK(oracle::rel_err(par.apply(x), ser.apply(x)) < 1e-14);
  CHECK(oracle::rel_err(par.adjoint(s), ser.adjoint(s)) < 1e-14);
}

TEST_CASE("dense complex operator") {
  std::mt19937_64 rng(2);
  const CMatrix a = oracle::random_cmatrix(7, 5, rng);
  const DenseComplexOperator op(a);
  const CVector x = oracle::random_cvector(5, rng);
  const CVector s = oracle::random_cvector(7, rng);
  CHECK(oracle::rel_err(op.apply(x), a * x) < 1e-14);
  CHECK(oracle::rel_err(op.adjoint(s), a.adjoint() * s) < 1e-14);
  const RVector v = RVector::Random(5);
  CHECK((op.apply_abs2(v) - a.cwiseAbs2() * v).norm() < 1e-13);
  CHECK(oracle::rel_err(op.apply_sq(v), a.cwiseProduct(a) * v.cast<cd>()) < 1e-13);
}

TEST_CASE("real form") {
  std::mt19937_64 rng(4);
  const CMatrix a = oracle::random_cmatrix(6, 4, rng);
  const RMatrix ref = realified(a);
  CHECK((real_form_matrix(a) - ref).norm() < 1e-15);

  const auto op = std::make_shared<DenseComplexOperator>(a);
  const RealFormOperator rf(op);
  CHECK(rf.rows() == 12);
  CHECK(rf.cols() == 8);
  const RVector x = RVector::Random(8);
  const RVector s = RVector::Random(12);
  CHECK((rf.apply(x) - ref * x).norm() < 1e-13);
  CHECK((rf.adjoint(s) - ref.transpose() * s).norm() < 1e-13);
  const RMatrix abs2 = ref.cwiseAbs2();
  const RVector v = RVector::Random(8).cwiseAbs();
  const RVector u = RVector::Random(12).cwiseAbs();
  CHECK((rf.apply_abs2(v) - abs2 * v).norm() < 1e-12);
  CHECK((rf.adjoint_abs2(u) - abs2.transpose() * u).norm() < 1e-12);

  const CVector z = oracle::random_cvector(4, rng);
  const RVector r = stack_real(z);
  CHECK(r.size() == 8);
  CHECK(r(0) == z(0).real());
  CHECK(r(4) == z(0).imag());
  CHECK((unstack_real(r) - z).norm() == 0.0);
  // Realification is an isomorphism of the linear map.
  CHECK((ref * stack_real(z) - stack_real(a * z)).norm() < 1e-13);
}
