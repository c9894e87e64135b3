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

#include "risce/operators.hpp"

#include "risce/errors.hpp"

namespace risce {

RVector ComplexOperator::column_norms() const {
  RVector n(cols());
  for (Index j = 0; j < cols(); ++j)
    n(j) = column(j).norm();
  return n;
}

CMatrix ComplexOperator::dense() const {
  CMatrix a(rows(), cols());
  for (Index j = 0; j < cols(); ++j)
    a.col(j) = column(j);
  return a;
}

// ---------------------------------------------------------------- dense

DenseComplexOperator::DenseComplexOperator(CMatrix a) : a_(std::move(a)) {
  abs2_ = a_.cwiseAbs2();
  sq_ = a_.array().square().matrix();
}

CVector DenseComplexOperator::apply(const CVector &x) const { return a_ * x; }

CVector DenseComplexOperator::adjoint(const CVector &s) const {
  return a_.adjoint() * s;
}

RVector DenseComplexOperator::apply_abs2(const RVector &v) const {
  return abs2_ * v;
}

RVector DenseComplexOperator::adjoint_abs2(const RVector &u) const {
  return abs2_.transpose() * u;
}

CVector DenseComplexOperator::apply_sq(const RVector &v) const {
  return sq_ * v.cast<cd>();
}

CVector DenseComplexOperator::adjoint_sq(const RVector &u) const {
  return sq_.adjoint() * u.cast<cd>();
}

// ---------------------------------------------------------------- kron

KronOperator::KronOperator(CMatrix b, CMatrix c, int n_slots, bool parallel)
    : b_(std::move(b)), c_(std::move(c)), n_slots_(n_slots),
      parallel_(parallel) {
  if (n_slots < 1 || b_.rows() != c_.rows() * n_slots)
    throw InvalidArgument("kron operator: outer factor must have T*P rows");
  b_abs2_ = b_.cwiseAbs2();
  c_abs2_ = c_.cwiseAbs2();
  b_sq_ = b_.array().square().matrix();
  c_sq_ = c_.array().square().matrix();
}

template <class Scalar, class Vec>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> KronOperator::apply_impl(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &b,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &c,
    const Vec &x) const {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (x.size() != cols())
    throw InvalidArgument("kron operator: input length mismatch");
  const Index n_in = c.cols();
  const Index n_out = b.cols();
  const Index n_t = c.rows();
  const Mat xs = x.template cast<Scalar>();
  const Eigen::Map<const Mat> xm(xs.data(), n_in, n_out);
  const Mat z = c * xm; // T x Q_outer
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y(b.rows());
  const Index p = n_slots_;
#pragma omp parallel for if (parallel_ && n_t > 1)
  for (Index t = 0; t < n_t; ++t)
    y.segment(t * p, p).noalias() = b.middleRows(t * p, p) * z.row(t).transpose();
  return y;
}

template <class Scalar, class Vec>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> KronOperator::adjoint_impl(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &b,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &c,
    const Vec &s) const {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (s.size() != rows())
    throw InvalidArgument("kron operator: input length mismatch");
  const Index n_t = c.rows();
  const Index p = n_slots_;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ss = s.template cast<Scalar>();
  Mat w(n_t, b.cols());
#pragma omp parallel for if (parallel_ && n_t > 1)
  for (Index t = 0; t < n_t; ++t)
    w.row(t).noalias() =
        (b.middleRows(t * p, p).adjoint() * ss.segment(t * p, p)).transpose();
  const Mat xa = c.adjoint() * w; // Q_inner x Q_outer
  return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(xa.data(),
                                                                    xa.size());
}

CVector KronOperator::apply(const CVector &x) const {
  return apply_impl<cd>(b_, c_, x);
}

CVector KronOperator::adjoint(const CVector &s) const {
  return adjoint_impl<cd>(b_, c_, s);
}

CVector KronOperator::column(Index j) const {
  const Index qi = j % c_.cols();
  const Index qo = j / c_.cols();
  CVector col(rows());
  const Index p = n_slots_;
  for (Index t = 0; t < c_.rows(); ++t)
    col.segment(t * p, p) = b_.col(qo).segment(t * p, p) * c_(t, qi);
  return col;
}

RVector KronOperator::apply_abs2(const RVector &v) const {
  return apply_impl<double>(b_abs2_, c_abs2_, v);
}

RVector KronOperator::adjoint_abs2(const RVector &u) const {
  // real factors: adjoint equals transpose
  return adjoint_impl<double>(b_abs2_, c_abs2_, u);
}

CVector KronOperator::apply_sq(const RVector &v) const {
  return apply_impl<cd>(b_sq_, c_sq_, v);
}

CVector KronOperator::adjoint_sq(const RVector &u) const {
  return adjoint_impl<cd>(b_sq_, c_sq_, u);
}

CMatrix kron_dense(const KronOperator &op) {
  const CMatrix &b = op.outer();
  const CMatrix &c = op.inner();
  const Index p = op.n_slots();
  CMatrix a(op.rows(), op.cols());
  for (Index t = 0; t < c.rows(); ++t)
    for (Index pp = 0; pp < p; ++pp) {
      const Index r = t * p + pp;
      for (Index qo = 0; qo < b.cols(); ++qo)
        for (Index qi = 0; qi < c.cols(); ++qi)
          a(r, qo * c.cols() + qi) = b(r, qo) * c(t, qi);
    }
  return a;
}

// ---------------------------------------------------------------- real

DenseRealOperator::DenseRealOperator(RMatrix a) : a_(std::move(a)) {
  abs2_ = a_.cwiseAbs2();
}

RealFormOperator::RealFormOperator(std::shared_ptr<const ComplexOperator> op)
    : op_(std::move(op)) {
  if (!op_)
    throw InvalidArgument("real form of a null operator");
}

RVector RealFormOperator::apply(const RVector &x) const {
  return stack_real(op_->apply(unstack_real(x)));
}

RVector RealFormOperator::adjoint(const RVector &s) const {
  return stack_real(op_->adjoint(unstack_real(s)));
}

// (Re A)^2 = (|A|^2 + Re(A∘A))/2 and (Im A)^2 = (|A|^2 - Re(A∘A))/2.
RVector RealFormOperator::apply_abs2(const RVector &v) const {
  const Index n = op_->cols();
  const RVector v1 = v.head(n);
  const RVector v2 = v.tail(n);
  const RVector s = op_->apply_abs2(v1 + v2);
  const RVector q = op_->apply_sq(v1 - v2).real();
  RVector out(2 * op_->rows());
  out << 0.5 * (s + q), 0.5 * (s - q);
  return out;
}

RVector RealFormOperator::adjoint_abs2(const RVector &u) const {
  const Index m = op_->rows();
  const RVector u1 = u.head(m);
  const RVector u2 = u.tail(m);
  const RVector s = op_->adjoint_abs2(u1 + u2);
  const RVector q = op_->adjoint_sq(u1 - u2).real();
  RVector out(2 * op_->cols());
  out << 0.5 * (s + q), 0.5 * (s - q);
  return out;
}

RVector stack_real(const CVector &z) {
  RVector r(2 * z.size());
  r << z.real(), z.imag();
  return r;
}

CVector unstack_real(const RVector &r) {
  if (r.size() % 2 != 0)
    throw InvalidArgument("real-form vector must have even length");
  const Index n = r.size() / 2;
  CVector z(n);
  z.real() = r.head(n);
  z.imag() = r.tail(n);
  return z;
}

RMatrix real_form_matrix(const CMatrix &a) {
  const Index m = a.rows();
  const Index n = a.cols();
  RMatrix r(2 * m, 2 * n);
  r.topLeftCorner(m, n) = a.real();
  r.topRightCorner(m, n) = -a.imag();
  r.bottomLeftCorner(m, n) = a.imag();
  r.bottomRightCorner(m, n) = a.real();
  return r;
}

} // namespace risce
