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

#include <memory>

#include "risce/types.hpp"

namespace risce {

/// Complex linear map with the elementwise-squared products GAMP needs.
class ComplexOperator {
public:
  virtual ~ComplexOperator() = default;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual CVector apply(const CVector &x) const = 0;
  virtual CVector adjoint(const CVector &s) const = 0;
  virtual CVector column(Index j) const = 0;
  /// |A|^2 v and (|A|^2)^T u.
  virtual RVector apply_abs2(const RVector &v) const = 0;
  virtual RVector adjoint_abs2(const RVector &u) const = 0;
  /// (A∘A) v and (A∘A)^H u for real v, u.
  virtual CVector apply_sq(const RVector &v) const = 0;
  virtual CVector adjoint_sq(const RVector &u) const = 0;

  RVector column_norms() const;
  CMatrix dense() const;
};

class DenseComplexOperator final : public ComplexOperator {
public:
  explicit DenseComplexOperator(CMatrix a);
  Index rows() const override { return a_.rows(); }
  Index cols() const override { return a_.cols(); }
  CVector apply(const CVector &x) const override;
  CVector adjoint(const CVector &s) const override;
  CVector column(Index j) const override { return a_.col(j); }
  RVector apply_abs2(const RVector &v) const override;
  RVector adjoint_abs2(const RVector &u) const override;
  CVector apply_sq(const RVector &v) const override;
  CVector adjoint_sq(const RVector &u) const override;
  const CMatrix &matrix() const { return a_; }

private:
  CMatrix a_;
  RMatrix abs2_;
  CMatrix sq_;
};

/// Observation matrix whose row (t, p) is b_{t,p}^T ⊗ c_t.
///
/// `b` is (T*P) x Q_outer with row t*P + p, `c` is T x Q_inner. Column
/// index is q_outer*Q_inner + q_inner. This is R̄·(conj(C_T) ⊗ Ξ) with
/// b = R^T conj(C_T) and c = Θ·Ξ.
class KronOperator final : public ComplexOperator {
public:
  KronOperator(CMatrix b, CMatrix c, int n_slots, bool parallel = true);
  Index rows() const override { return b_.rows(); }
  Index cols() const override { return b_.cols() * c_.cols(); }
  CVector apply(const CVector &x) const override;
  CVector adjoint(const CVector &s) const override;
  CVector column(Index j) const override;
  RVector apply_abs2(const RVector &v) const override;
  RVector adjoint_abs2(const RVector &u) const override;
  CVector apply_sq(const RVector &v) const override;
  CVector adjoint_sq(const RVector &u) const override;

  const CMatrix &outer() const { return b_; }
  const CMatrix &inner() const { return c_; }
  int n_slots() const { return n_slots_; }

private:
  template <class Scalar, class Vec>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1>
  apply_impl(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &b,
             const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &c,
             const Vec &x) const;
  template <class Scalar, class Vec>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1>
  adjoint_impl(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &b,
               const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &c,
               const Vec &s) const;

  CMatrix b_, c_;
  RMatrix b_abs2_, c_abs2_;
  CMatrix b_sq_, c_sq_;
  int n_slots_;
  bool parallel_;
};

/// Explicit matrix of a KronOperator, row by row. Serial reference.
CMatrix kron_dense(const KronOperator &op);

/// Real linear map with the elementwise-squared products used by GAMP.
class RealOperator {
public:
  virtual ~RealOperator() = default;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual RVector apply(const RVector &x) const = 0;
  virtual RVector adjoint(const RVector &s) const = 0;
  virtual RVector apply_abs2(const RVector &v) const = 0;
  virtual RVector adjoint_abs2(const RVector &u) const = 0;
};

class DenseRealOperator final : public RealOperator {
public:
  explicit DenseRealOperator(RMatrix a);
  Index rows() const override { return a_.rows(); }
  Index cols() const override { return a_.cols(); }
  RVector apply(const RVector &x) const override { return a_ * x; }
  RVector adjoint(const RVector &s) const override {
    return a_.transpose() * s;
  }
  RVector apply_abs2(const RVector &v) const override { return abs2_ * v; }
  RVector adjoint_abs2(const RVector &u) const override {
    return abs2_.transpose() * u;
  }
  const RMatrix &matrix() const { return a_; }

private:
  RMatrix a_;
  RMatrix abs2_;
};

/// The real form [[Re A, -Im A], [Im A, Re A]] of a complex operator.
class RealFormOperator final : public RealOperator {
public:
  explicit RealFormOperator(std::shared_ptr<const ComplexOperator> op);
  Index rows() const override { return 2 * op_->rows(); }
  Index cols() const override { return 2 * op_->cols(); }
  RVector apply(const RVector &x) const override;
  RVector adjoint(const RVector &s) const override;
  RVector apply_abs2(const RVector &v) const override;
  RVector adjoint_abs2(const RVector &u) const override;
  const ComplexOperator &complex() const { return *op_; }

private:
  std::shared_ptr<const ComplexOperator> op_;
};

/// [Re; Im] stacking and its inverse.
RVector stack_real(const CVector &z);
CVector unstack_real(const RVector &r);

/// [[Re A, -Im A], [Im A, Re A]].
RMatrix real_form_matrix(const CMatrix &a);

} // namespace risce
