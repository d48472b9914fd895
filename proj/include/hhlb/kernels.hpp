#pragma once

#include <algorithm>
#include <utility>

#include "hhlb/circuit.hpp"

namespace hhlb::kernels {

// Stride kernels over the row index of any dense Eigen expression, so the
// same code drives state vectors (one column) and unitary builds (2^n columns).

template <typename Derived>
inline constexpr bool is_plain_vector = Derived::ColsAtCompileTime == 1 && requires(Derived& d) { d.data(); };

template <typename Derived, typename Real = typename Derived::RealScalar>
void apply_sq(Eigen::MatrixBase<Derived>& m, int q, const CMatrix2<Real>& u) {
  const Index stride = Index{1} << q;
  const Index rows = m.rows();
  const auto u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  if constexpr (is_plain_vector<Derived>) {
    auto* a = m.derived().data();
    for (Index base = 0; base < rows; base += 2 * stride) {
      auto* lo = a + base;
      auto* hi = lo + stride;
      for (Index i = 0; i < stride; ++i) {
        const auto a0 = lo[i];
        const auto a1 = hi[i];
        lo[i] = u00 * a0 + u01 * a1;
        hi[i] = u10 * a0 + u11 * a1;
      }
    }
    return;
  }
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index base = 0; base < rows; base += 2 * stride) {
      for (Index i = base; i < base + stride; ++i) {
        const auto a0 = m(i, c);
        const auto a1 = m(i + stride, c);
        m(i, c) = u00 * a0 + u01 * a1;
        m(i + stride, c) = u10 * a0 + u11 * a1;
      }
    }
  }
}

/// Spreads r over the index bits, leaving zeros at bit positions lo < hi.
inline Index insert_two_zero_bits(Index r, int lo, int hi) {
  const Index lo_mask = (Index{1} << lo) - 1;
  r = ((r & ~lo_mask) << 1) | (r & lo_mask);
  const Index hi_mask = (Index{1} << hi) - 1;
  return ((r & ~hi_mask) << 1) | (r & hi_mask);
}

template <typename Derived>
void apply_cnot(Eigen::MatrixBase<Derived>& m, int control, int target) {
  const Index cbit = Index{1} << control;
  const Index tbit = Index{1} << target;
  const int lo = std::min(control, target);
  const int hi = std::max(control, target);
  const Index quarter = m.rows() / 4;
  if constexpr (is_plain_vector<Derived>) {
    auto* a = m.derived().data();
    for (Index r = 0; r < quarter; ++r) {
      const Index i = insert_two_zero_bits(r, lo, hi) | cbit;
      std::swap(a[i], a[i | tbit]);
    }
    return;
  }
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < quarter; ++r) {
      const Index i = insert_two_zero_bits(r, lo, hi) | cbit;
      std::swap(m(i, c), m(i | tbit, c));
    }
  }
}

template <typename Derived>
void apply_gate(Eigen::MatrixBase<Derived>& m, const Gate& g) {
  if (g.is_cnot()) {
    apply_cnot(m, g.control, g.target);
  } else {
    apply_sq(m, g.target, g.matrix());
  }
}

template <typename Derived>
void apply_circuit(Eigen::MatrixBase<Derived>& m, const Circuit& c) {
  for (const Gate& g : c.gates()) apply_gate(m, g);
}

}  // namespace hhlb::kernels
