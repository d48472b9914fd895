#include "doctest.h"

#include <cmath>

#include "hhlb/hhl.hpp"
#include "hhlb/sim.hpp"
#include "test_helpers.hpp"

using namespace hhlb;

namespace {

// (log U / 2 pi i) built by Lagrange interpolation over the known distinct
// eigenvalues, then an LU solve.  Uses no eigenvectors.
VectorXc lagrange_solve(const MatrixXc& u, const std::vector<double>& phases, const VectorXc& b) {
  const Index d = u.rows();
  const MatrixXc id = MatrixXc::Identity(d, d);
  MatrixXc log_u = MatrixXc::Zero(d, d);
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const cplx mu_k = std::polar(1.0, kTwoPi * phases[k]);
    MatrixXc proj = id;
    for (std::size_t j = 0; j < phases.size(); ++j) {
      if (j == k) continue;
      const cplx mu_j = std::polar(1.0, kTwoPi * phases[j]);
      proj = (proj * (u - mu_j * id) / (mu_k - mu_j)).eval();
    }
    log_u += phases[k] * proj;
  }
  VectorXc x = log_u.fullPivLu().solve(b);
  return x / x.norm();
}

std::vector<double> family_phases(const Spectrum& s) {
  std::vector<double> out;
  for (auto k : s.distinct_numerators()) out.push_back(std::ldexp(static_cast<double>(k), -s.p_full()));
  return out;
}

Circuit diag_circuit(double a, double b) {
  Matrix2c d = Matrix2c::Zero();
  d(0, 0) = std::polar(1.0, kTwoPi * a);
  d(1, 1) = std::polar(1.0, kTwoPi * b);
  Circuit c(1);
  c.sq(0, d);
  return c;
}

double overlap(const StateVector& a, const StateVector& b) { return state_fidelity(a, b); }

}  // namespace

TEST_CASE("classical_solve on diagonal examples") {
  MatrixXc u = MatrixXc::Zero(2, 2);
  u(0, 0) = std::polar(1.0, kTwoPi * 0.25);
  u(1, 1) = std::polar(1.0, kTwoPi * 0.5);
  const auto x0 = classical_solve(u, StateVector::basis(1, 0));
  CHECK(std::abs(std::abs(x0[0]) - 1.0) < 1e-12);
  VectorXc b(2);
  b << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  const auto x = classical_solve(u, StateVector(1, b));
  CHECK(std::abs(x[0] - cplx(2 / std::sqrt(5.0))) < 1e-12);
  CHECK(std::abs(x[1] - cplx(1 / std::sqrt(5.0))) < 1e-12);

  CHECK_THROWS_AS(classical_solve(MatrixXc::Identity(2, 2), StateVector::basis(1)), Error);
  MatrixXc bad = MatrixXc::Identity(2, 2) * 2.0;
  CHECK_THROWS_AS(classical_solve(bad, StateVector::basis(1)), Error);
}

TEST_CASE("classical_solve agrees with the interpolation oracle") {
  Rng rng(3);
  for (Family f : {Family::TP1, Family::TP2, Family::NTP}) {
    for (int n : {2, 3, 4}) {
      const auto fam = gen_family(f, n, 10 + static_cast<std::uint64_t>(n));
      const MatrixXc u = unitary_of(fam.unitary);
      const auto b = testing::random_state(n, rng);
      const VectorXc oracle = lagrange_solve(u, family_phases(fam.spectrum), b.amps());
      const StateVector o(n, oracle);
      CHECK(overlap(classical_solve(u, b), o) > 1 - 1e-9);
      CHECK(overlap(classical_solve(fam.spectrum, b), o) > 1 - 1e-9);
    }
  }
  const auto tp1 = gen_family(Family::TP1, 3, 1);
  const VectorXc oracle = lagrange_solve(unitary_of(tp1.unitary), family_phases(tp1.spectrum), StateVector::basis(3).amps());
  CHECK(overlap(classical_solve(unitary_of(tp1.unitary), StateVector::basis(3)), StateVector(3, oracle)) > 1 - 1e-9);
}

TEST_CASE("phase register planning") {
  const auto fam = gen_family(Family::TP1, 1, 0);
  const auto full = build_hhl(fam.unitary, fam.spectrum, 3, false);
  CHECK(full.layout.n_qubits() == 5);
  CHECK(full.layout.p == 3);
  CHECK(full.layout.fixed_bits.empty());
  const auto hyb = build_hhl(fam.unitary, fam.spectrum, 3, true);
  CHECK(hyb.layout.p == 2);
  CHECK(hyb.layout.n_qubits() == 4);
  CHECK(hyb.layout.fixed_bits == std::map<int, int>{{0, 1}});

  // {1/4, 1/2}: bits 01 and 10 share nothing
  const auto none = Spectrum::from_table(2, {1, 2});
  try {
    plan_phase_register(none, 0, true);
    FAIL("expected no-constant-bit error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoConstantBit);
  }
  // {1/4, 3/4}: the low bit is constant, one phase qubit suffices
  const auto odd = plan_phase_register(Spectrum::from_table(2, {1, 3}), 0, true);
  CHECK(odd.p == 1);
  CHECK(odd.fixed_bits == std::map<int, int>{{0, 1}});

  CHECK_THROWS_AS(plan_phase_register(fam.spectrum, 2, false), Error);
  CHECK_THROWS_AS(plan_phase_register(fam.spectrum, 1, true), Error);
}

TEST_CASE("multiplexed Ry matches the block oracle") {
  Rng rng(6);
  for (int k = 0; k <= 3; ++k) {
    std::vector<int> controls;
    for (int i = 0; i < k; ++i) controls.push_back(i);
    std::vector<double> angles(dim_of(k));
    for (double& a : angles) a = (rng.uniform() - 0.5) * 4 * kPi;
    Circuit c(k + 1);
    append_multiplexed_ry(c, controls, k, angles);
    CHECK(c.cnot_count() == (k == 0 ? 0 : dim_of(k)));
    const Index d = static_cast<Index>(dim_of(k));
    MatrixXc oracle = MatrixXc::Zero(2 * d, 2 * d);
    for (Index m = 0; m < d; ++m) {
      const Matrix2c r = mat::ry(angles[static_cast<std::size_t>(m)]);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) oracle(a * d + m, b * d + m) = r(a, b);
    }
    CHECK((unitary_of(c) - oracle).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("qpe_only reads dyadic phases exactly") {
  const auto c = diag_circuit(3.0 / 8, 1.0 / 8);
  const auto spec = Spectrum::from_table(3, {3, 1});
  const auto d3 = qpe_only(c, spec, 3, 0);
  CHECK(d3[3] > 1 - 1e-9);  // 011
  const auto d1 = qpe_only(c, spec, 3, 1);
  CHECK(d1[1] > 1 - 1e-9);  // 001
  const auto d4 = qpe_only(c, spec, 4, 0);
  CHECK(d4[6] > 1 - 1e-9);  // 0110
  CHECK_THROWS_AS(qpe_only(c, spec, 0, 0), Error);
  CHECK_THROWS_AS(qpe_only(c, spec, 2, 0), Error);

  for (Family f : {Family::TP1, Family::NTP}) {
    const auto fam = gen_family(f, 3, 2);
    for (std::uint64_t l = 0; l < 8; ++l) {
      const auto d = qpe_only(fam.unitary, fam.spectrum, 3, l);
      CHECK(d[static_cast<Index>(fam.spectrum.numerator(l))] > 1 - 1e-9);
    }
  }
}

TEST_CASE("eigenvector input: success probability is (C/lambda)^2") {
  const auto one = diag_circuit(1.0 / 8, 3.0 / 8);
  const auto rep1 = run_hhl(build_hhl(one, Spectrum::from_table(3, {1, 3}), 3, false));
  CHECK(rep1.success_prob == doctest::Approx(1.0).epsilon(1e-12));
  const auto three = diag_circuit(3.0 / 8, 1.0 / 8);
  const auto rep3 = run_hhl(build_hhl(three, Spectrum::from_table(3, {3, 1}), 3, false));
  CHECK(rep3.success_prob == doctest::Approx(1.0 / 9).epsilon(1e-12));
  CHECK(rep3.fidelity > 1 - 1e-12);
}

TEST_CASE("hybrid plan with a fixed low bit of value one") {
  // numerators 5 = 101, 7 = 111: bit 0 is fixed, bits 1-2 form the register
  Circuit c = diag_circuit(5.0 / 8, 7.0 / 8);
  Circuit h(1);
  h.sq(0, mat::h());
  Circuit u(1);
  u.append(h).append(c).append(h);
  const auto spec = Spectrum::from_table(3, {5, 7}, h);
  const auto plan = plan_phase_register(spec, 0, true);
  CHECK(plan.p == 2);
  CHECK(plan.window_start == 1);
  CHECK(plan.fixed_value == 1);
  CHECK(plan.low_fixed == 1);
  // numerators 1 = 001, 2 = 010: only the top bit is constant
  const auto top = plan_phase_register(Spectrum::from_table(3, {1, 2}), 0, true);
  CHECK(top.p == 2);
  CHECK(top.window_start == 0);
  CHECK(top.fixed_bits == std::map<int, int>{{2, 0}});
  const auto hyb = run_hhl(build_hhl(u, spec, 0, true));
  const auto full = run_hhl(build_hhl(u, spec, 3, false));
  CHECK(hyb.fidelity > 1 - 1e-9);
  CHECK(full.fidelity > 1 - 1e-9);
  CHECK(hyb.success_prob == doctest::Approx(full.success_prob).epsilon(1e-9));

  // high bit fixed: numerators 1 and 2
  Circuit u2(1);
  u2.append(h).append(diag_circuit(1.0 / 8, 2.0 / 8)).append(h);
  const auto spec2 = Spectrum::from_table(3, {1, 2}, h);
  const auto r2 = run_hhl(build_hhl(u2, spec2, 0, true));
  CHECK(r2.fidelity > 1 - 1e-9);
  CHECK(r2.success_prob == doctest::Approx(0.5 * (1.0 + 0.25)).epsilon(1e-9));
}

TEST_CASE("H-HHL reproduces the oracle for every family") {
  for (Family f : {Family::TP1, Family::TP2, Family::NTP}) {
    for (int n = min_width(f); n <= 4; ++n) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        CAPTURE(to_string(f));
        CAPTURE(n);
        const auto fam = gen_family(f, n, seed);
        const auto full = build_hhl(fam.unitary, fam.spectrum, 3, false);
        const auto hyb = build_hhl(fam.unitary, fam.spectrum, 3, true);
        CHECK(hyb.qpe_gate_count < full.qpe_gate_count);
        const auto rf = run_hhl(full);
        const auto rh = run_hhl(hyb);
        CHECK(rf.fidelity > 1 - 1e-9);
        CHECK(rh.fidelity > 1 - 1e-9);
        CHECK(overlap(rf.solution_state, rh.solution_state) > 1 - 1e-9);

        // success probability from the dense eigendecomposition
        const auto ep = eigenphases(unitary_of(fam.unitary));
        const VectorXc coeff = ep.vectors.adjoint() * StateVector::basis(n).amps();
        double expect = 0.0;
        for (Index j = 0; j < coeff.size(); ++j) expect += std::norm(coeff[j]) * std::pow(0.125 / ep.phases[j], 2);
        CHECK(rf.success_prob == doctest::Approx(expect).epsilon(1e-9));
        CHECK(rh.success_prob == doctest::Approx(expect).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("run_hhl through the sfa backend") {
  const auto fam = gen_family(Family::TP2, 3, 5);
  const auto prog = build_hhl(fam.unitary, fam.spectrum, 0, true);
  Backend sfa = [](const Circuit& c, const StateVector& s) {
    SfaOptions opts;
    opts.max_k = 16;
    return sfa_run(c, find_cut(c), s, opts);
  };
  CHECK(run_hhl(prog, sfa).fidelity > 1 - 1e-9);
}
