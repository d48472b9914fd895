#include "doctest.h"

#include <cmath>
#include <vector>

#include "hhlb/circuit.hpp"
#include "hhlb/gate_math.hpp"
#include "hhlb/rng.hpp"

using namespace hhlb;

namespace {

// |0><0| (x) I + |1><1| (x) u with the control as the top qubit.
MatrixXc controlled_oracle(const MatrixXc& u) {
  const Index d = u.rows();
  MatrixXc m = MatrixXc::Zero(2 * d, 2 * d);
  m.topLeftCorner(d, d).setIdentity();
  m.bottomRightCorner(d, d) = u;
  return m;
}

// Operator Schmidt rank of u across (qubits >= k) | (qubits < k).
int operator_schmidt_rank(const MatrixXc& u, int k) {
  const Index lo = Index{1} << k;
  const Index hi = u.rows() / lo;
  MatrixXc r(hi * hi, lo * lo);
  for (Index ih = 0; ih < hi; ++ih)
    for (Index jh = 0; jh < hi; ++jh)
      for (Index il = 0; il < lo; ++il)
        for (Index jl = 0; jl < lo; ++jl) r(ih * hi + jh, il * lo + jl) = u(ih * lo + il, jh * lo + jl);
  Eigen::JacobiSVD<MatrixXc> svd(r);
  int rank = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()[i] > 1e-8;
  return rank;
}

double max_diff(const MatrixXc& a, const MatrixXc& b) { return (a - b).cwiseAbs().maxCoeff(); }

std::size_t expected_sq(Family f, int n) {
  switch (f) {
    case Family::TP1: return static_cast<std::size_t>(n);
    case Family::TP2: return static_cast<std::size_t>(2 * n - 1);
    case Family::NTP: return n == 2 ? 5 : static_cast<std::size_t>(2 * n - 2);
  }
  return 0;
}

}  // namespace

TEST_CASE("zyz decomposition reproduces random unitaries") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    Matrix2c u = random_su2(rng) * std::polar(1.0, rng.uniform() * kTwoPi);
    CHECK(max_diff(u3_matrix(zyz_decompose(u)), u) < 1e-12);
  }
  for (const Matrix2c& u : {mat::x(), mat::z(), mat::h(), mat::s(), mat::identity(), Matrix2c(mat::y() * cplx(0, 1))}) {
    CHECK(max_diff(u3_matrix(zyz_decompose(u)), u) < 1e-12);
  }
}

TEST_CASE("circuit validation and counts") {
  Circuit c(3);
  CHECK_THROWS_AS(c.cnot(1, 1), Error);
  CHECK_THROWS_AS(c.sq(3, mat::h()), Error);
  c.sq(0, mat::h()).cnot(0, 1).sq(2, mat::x()).cnot(1, 2);
  CHECK(c.cnot_count() == 2);
  CHECK(c.sq_count() == 2);
  CHECK(c.depth() == 3);
  const MatrixXc u = unitary_of(c);
  CHECK(is_unitary(u));
  CHECK(max_diff(unitary_of(c.inverse()) * u, MatrixXc::Identity(8, 8)) < 1e-12);
}

TEST_CASE("cnot convention: qubit 0 is the low bit") {
  Circuit c(2);
  c.cnot(0, 1);
  const MatrixXc u = unitary_of(c);
  // |01> (index 1, qubit 0 set) -> |11>
  CHECK(std::abs(u(3, 1) - cplx(1)) < 1e-15);
  CHECK(std::abs(u(1, 3) - cplx(1)) < 1e-15);
  CHECK(std::abs(u(0, 0) - cplx(1)) < 1e-15);
}

TEST_CASE("json round trip preserves the unitary") {
  const auto fam = gen_family(Family::NTP, 4, 9);
  const Circuit back = circuit_from_json(nlohmann::json::parse(to_json(fam.unitary).dump()));
  CHECK(back.size() == fam.unitary.size());
  CHECK(max_diff(unitary_of(back), unitary_of(fam.unitary)) < 1e-12);
  CHECK(back.tags["family"] == "NTP");
}

TEST_CASE("controlled single-qubit gates match the block oracle") {
  Rng rng(4);
  auto check = [](const Matrix2c& u, std::size_t cnots) {
    Circuit c(2);
    append_controlled_sq(c, 1, 0, u);
    CHECK(c.cnot_count() == cnots);
    CHECK(max_diff(unitary_of(c), controlled_oracle(u)) < 1e-10);
  };
  for (int i = 0; i < 50; ++i) {
    check(random_su2(rng) * std::polar(1.0, rng.uniform() * kTwoPi), 2);
    check(involution(random_axis(rng)) * std::polar(1.0, rng.uniform() * kTwoPi), 1);
    check(Matrix2c::Identity() * std::polar(1.0, rng.uniform() * kTwoPi), 0);
  }
  check(mat::identity(), 0);
  check(mat::x(), 1);
  check(mat::z(), 1);
}

TEST_CASE("toffoli matches the permutation oracle") {
  Circuit c(3);
  append_toffoli(c, 2, 1, 0);
  CHECK(c.cnot_count() == 6);
  MatrixXc x = MatrixXc::Identity(4, 4);
  x.bottomRightCorner(2, 2) = mat::x();
  CHECK(max_diff(unitary_of(c), controlled_oracle(x)) < 1e-12);
}

TEST_CASE("family gate counts") {
  for (Family f : {Family::TP1, Family::TP2, Family::NTP}) {
    for (int n = min_width(f); n <= 12; ++n) {
      const auto fam = gen_family(f, n, 100 + static_cast<std::uint64_t>(n));
      CAPTURE(to_string(f));
      CAPTURE(n);
      CHECK(fam.unitary.sq_count() == expected_sq(f, n));
      CHECK(fam.unitary.n_qubits() == n);
    }
  }
  CHECK_THROWS_AS(gen_family(Family::TP2, 1, 0), Error);
  CHECK_THROWS_AS(gen_family(Family::NTP, 1, 0), Error);
  // once controlled, NTP costs strictly more CNOTs than TP2 at every width
  for (int n = 2; n <= 12; ++n) {
    const auto ntp = controlled_power(gen_family(Family::NTP, n, 1).unitary, 0, n);
    const auto tp2 = controlled_power(gen_family(Family::TP2, n, 1).unitary, 0, n);
    CHECK(ntp.cnot_count() > tp2.cnot_count());
  }
}

TEST_CASE("generation is deterministic in the seed") {
  const auto a = gen_family(Family::TP2, 5, 42);
  const auto b = gen_family(Family::TP2, 5, 42);
  const auto c = gen_family(Family::TP2, 5, 43);
  CHECK(to_json(a.unitary).dump() == to_json(b.unitary).dump());
  CHECK(to_json(a.unitary).dump() != to_json(c.unitary).dump());
}

TEST_CASE("family spectra and the squaring collapse") {
  for (Family f : {Family::TP1, Family::TP2, Family::NTP}) {
    for (int n = min_width(f); n <= 6; ++n) {
      for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        CAPTURE(to_string(f));
        CAPTURE(n);
        const auto fam = gen_family(f, n, seed);
        const MatrixXc u = unitary_of(fam.unitary);
        CHECK(is_unitary(u));

        // every eigenbasis column is an eigenvector with the stated phase
        const MatrixXc e = unitary_of(fam.spectrum.eigenbasis());
        const MatrixXc ue = u * e;
        double worst = 0;
        for (Index l = 0; l < u.rows(); ++l) {
          const cplx lam = std::polar(1.0, kTwoPi * fam.spectrum.phase(static_cast<std::uint64_t>(l)));
          worst = std::max(worst, (ue.col(l) - lam * e.col(l)).norm());
        }
        CHECK(worst < 1e-10);

        const auto distinct = fam.spectrum.distinct_numerators();
        if (n == 1) {
          CHECK(distinct == std::vector<std::uint64_t>{1, 3});
        } else {
          CHECK(distinct == std::vector<std::uint64_t>{1, 3, 5, 7});
        }

        // U^2 = U_c^2 on the correcting qubit, identity elsewhere
        const auto cg = correcting_gate(fam.unitary);
        Circuit sq(n);
        sq.sq(cg.qubit, Matrix2c(cg.matrix * cg.matrix));
        CHECK(max_diff(u * u, unitary_of(sq)) < 1e-10);
      }
    }
  }
}

TEST_CASE("TP1 is a tensor product of its single-qubit factors") {
  const auto fam = gen_family(Family::TP1, 4, 5);
  MatrixXc oracle = MatrixXc::Identity(1, 1);
  std::vector<Matrix2c> factor(4, Matrix2c::Identity());
  for (const Gate& g : fam.unitary.gates()) factor[static_cast<std::size_t>(g.target)] = g.matrix() * factor[static_cast<std::size_t>(g.target)];
  for (int q = 3; q >= 0; --q) {
    MatrixXc next(oracle.rows() * 2, oracle.cols() * 2);
    // high qubits first: kron(oracle, factor[q]) puts factor[q] lowest
    for (Index i = 0; i < oracle.rows(); ++i)
      for (Index j = 0; j < oracle.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = oracle(i, j) * factor[static_cast<std::size_t>(q)];
    oracle = next;
  }
  CHECK(max_diff(unitary_of(fam.unitary), oracle) < 1e-12);
  CHECK(fam.unitary.cnot_count() == 0);
}

TEST_CASE("entanglement structure of the families") {
  // TP2 with odd n: U_c alone, then pairs (1,2), (3,4)
  const MatrixXc tp2 = unitary_of(gen_family(Family::TP2, 5, 3).unitary);
  CHECK(operator_schmidt_rank(tp2, 1) == 1);
  CHECK(operator_schmidt_rank(tp2, 3) == 1);
  CHECK(operator_schmidt_rank(tp2, 2) > 1);
  const MatrixXc ntp = unitary_of(gen_family(Family::NTP, 5, 3).unitary);
  for (int k = 1; k < 5; ++k) CHECK(operator_schmidt_rank(ntp, k) > 1);
  const MatrixXc ntp2 = unitary_of(gen_family(Family::NTP, 2, 3).unitary);
  CHECK(operator_schmidt_rank(ntp2, 1) > 1);
}

TEST_CASE("controlled powers match the block oracle") {
  for (Family f : {Family::TP1, Family::TP2, Family::NTP}) {
    for (int n = min_width(f); n <= 4; ++n) {
      const auto fam = gen_family(f, n, 11);
      const MatrixXc u = unitary_of(fam.unitary);
      MatrixXc power = u;
      for (int s = 0; s <= 3; ++s) {
        CAPTURE(to_string(f));
        CAPTURE(n);
        CAPTURE(s);
        const Circuit cu = controlled_power(fam.unitary, s, n);
        CHECK(cu.n_qubits() == n + 1);
        CHECK(max_diff(unitary_of(cu), controlled_oracle(power)) < 1e-9);
        if (s == 1) CHECK(cu.cnot_count() == 1);
        if (s >= 2) CHECK(cu.cnot_count() == 0);
        power = (power * power).eval();
      }
    }
  }
  const auto tp1 = gen_family(Family::TP1, 6, 2);
  CHECK(controlled_power(tp1.unitary, 0, 6).cnot_count() == 7);
  CHECK_THROWS_AS(controlled_power(tp1.unitary, 0, 3), Error);
  // plain circuit: repeated controlled copies
  Circuit plain(2);
  plain.sq(0, mat::h()).cnot(0, 1).sq(1, mat::t());
  const MatrixXc up = unitary_of(plain);
  CHECK(max_diff(unitary_of(controlled_power(plain, 2, 2)), controlled_oracle(up * up * up * up)) < 1e-9);
}
