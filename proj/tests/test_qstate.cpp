#include "doctest.h"

#include <cmath>
#include <vector>

#include "hhlb/qstate.hpp"
#include "hhlb/rng.hpp"

using namespace hhlb;

namespace {

StateVector random_state(int n, Rng& rng) {
  VectorXc v(static_cast<Index>(dim_of(n)));
  for (Index i = 0; i < v.size(); ++i) v[i] = cplx(rng.normal(), rng.normal());
  return StateVector(n, v).normalized();
}

}  // namespace

TEST_CASE("state vector construction validates dimension") {
  CHECK_THROWS_AS(StateVector(2, VectorXc::Zero(3)), Error);
  CHECK_THROWS_AS(StateVector::from_amplitudes(VectorXc::Zero(6)), Error);
  const auto s = StateVector::basis(3, 5);
  CHECK(s.dim() == 8);
  CHECK(std::abs(s[5] - cplx(1.0)) < 1e-15);
  CHECK_THROWS_AS(StateVector(1, VectorXc::Zero(2)).normalized(), Error);
}

TEST_CASE("probabilities sum to one") {
  Rng rng(7);
  const auto s = random_state(4, rng);
  CHECK(s.probabilities().sum() == doctest::Approx(1.0).epsilon(1e-12));
  const auto pd = ProbDist::from_state(s);
  CHECK(pd.is_normalized());
  CHECK_THROWS_AS(ProbDist(Eigen::VectorXd::Zero(4), false).normalized(), Error);
  Eigen::VectorXd neg(2);
  neg << -0.1, 1.1;
  CHECK_THROWS_AS(ProbDist{neg}, Error);
}

TEST_CASE("partial trace of a product state recovers the factors") {
  Rng rng(11);
  const auto a = random_state(2, rng);
  const auto b = random_state(1, rng);
  const auto ab = kron(a, b);  // a on qubits 1,2; b on qubit 0
  const auto rho = DensityMatrix::from_pure(ab);
  const std::vector<int> keep_b{0};
  const auto rb = partial_trace(rho, keep_b);
  CHECK(state_fidelity(b, rb) == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<int> keep_a{1, 2};
  const auto ra = partial_trace(rho, keep_a);
  CHECK(state_fidelity(a, ra) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ra.is_physical());

  // reordering: keep {2,1} swaps the two qubits of a
  const std::vector<int> swapped{2, 1};
  const auto rs = partial_trace(rho, swapped);
  VectorXc sw(4);
  sw << a[0], a[2], a[1], a[3];
  CHECK(state_fidelity(StateVector(2, sw), rs) == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<int> dup{0, 0};
  CHECK_THROWS_AS(partial_trace(rho, dup), Error);
  const std::vector<int> out_of_range{3};
  CHECK_THROWS_AS(partial_trace(rho, out_of_range), Error);
}

TEST_CASE("json round trip") {
  Rng rng(5);
  const auto s = random_state(3, rng);
  const auto back = state_from_json(nlohmann::json::parse(to_json(s).dump()));
  CHECK((back.amps() - s.amps()).norm() < 1e-15);
}

TEST_CASE("maximally mixed state has fidelity 1/d with any pure state") {
  Rng rng(3);
  const auto s = random_state(3, rng);
  CHECK(state_fidelity(s, DensityMatrix::maximally_mixed(3)) == doctest::Approx(1.0 / 8));
}

TEST_CASE("postselection") {
  VectorXc v(4);
  v << 0.5, 0.5, 0.5, cplx(0, 0.5);
  const StateVector s(2, v);
  const auto ps = postselect(s, 1, 1);
  CHECK(ps.probability == doctest::Approx(0.5));
  CHECK(ps.state.n_qubits() == 1);
  CHECK(std::abs(ps.state[1] - cplx(0, 1) / std::sqrt(2.0)) < 1e-12);
  CHECK_THROWS_AS(postselect(StateVector::basis(2, 0), 0, 1), Error);
}
