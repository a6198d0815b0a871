#include <doctest.h>

#include <cmath>
#include <random>

#include "desapo/eap.hpp"
#include "desapo/stats.hpp"

using namespace desapo;

namespace {

EliminationSnapshot snap(double mu, double delta, double p1, double n1) {
  EliminationSnapshot s;
  s.tau = 1;
  s.mu_tilde = mu;
  s.delta_tilde = delta;
  s.p1 = p1;
  s.n1 = n1;
  return s;
}

}  // namespace

TEST_SUITE("eap") {
  TEST_CASE("snapshot of an unsampled arm: p1 = 1/4, gap estimate 8, cap 80") {
    const ConstantsProfile c;
    const auto s = make_snapshot(5, 3, 0, 0.0, width(0, 256), 2, 256, c);
    CHECK(s.p1 == 0.25);
    CHECK(s.delta_tilde == 8.0);
    CHECK(s.n1 == doctest::Approx(80.0));
    CHECK(s.p1 * s.n1 == doctest::Approx(1280.0 / 64.0));
    CHECK(s.tau == 5);
    CHECK(s.s_tilde_len == 3);
  }

  TEST_CASE("error budget rounds three log T up") {
    CHECK(error_budget(256, ConstantsProfile{}) == 24);
    CHECK(error_budget(50000, ConstantsProfile{}) == 47);
  }

  TEST_CASE("a modest shortfall is not a phase error") {
    // 40 rounds at mean 0.8 against an observed 10: shortfall 22 < 0.25 * 0.4 * 1000.
    EliminatedArmMonitor m(snap(0.8, 0.4, 0.1, 1000.0), 10);
    for (int i = 0; i < 40; ++i) CHECK(m.consume(0.25) == PhaseEvent::None);
    CHECK(m.phase().phase_len == 40);
    CHECK(m.phase().phase_is_sum == doctest::Approx(10.0));
    CHECK(m.phase().error_count == 0);
  }

  TEST_CASE("success doubles the cap and halves the probability") {
    EliminatedArmMonitor m(snap(0.5, 0.4, 0.25, 80.0), 10);
    for (int i = 0; i < 79; ++i) REQUIRE(m.consume(0.5) == PhaseEvent::None);
    CHECK(m.consume(0.5) == PhaseEvent::Success);
    CHECK(m.phase().n_cap == 160.0);
    CHECK(m.current_exponent() == 1);
    CHECK(m.probability() == 0.125);
    CHECK(m.phase().r == 2);
    CHECK(m.phase().phase_len == 0);
  }

  TEST_CASE("error halves the cap down to its floor and doubles the probability") {
    EliminatedArmMonitor m(snap(0.5, 0.4, 0.25, 80.0), 10);
    for (int i = 0; i < 80; ++i) m.consume(0.5);
    REQUIRE(m.phase().n_cap == 160.0);
    // Threshold 0.25 * 0.4 * 160 = 16 is reached after 32 zero contributions.
    PhaseEvent last = PhaseEvent::None;
    int used = 0;
    while (last == PhaseEvent::None) {
      last = m.consume(0.0);
      ++used;
    }
    CHECK(last == PhaseEvent::Error);
    CHECK(used == 32);
    CHECK(m.phase().n_cap == 80.0);
    CHECK(m.current_exponent() == 0);
    CHECK(m.probability() * m.phase().n_cap == doctest::Approx(0.25 * 80.0));
    CHECK(m.phase().error_count == 1);
  }

  TEST_CASE("errors at the first phase keep the cap and exponent at their floors") {
    EliminatedArmMonitor m(snap(0.5, 0.4, 0.25, 80.0), 10);
    for (int i = 0; i < 16; ++i) m.consume(0.0);
    CHECK(m.phase().error_count == 1);
    CHECK(m.phase().n_cap == 80.0);
    CHECK(m.current_exponent() == 0);
  }

  TEST_CASE("step drains only the bank of the current exponent, in round order") {
    EliminatedArmMonitor m(snap(0.5, 0.4, 0.25, 80.0), 10);
    m.bank(7, 1, 0.0);
    m.bank(3, 0, 0.5);
    m.bank(2, 0, 0.5);
    CHECK(m.banked(0) == 2);
    auto s = m.step();
    CHECK_FALSE(s.switch_requested);
    CHECK(s.probability == 0.25);
    CHECK(m.banked(0) == 0);
    CHECK(m.banked(1) == 1);
    CHECK(m.phase().phase_len == 2);
    CHECK_THROWS_AS(m.bank(7, 1, 0.0), ProtocolError);
  }

  TEST_CASE("a success mid-drain continues into the next exponent's bank") {
    EliminatedArmMonitor m(snap(0.5, 0.4, 0.25, 2.0), 10);
    m.bank(1, 0, 0.5);
    m.bank(2, 0, 0.5);
    m.bank(3, 0, 0.5);
    m.bank(4, 1, 0.5);
    m.step();
    // Rounds 1-2 complete phase 1; round 3 stays in bank 0; round 4 opens phase 2.
    CHECK(m.current_exponent() == 1);
    CHECK(m.banked(0) == 1);
    CHECK(m.banked(1) == 0);
    CHECK(m.phase().phase_len == 1);
  }

  TEST_CASE("reaching the error budget requests a switch") {
    EliminatedArmMonitor m(snap(0.5, 0.4, 0.25, 80.0), 3);
    for (Round r = 1; r <= 47; ++r) m.bank(r, 0, 0.0);
    CHECK_FALSE(m.step().switch_requested);
    CHECK(m.phase().error_count == 2);
    m.bank(48, 0, 0.0);
    CHECK(m.step().switch_requested);
    CHECK(m.phase().error_count == 3);
  }

  TEST_CASE("probability times cap is invariant under random transitions") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    EliminatedArmMonitor m(snap(0.4, 0.3, 0.15, 50.0), 1000);
    const double product = 0.15 * 50.0;
    for (int i = 0; i < 20000; ++i) {
      const double c = u(rng) < 0.3 ? u(rng) * 2.0 : 0.0;
      m.consume(c);
      REQUIRE(std::abs(m.probability() * m.phase().n_cap - product) <= 1e-9 * product);
    }
    CHECK(m.phase().r > 2);
  }
}
