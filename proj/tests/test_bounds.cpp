#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>

#include "clexp/bounds.hpp"
#include "oracles.hpp"

using namespace clexp;

namespace {

PairPotential lri(double J, double alpha, int trunc) {
  return PairPotential::long_range_ising(J, alpha, trunc, {-1.0, 1.0});
}

std::shared_ptr<const Region> chain(int from, int to) {
  return std::make_shared<const Region>(chain_region(from, to));
}

// term-by-term sum of sup |exp(-beta Phi) - 1| for the 1d Ising family
double exp_norm_oracle(double beta, double J, double alpha, int R) {
  double s = 0.0;
  for (int r = 1; r <= R; ++r) {
    const double j = r == 1 ? J : std::pow(r, -2.0 + alpha);
    s += 2.0 * (std::exp(beta * j) - 1.0);  // sup over spin pairs
  }
  return s;
}

}  // namespace

TEST_CASE("a_beta") {
  SpinSpace space = ising_spin_space();
  SUBCASE("vanishes at beta=0") {
    CHECK(a_beta(0.1, 0.0, lri(1, 0, 50), space, 50, 1) == 0.0);
  }
  SUBCASE("(1+C)^2 scaling") {
    auto phi = lri(1, 0.5, 30);
    const double base = a_beta(0.1, 0.07, phi, space, 30, 1);
    const double doubled = a_beta(0.2, 0.07, phi, space, 30, 1);
    CHECK(doubled == doctest::Approx(base * (1.2 * 1.2) / (1.1 * 1.1)).epsilon(1e-13));
  }
  SUBCASE("alpha=0 against term-by-term summation") {
    const double expected =
        1.1 * 1.1 * std::exp(4.0) * exp_norm_oracle(0.05, 1.0, 0.0, 50);
    CHECK(a_beta(0.1, 0.05, lri(1, 0, 50), space, 50, 1) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("beta_c bisection") {
  SpinSpace space = ising_spin_space();
  SUBCASE("Ce >= 1 is rejected") {
    CHECK_THROWS_AS(beta_c_solve(0.4, lri(1, 0, 10), space, 10, 1), std::domain_error);
  }
  SUBCASE("zero potential gives the infinite flag") {
    auto r = beta_c_solve(0.1, PairPotential::zero(), space, 10, 1);
    CHECK(r.infinite);
  }
  SUBCASE("self-consistency residual") {
    auto r = beta_c_solve(0.1, lri(1, 0.5, 40), space, 40, 1);
    CHECK_FALSE(r.infinite);
    CHECK(r.beta_c > 0.0);
    CHECK(r.residual <= 1e-8);
    const double below = 0.1 * M_E + a_beta(0.1, r.beta_c * 0.5, lri(1, 0.5, 40), space, 40, 1);
    const double above = 0.1 * M_E + a_beta(0.1, r.beta_c * 2.0, lri(1, 0.5, 40), space, 40, 1);
    CHECK(below < 1.0);
    CHECK(above > 1.0);
  }
}

TEST_CASE("series constants") {
  SUBCASE("A at q=1/2 is ln 2") {
    auto sc = series_constants(0.5, 1.0);
    CHECK(sc.a_delta == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }
  SUBCASE("limits at delta -> 0") {
    auto sc = series_constants(1e-12, 1.0);
    CHECK(sc.a_delta == doctest::Approx(0.0).epsilon(1e-11));
    CHECK(sc.b_delta == doctest::Approx(0.0).epsilon(1e-11));
  }
  SUBCASE("closed forms equal 200-term partial sums at q=0.3") {
    auto sc = series_constants(0.3, 1.0);
    double a_sum = 0.0, b_sum = 0.0;
    for (int n = 1; n <= 200; ++n) a_sum += std::pow(0.3, n) / n;
    for (int n = 3; n <= 200; ++n)
      b_sum += (n - 1) * std::pow(0.3, n - 2) + std::pow(0.3, n - 1);
    CHECK(sc.a_delta == doctest::Approx(a_sum).epsilon(1e-12));
    CHECK(sc.b_delta == doctest::Approx(b_sum).epsilon(1e-12));
  }
  CHECK_THROWS_AS(series_constants(0.5, 2.1), std::domain_error);
}

TEST_CASE("alpha constants") {
  SpinSpace space = ising_spin_space();
  auto phi = lri(1, 0, 50);
  SUBCASE("all vanish at beta=0, delta=0") {
    auto a = alpha_constants(0.0, 0.0, 0.1, phi, space, 50, 1);
    CHECK(a.alpha_delta_beta == 0.0);
    CHECK(a.alpha_beta == 0.0);
    CHECK(a.alpha_bar_c_beta == 0.0);
  }
  SUBCASE("non-increasing along a decreasing beta grid") {
    double prev = std::numeric_limits<double>::infinity();
    for (double beta : {0.2, 0.15, 0.1, 0.05, 0.01, 0.0}) {
      auto a = alpha_constants(0.05, beta, 0.1, phi, space, 50, 1);
      CHECK(a.alpha_delta_beta <= prev);
      prev = a.alpha_delta_beta;
    }
  }
  SUBCASE("alpha_bar against independent summation") {
    const double expected = std::exp(2.0 * 2.1) * exp_norm_oracle(0.02, 1, 0, 50);
    auto a = alpha_constants(0.01, 0.02, 0.1, phi, space, 50, 1);
    CHECK(a.alpha_bar_c_beta == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("proposition constants") {
  SpinSpace space = ising_spin_space();
  auto phi = lri(1, 0, 6);
  Region box = chain_region(0, 2);
  std::vector<BoundaryCondition> bcs{BoundaryCondition::free(), BoundaryCondition::constant(1),
                                     BoundaryCondition::constant(0)};
  SUBCASE("d(0) = lambda(f^2)/lambda(E) = 1 for Ising") {
    auto p = prop_constants(space, phi, 0.0, 0.5, 0.5, box, bcs);
    CHECK(p.d_beta == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.grids_converged);
  }
  SUBCASE("d(beta) is decreasing in beta") {
    double prev = std::numeric_limits<double>::infinity();
    for (double beta : {0.0, 0.05, 0.1, 0.2, 0.4}) {
      auto p = prop_constants(space, phi, beta, 0.5, 0.5, box, bcs);
      CHECK(p.d_beta < prev + 1e-15);
      prev = p.d_beta;
    }
  }
  SUBCASE("gnedenko constant matches the |cos| closed form") {
    auto p = prop_constants(space, phi, 0.1, 0.5, 0.5, box, bcs);
    CHECK(p.gnedenko_dx == doctest::Approx(-std::log(std::cos(0.5))).epsilon(1e-9));
  }
  SUBCASE("c_b on a single plus-boundary site matches the closed form") {
    Region single = chain_region(0, 0);
    std::vector<BoundaryCondition> plus{BoundaryCondition::constant(1)};
    const double beta = 0.1, delta = 0.5;
    auto p = prop_constants(space, phi, beta, 0.5, delta, single, plus);
    double field = 0.0;
    for (int r = 1; r <= 6; ++r) field += 2.0 * (r == 1 ? 1.0 : std::pow(r, -2.0));
    const double m = std::tanh(beta * field);
    const double sup = std::sqrt(std::cos(delta) * std::cos(delta) +
                                 m * m * std::sin(delta) * std::sin(delta));
    CHECK(p.c_b == doctest::Approx(-std::log(sup)).epsilon(1e-9));
    CHECK(p.grids_converged);
  }
  SUBCASE("c_c construction") {
    auto p = prop_constants(space, phi, 0.05, 0.5, 0.5, box, bcs);
    CHECK(p.eps_c == doctest::Approx(0.5 * (1.0 - std::exp(-p.c0_nu))).epsilon(1e-12));
    CHECK(p.c_c == doctest::Approx(-std::log(p.eps_c + std::exp(-p.c0_nu))).epsilon(1e-12));
    CHECK(p.c_c > 0.0);
    CHECK(p.beta_prime_delta > 0.0);
  }
  SUBCASE("degenerate f is rejected") {
    SpinSpace constant;
    constant.labels = {"a", "b"};
    constant.weights = {1.0, 1.0};
    constant.f = {1, 1};
    CHECK_THROWS_AS(prop_constants(constant, phi, 0.1, 0.5, 0.5, box, bcs), std::domain_error);
  }
}

TEST_CASE("polymer gas constants") {
  SUBCASE("B at z0=0.01, K=2") {
    auto c = polymer_gas_constants(0.01, 2.0);
    CHECK(c.big_b == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(c.b_valid);
    CHECK(c.c_valid);
    const double quarter = std::pow(0.01, 0.25) * 2.0;
    CHECK(c.big_c == doctest::Approx(0.01 * std::exp(quarter / (1 - quarter))).epsilon(1e-13));
  }
  SUBCASE("limits as z0 -> 0") {
    auto c = polymer_gas_constants(1e-10, 2.0);
    CHECK(c.big_b < 1e-4);
    CHECK(c.big_c < 1e-9);
  }
  SUBCASE("sqrt(z0) K >= 1 is rejected") {
    CHECK_THROWS_AS(polymer_gas_constants(0.3, 2.0), std::domain_error);
  }
  SUBCASE("sublattice K against independent summation") {
    auto phi = lri(1, 0.5, 1250);
    const double mine = sublattice_big_k(phi, 1, 6, 200.0 * 6);
    double expected = 1.0;
    for (int m = 1; m <= 200; ++m) expected += 2.0 * std::pow(m, -0.75);
    CHECK(mine == doctest::Approx(expected).epsilon(1e-10));
  }
  SUBCASE("phi_bar picks the largest tail norm") {
    CHECK(phi_bar(lri(1, 0, 6), 1, 3) == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
    CHECK(phi_bar(lri(1, 0, 6), 1, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(phi_bar(lri(1, 0, 6), 1, 7) == 0.0);
  }
}

TEST_CASE("lemma constants") {
  SpinSpace space = ising_spin_space();
  SUBCASE("D positive at beta=0 and small delta") {
    auto phi = lri(1, 0, 50);
    auto lc = lemma_constants(0.05, 0.0, 0.1, 8, space, phi, 1, 400.0);
    const double expected_d =
        0.5 * (std::cos(0.05) * 1.0 - 0.05 - series_constants(0.05, 1.0).b_delta);
    CHECK(lc.big_d == doctest::Approx(expected_d).epsilon(1e-12));
    CHECK(lc.d_positive);
  }
  SUBCASE("D flag false at large beta") {
    auto phi = lri(1, 0, 50);
    auto lc = lemma_constants(0.05, 0.5, 0.1, 8, space, phi, 1, 400.0);
    CHECK_FALSE(lc.d_positive);
  }
  SUBCASE("every closed form against a straight re-evaluation") {
    const double delta = 0.05, beta = 0.02, c = 0.1;
    const int r0 = 8;
    auto phi = lri(1, 0.5, 100);
    auto lc = lemma_constants(delta, beta, c, r0, space, phi, 1, 800.0);

    const double q = delta * 1.0;
    const double s = exp_norm_oracle(beta, 1.0, 0.5, 100);
    CHECK(lc.a_beta_4d ==
          doctest::Approx((1 + 4 * q) * (1 + 4 * q) * std::exp(4.0) * s).epsilon(1e-12));

    auto norm = potential_norm(phi, 100, 1);
    const double d_beta = std::exp(-2.0 * beta * (norm.partial_sum + *norm.tail_bound));
    CHECK(lc.d_beta == doctest::Approx(d_beta).epsilon(1e-12));

    const double b_delta = series_constants(delta, 1.0).b_delta;
    CHECK(lc.big_d == doctest::Approx(0.5 * (std::cos(q) * d_beta - delta - b_delta -
                                             lc.a_beta_4d / q)).epsilon(1e-12));

    const double alpha_beta = std::exp(4.0) * s;
    const double alpha_bar = std::exp(2.0 * (2.0 + c)) * s;
    CHECK(lc.big_c == doctest::Approx(c - alpha_beta - alpha_bar).epsilon(1e-12));

    const double bar = std::pow(r0, -1.5);
    CHECK(lc.phi_bar_r0 == doctest::Approx(bar).epsilon(1e-13));
    CHECK(lc.z1_cam == doctest::Approx(beta * bar * std::exp(beta * bar)).epsilon(1e-13));
    CHECK(lc.z0_cam ==
          doctest::Approx(beta * bar * std::exp(2 * c + beta * bar)).epsilon(1e-13));
    CHECK(lc.z0_decim ==
          doctest::Approx(std::max(4 * q, beta * bar * std::exp(beta * bar))).epsilon(1e-13));

    if (lc.decim_prereqs_ok) {
      const double quarter = std::pow(lc.z0_decim, 0.25) * lc.big_k;
      const double b_sq = quarter / (1 - quarter);
      const double big_c_of = lc.z0_decim * std::exp(b_sq);
      const double phi_cam = 1.0 * (lc.z0_decim / delta) * std::exp(b_sq) * b_sq / (1 - big_c_of);
      CHECK(lc.phi_cam == doctest::Approx(phi_cam).epsilon(1e-11));
      CHECK(lc.d_cam ==
            doctest::Approx(0.5 * (std::cos(q) * d_beta - 2 * delta - b_delta - phi_cam))
                .epsilon(1e-11));
    }
  }
}

TEST_CASE("kp pinned bound") {
  SpinSpace space = ising_spin_space();
  SUBCASE("beta=0 leaves only the singleton term") {
    auto ctx = ActivityContext::make(chain(-3, 3), space, lri(1, 0, 6),
                                     BoundaryCondition::free(), 0.0);
    PolymerCutoffs cut;
    cut.max_bonds = 3;
    cut.max_pair_range = 3;
    auto pin = make_polymer({Bond(3, 3)}, 7);  // site 0 of the chain -3..3
    auto rep = kp_pinned_verify(ctx, 0.1, pin, cut);
    CHECK(rep.lhs == doctest::Approx(0.1 * M_E).epsilon(1e-13));
    CHECK(rep.rhs == doctest::Approx(0.1 * M_E).epsilon(1e-13));
    CHECK(rep.holds);
  }
  SUBCASE("zero potential with C=0 gives lhs=0") {
    auto ctx = ActivityContext::make(chain(0, 3), space, PairPotential::zero(),
                                     BoundaryCondition::free(), 0.3);
    PolymerCutoffs cut;
    cut.max_bonds = 2;
    cut.max_pair_range = 1;
    auto rep = kp_pinned_verify(ctx, 0.0, make_polymer({Bond(1, 1)}, 4), cut);
    CHECK(rep.lhs == 0.0);
    CHECK(rep.holds);
  }
  SUBCASE("holds with positive margin below beta_C") {
    auto phi = lri(1, 0, 6);
    auto bc = beta_c_solve(0.1, phi, space, 6, 1);
    const double beta = bc.beta_c / 2.0;
    auto ctx = ActivityContext::make(chain(-3, 3), space, phi,
                                     BoundaryCondition::constant(1), beta);
    PolymerCutoffs cut;
    cut.max_bonds = 3;
    cut.max_pair_range = 3;
    auto pin = make_polymer({Bond(3, 3)}, 7);
    auto rep = kp_pinned_verify(ctx, 0.1, pin, cut);
    CHECK(rep.holds);
    CHECK(rep.margin > 0.0);
    CHECK(rep.polymer_count > 1);
  }
  SUBCASE("beta above beta_C is rejected") {
    auto phi = lri(1, 0, 6);
    auto ctx = ActivityContext::make(chain(0, 3), space, phi, BoundaryCondition::free(), 0.8);
    PolymerCutoffs cut;
    cut.max_bonds = 2;
    cut.max_pair_range = 2;
    CHECK_THROWS_AS(kp_pinned_verify(ctx, 0.1, make_polymer({Bond(0, 0)}, 4), cut),
                    std::domain_error);
  }
}
