#include <doctest.h>

#include <cmath>
#include <memory>

#include "clexp/polymer.hpp"
#include "oracles.hpp"

using namespace clexp;

namespace {

PairPotential lri(double J, double alpha, int trunc) {
  return PairPotential::long_range_ising(J, alpha, trunc, {-1.0, 1.0});
}

std::shared_ptr<const Region> chain(int from, int to) {
  return std::make_shared<const Region>(chain_region(from, to));
}

ActivityContext make_ctx(int n_sites, double beta, double t, double d_k,
                         BoundaryCondition bc = BoundaryCondition::free(), double alpha = 0.0) {
  return ActivityContext::make(chain(0, n_sites - 1), ising_spin_space(), lri(1.0, alpha, 6),
                               std::move(bc), beta, t, d_k);
}

}  // namespace

TEST_CASE("bond connectivity") {
  CHECK(is_connected(std::vector<Bond>{Bond(0, 0), Bond(0, 3)}));
  CHECK_FALSE(is_connected(std::vector<Bond>{Bond(0, 0), Bond(5, 5)}));
  CHECK(is_connected(std::vector<Bond>{Bond(0, 2), Bond(2, 4), Bond(4, 4)}));
  CHECK_FALSE(is_connected(std::vector<Bond>{Bond(0, 1), Bond(2, 3)}));
  CHECK_THROWS_AS(is_connected(std::vector<Bond>{}), std::invalid_argument);

  // randomized agreement with an independent union-find oracle
  DetRng rng(424242);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Bond> bonds;
    const int count = 1 + static_cast<int>(rng.next_index(6));
    for (int i = 0; i < count; ++i) {
      const int a = static_cast<int>(rng.next_index(8));
      const int b = static_cast<int>(rng.next_index(8));
      bonds.emplace_back(a, b);
    }
    CHECK(is_connected(bonds) == oracles::connected_union_find(bonds));
  }
}

TEST_CASE("polymer enumeration") {
  SUBCASE("two-site box, one bond") {
    PolymerCutoffs cut;
    cut.max_bonds = 1;
    cut.max_pair_range = 4;
    auto polys = enumerate_polymers(*chain(0, 1), lri(1, 0, 4), cut);
    REQUIRE(polys.size() == 3);  // {{x}}, {{x,y}}, {{y}} in canonical order
    CHECK(polys[0].bonds == std::vector<Bond>{Bond(0, 0)});
    CHECK(polys[1].bonds == std::vector<Bond>{Bond(0, 1)});
    CHECK(polys[2].bonds == std::vector<Bond>{Bond(1, 1)});
    cut.restrict_to_r2 = true;
    auto r2 = enumerate_polymers(*chain(0, 1), lri(1, 0, 4), cut);
    REQUIRE(r2.size() == 1);
    CHECK(r2[0].bonds == std::vector<Bond>{Bond(0, 1)});
  }
  SUBCASE("five-site chain against the subset-filter oracle") {
    PolymerCutoffs cut;
    cut.max_bonds = 3;
    cut.max_pair_range = 2;
    auto polys = enumerate_polymers(*chain(0, 4), lri(1, 0, 6), cut);

    std::vector<Bond> universe;
    for (int i = 0; i < 5; ++i) universe.emplace_back(i, i);
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j)
        if (j - i <= 2) universe.emplace_back(i, j);
    auto expected = oracles::polymer_subset_filter(universe, 3);
    CHECK(polys.size() == expected.size());
    for (const Polymer& p : polys) CHECK(expected.count(p.bonds) == 1);
  }
  SUBCASE("deterministic stream") {
    PolymerCutoffs cut;
    cut.max_bonds = 3;
    cut.max_pair_range = 3;
    auto a = enumerate_polymers(*chain(0, 5), lri(1, 0.5, 6), cut);
    auto b = enumerate_polymers(*chain(0, 5), lri(1, 0.5, 6), cut);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].bonds == b[i].bonds);
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(polymer_canonical_less(a[i - 1], a[i]));
  }
  SUBCASE("pair range above truncation is rejected") {
    PolymerCutoffs cut;
    cut.max_bonds = 1;
    cut.max_pair_range = 9;
    CHECK_THROWS_AS(enumerate_polymers(*chain(0, 3), lri(1, 0, 4), cut), std::invalid_argument);
  }
}

TEST_CASE("polymer structure invariants") {
  auto p = make_polymer({Bond(1, 1), Bond(1, 3), Bond(3, 4)}, 6);
  CHECK(p.support == std::vector<int>{1, 3, 4});
  CHECK(p.gamma1().size() == 1);
  CHECK(p.gamma2().size() == 2);
  CHECK_FALSE(p.in_r2());
  // gamma1 support inside gamma2 support whenever |support| >= 2
  auto g2 = make_polymer(p.gamma2(), 6);
  for (const Bond& b : p.gamma1()) CHECK(((g2.support_mask >> b.lo) & 1) == 1);
  CHECK_THROWS_AS(make_polymer({Bond(0, 1), Bond(3, 4)}, 6), std::invalid_argument);
}

TEST_CASE("single site density") {
  SUBCASE("beta=0 uniform") {
    auto ctx = make_ctx(3, 0.0, 0.0, 0.0, BoundaryCondition::constant(1));
    auto p = single_site_density(ctx, 1);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("free boundary leaves lambda") {
    SpinSpace space;
    space.labels = {"a", "b"};
    space.weights = {1.0, 3.0};
    space.f = {0, 1};
    auto ctx = ActivityContext::make(chain(0, 2), space, lri(1, 0, 3),
                                     BoundaryCondition::free(), 0.4);
    auto p = single_site_density(ctx, 0);
    CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-15));
  }
  SUBCASE("plus boundary against the direct formula") {
    const double beta = 0.3;
    auto ctx = ActivityContext::make(chain(0, 4), ising_spin_space(), lri(1.0, 0.0, 3),
                                     BoundaryCondition::constant(1), beta);
    // site 0 sees exterior sites -1,-2,-3: h(e) = -(J(1)+J(2)+J(3)) s_e
    const double field = 1.0 + 0.25 + 1.0 / 9.0;
    const double wm = std::exp(-beta * field), wp = std::exp(beta * field);
    auto p = single_site_density(ctx, 0);
    CHECK(p[0] == doctest::Approx(wm / (wm + wp)).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(wp / (wm + wp)).epsilon(1e-14));
    CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(single_site_density(make_ctx(2, 0.1, 0, 0), 7), std::invalid_argument);
}

TEST_CASE("activities") {
  SUBCASE("zeta_t of a singleton vanishes at t=0") {
    auto ctx = make_ctx(3, 0.2, 0.0, 0.0);
    auto v = activity(ctx, make_polymer({Bond(1, 1)}, 3), ActivityKind::zeta_t);
    CHECK(std::abs(v) == doctest::Approx(0.0));
  }
  SUBCASE("zeta_hat of the empty polymer is 1") {
    auto ctx = make_ctx(2, 0.2, 0.0, 0.0);
    CHECK(activity(ctx, empty_polymer(), ActivityKind::zeta_hat).real() == 1.0);
    CHECK_THROWS_AS(activity(ctx, empty_polymer(), ActivityKind::zeta_t), std::invalid_argument);
  }
  SUBCASE("zeta_hat of a pair vanishes at beta=0") {
    auto ctx = make_ctx(2, 0.0, 0.0, 0.0);
    auto v = activity(ctx, make_polymer({Bond(0, 1)}, 2), ActivityKind::zeta_hat);
    CHECK(std::abs(v) == doctest::Approx(0.0));
  }
  SUBCASE("xi_single modulus is sqrt(2-2cos)") {
    for (double t : {0.1, 0.7, 1.9}) {
      auto ctx = make_ctx(3, 0.1, t, 4.0);
      for (int e : {0, 1}) {
        const double u = ctx.phase() * ising_spin_space().f[e];
        CHECK(std::abs(ctx.xi_single(e)) ==
              doctest::Approx(std::sqrt(2.0 - 2.0 * std::cos(u))).epsilon(1e-12));
      }
    }
  }
  SUBCASE("three-site zeta_t against the direct nested-sum oracle") {
    const double beta = 0.1, t = 0.4, d_k = 3.7;
    auto bc = BoundaryCondition::constant(1);
    auto ctx = make_ctx(5, beta, t, d_k, bc);
    std::vector<Bond> bonds{Bond(0, 0), Bond(0, 1), Bond(1, 2)};
    auto mine = activity(ctx, make_polymer(bonds, 5), ActivityKind::zeta_t);
    auto direct = oracles::zeta_t_activity(*chain(0, 4), ising_spin_space(), lri(1, 0, 6), bc,
                                           beta, t / std::sqrt(d_k), bonds);
    CHECK(mine.real() == doctest::Approx(direct.real()).epsilon(1e-12));
    CHECK(mine.imag() == doctest::Approx(direct.imag()).epsilon(1e-12));
  }
  SUBCASE("kind/polymer mismatch is rejected") {
    auto ctx = make_ctx(3, 0.1, 0.0, 0.0);
    auto with_singleton = make_polymer({Bond(0, 0), Bond(0, 1)}, 3);
    CHECK_THROWS_AS(activity(ctx, with_singleton, ActivityKind::zeta_hat), std::invalid_argument);
    CHECK_THROWS_AS(activity(ctx, with_singleton, ActivityKind::eta_c, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(activity(ctx, with_singleton, ActivityKind::zeta_tilde), std::invalid_argument);
  }
  SUBCASE("eta_c is exactly the exponential rescaling of zeta_hat") {
    auto ctx = make_ctx(4, 0.25, 0.0, 0.0, BoundaryCondition::constant(0));
    auto r = make_polymer({Bond(0, 1), Bond(1, 3)}, 4);
    const double c = 0.37;
    const double hat = activity(ctx, r, ActivityKind::zeta_hat).real();
    const double eta = activity(ctx, r, ActivityKind::eta_c, c).real();
    CHECK(eta == doctest::Approx(std::exp(c * 3.0) * hat).epsilon(1e-14));
  }
}

TEST_CASE("single-site density lower bound") {
  // p_x(e) lambda(E)/lambda(e) >= exp(-2 beta |||Phi|||) for sampled boundaries
  SpinSpace space;
  space.labels = {"a", "b", "c"};
  space.weights = {1.0, 2.5, 0.5};
  space.f = {-1, 0, 2};
  auto phi = PairPotential::long_range_ising(1.0, 0.5, 4, {-1.0, 0.0, 2.0});
  const double beta = 0.2;
  const double norm_phi = potential_norm(phi, 4, 1).partial_sum;
  const double floor = std::exp(-2.0 * beta * norm_phi);

  std::vector<BoundaryCondition> bcs{BoundaryCondition::free(), BoundaryCondition::constant(0),
                                     BoundaryCondition::constant(2)};
  std::map<Site, int> ring;
  for (int y : {-4, -3, -2, -1, 5, 6, 7, 8}) ring[Site({y})] = (y + 100) % 3;
  bcs.push_back(BoundaryCondition::explicit_map(ring));

  for (const auto& bc : bcs) {
    auto ctx = ActivityContext::make(chain(0, 4), space, phi, bc, beta);
    for (std::size_t x = 0; x < 5; ++x) {
      auto p = single_site_density(ctx, x);
      for (std::size_t e = 0; e < space.size(); ++e)
        CHECK(p[e] * space.lambda_total() / space.weights[e] >= floor - 1e-12);
    }
  }
}

TEST_CASE("activity bounds from the expansion") {
  const double beta = 0.15;
  PolymerCutoffs cut;
  cut.max_bonds = 3;
  cut.max_pair_range = 3;
  auto region = chain(0, 3);
  auto polys = enumerate_polymers(*region, lri(1, 0, 6), cut);

  SUBCASE("|zeta_t| <= (delta ||f||)^{|gamma1|} zeta_hat(gamma2) for |t| < delta sqrt(Dk)") {
    const double d_k = 4.2;
    for (double t : {0.2, 0.8}) {
      auto ctx = make_ctx(4, beta, t, d_k);
      const double delta = std::abs(t) / std::sqrt(d_k);  // tightest admissible delta
      for (const auto& r : polys) {
        const double lhs = std::abs(activity(ctx, r, ActivityKind::zeta_t));
        auto g2 = r.gamma2();
        const double hat =
            g2.empty() ? 1.0
                       : std::abs(activity(ctx, make_polymer(g2, region->size()),
                                           ActivityKind::zeta_hat));
        const double rhs = std::pow(delta * 1.0, static_cast<double>(r.singleton_count())) * hat;
        CHECK(lhs <= rhs + 1e-12);
      }
    }
  }
  SUBCASE("|zeta_tilde| <= zeta_hat on R_2 for every t") {
    for (double t : {0.0, 0.4, 2.2}) {
      auto ctx = make_ctx(4, beta, t, 4.2);
      for (const auto& r : polys) {
        if (!r.in_r2()) continue;
        const double tilde = std::abs(activity(ctx, r, ActivityKind::zeta_tilde));
        const double hat = std::abs(activity(ctx, r, ActivityKind::zeta_hat));
        CHECK(tilde <= hat + 1e-12);
      }
    }
  }
}
