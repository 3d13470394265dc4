#include "doctest.h"

#include "wnlab/bandwidths.hpp"
#include "wnlab/errors.hpp"
#include "wnlab/rates.hpp"

#include <cmath>

using namespace wnlab;

namespace {

BandwidthField split_field(const Grid& g, int left, int right)
{
  // level 1 partition of (-2,2): cell 0 covers (-1,0), cell 1 covers (0,1)
  return BandwidthField(g, 1, { Levels{ left, 0, 0 }, Levels{ right, 0, 0 } });
}

} // namespace

TEST_SUITE("bandwidths")
{
  TEST_CASE("lattice values")
  {
    CHECK(h_of(0) == doctest::Approx(0.13533528).epsilon(1e-8));
    CHECK(h_of(3) == doctest::Approx(0.00673795).epsilon(1e-6));
    for (int s = 0; s < 10; ++s)
      CHECK(h_of(s + 1) / h_of(s) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(level_at_most(0.02145) == 2);
  }

  TEST_CASE("dyadic partition cells")
  {
    DyadicPartition p(1, 1, 1.0);
    CHECK(p.cell_count() == 2);
    CHECK(p.edge(0) == doctest::Approx(-2.0));
    CHECK(p.edge(1) == doctest::Approx(0.0));
    CHECK(p.edge(2) == doctest::Approx(2.0));
    CHECK(p.measure_in_domain(0) == doctest::Approx(1.0));
    // nesting: each level-3 cell lies inside the parent at level 2
    DyadicPartition fine(3, 1, 1.0), coarse(2, 1, 1.0);
    for (int k = 0; k < fine.cells_per_axis(); ++k) {
      double mid = 0.5 * (fine.edge(k) + fine.edge(k + 1));
      CHECK(coarse.axis_cell(mid) == k / 2);
    }
    double total = 0;
    DyadicPartition p2(2, 2, 0.5);
    for (std::size_t c = 0; c < p2.cell_count(); ++c)
      total += p2.measure_in_domain(c);
    CHECK(total == doctest::Approx(1.0));
  }

  TEST_CASE("join of constants takes the larger bandwidth")
  {
    Grid g = make_grid(1, 1.0, 64);
    auto h = BandwidthField::constant(g, { 2 });
    auto eta = BandwidthField::constant(g, { 5 });
    CHECK(lattice_join(h, eta).constant_levels()[0] == 2);
    CHECK(lattice_join(h, h) == h);
    Grid g2 = make_grid(2, 1.0, 16);
    auto j = lattice_join(BandwidthField::constant(g2, { 1, 4 }), BandwidthField::constant(g2, { 3, 2 }));
    CHECK(j.constant_levels()[0] == 1);
    CHECK(j.constant_levels()[1] == 2);
    CHECK_THROWS_AS(lattice_join(h, BandwidthField::constant(make_grid(1, 1.0, 32), { 2 })), GridMismatch);
  }

  TEST_CASE("join volume dominates both inputs pointwise")
  {
    Grid g = make_grid(2, 1.0, 16);
    for (int t = 0; t < 10; ++t) {
      auto h = random_bandwidth_field(g, 2, 4, 5, 2 * t);
      auto eta = random_bandwidth_field(g, 3, 4, 5, 2 * t + 1);
      auto j = lattice_join(h, eta);
      for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(j.volume_at(i) >= std::max(h.volume_at(i), eta.volume_at(i)) * (1 - 1e-15));
    }
  }

  TEST_CASE("complexity examples")
  {
    for (int d = 1; d <= 3; ++d) {
      Grid g = make_grid(d, 1.0, 8);
      auto c = BandwidthField::constant(g, std::vector<int>(d, 1));
      CHECK(complexity(c, 0.5) == doctest::Approx(std::pow(std::pow(2.0, d), 0.5)));
      CHECK(complexity(c.refine(3), 0.5) == doctest::Approx(complexity(c, 0.5)));
    }
    Grid g = make_grid(1, 1.0, 16);
    auto split = split_field(g, 1, 3);
    CHECK(complexity(split, 0.5) == doctest::Approx(2.0));
    CHECK_FALSE(member_Hd(split, 0.5, 1.5));
    CHECK(member_Hd(split, 0.5, 1e9));
    CHECK(member_Hd(BandwidthField::constant(g, { 2 }), 0.5, std::pow(2.0, 0.5)));
  }

  TEST_CASE("norm index for constant fields")
  {
    Grid g = make_grid(1, 1.0, 64);
    auto h = BandwidthField::constant(g, { 0 }); // V = e^{-2}
    auto h2 = BandwidthField::constant(make_grid(1, 1.0, 64), { 2 }); // V = e^{-4}
    // closed form ||V^{-1/2}||_q = V^{-1/2} (2b)^{1/q} with q = rp/(r-p) = 6
    CHECK(inv_sqrt_volume_norm(h2, 6.0) == doctest::Approx(std::exp(2.0) * std::pow(2.0, 1.0 / 6)));
    auto ni = norm_index_set(h2, 9.0, 2.0);
    CHECK(ni.ok);
    CHECK(ni.r == 3);
    CHECK_FALSE(norm_index_set(h2, 0.99 * std::exp(2.0), 2.0).ok);
    CHECK(member_B(h, 10.0, 2.0));
  }

  TEST_CASE("oracle grid dense example")
  {
    ClassSpec th({ 2.0 }, { INFINITY }, { 1.0 });
    auto og = oracle_bandwidth_grid(th, 2.0, 0.01);
    REQUIRE(!og.vectors.empty());
    CHECK(og.eta_bar[0][0] == doctest::Approx(std::exp(-2.0) * std::pow(0.01, 0.4)).epsilon(1e-6));
    CHECK(og.vectors[0].levels[0] == 2);
    for (std::size_t m = 0; m < og.vectors.size(); ++m)
      for (std::size_t j = 0; j < og.vectors[m].levels.size(); ++j) {
        double hs = h_of(og.vectors[m].levels[j]);
        CHECK(hs <= og.eta_bar[m][j] * (1 + 1e-12));
        CHECK(og.eta_bar[m][j] < std::exp(1.0) * hs);
      }
    for (std::size_t a = 0; a < og.vectors.size(); ++a)
      for (std::size_t b = a + 1; b < og.vectors.size(); ++b)
        CHECK_FALSE(og.vectors[a] == og.vectors[b]);
  }

  TEST_CASE("oracle grid volume relation")
  {
    ClassSpec th({ 2.0, 1.0 }, { INFINITY, INFINITY }, { 1.0, 2.0 });
    const double eps = 0.01;
    auto prof = classify(th, 2.0);
    auto og = oracle_bandwidth_grid(th, 2.0, eps);
    const double phi = oracle_phi(th, 2.0, eps);
    for (std::size_t i = 0; i < og.m_values.size(); ++i) {
      const int m = og.m_values[i];
      double prod = og.eta_bar[i][0] * og.eta_bar[i][1];
      double expect = std::exp(-4.0) / prof.L_beta * std::pow(phi, 1.0 / prof.beta) * std::exp(-8.0 * m);
      CHECK(prod == doctest::Approx(expect).epsilon(1e-9));
    }
  }

  TEST_CASE("sparse switch index only exists in the sparse zone")
  {
    ClassSpec dense({ 2.0 }, { INFINITY }, { 1.0 });
    CHECK_THROWS_AS(sparse_switch_index(dense, 2.0, 0.01), ZoneMismatch);
  }

  TEST_CASE("lattice complexity bound on random pairs")
  {
    for (int d = 1; d <= 2; ++d) {
      Grid g = make_grid(d, 1.0, 16);
      const double kap = 1.0 / (2 * d);
      for (int t = 0; t < 20; ++t) {
        auto h = random_bandwidth_field(g, 2, 3, 17, 2 * t);
        auto eta = random_bandwidth_field(g, 2, 3, 17, 2 * t + 1);
        double L = std::max(complexity(h, kap), complexity(eta, kap));
        CHECK(member_Hd(lattice_join(h, eta), d * kap, std::pow(2.0 * L, d)));
      }
    }
  }

  TEST_CASE("tuning defaults")
  {
    CHECK(tuning_bandwidth(0.01) == doctest::Approx(std::exp(-std::sqrt(std::log(100.0)))));
    CHECK(tuning_integrability(0.01) == doctest::Approx(std::exp(std::pow(std::log(0.01), 2))));
  }
}
