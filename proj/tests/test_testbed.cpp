#include "doctest.h"

#include "wnlab/errors.hpp"
#include "wnlab/nikolskii.hpp"
#include "wnlab/selection.hpp"
#include "wnlab/testbed.hpp"

#include <cmath>
#include <set>

using namespace wnlab;

namespace {

const double inf = std::numeric_limits<double>::infinity();

} // namespace

TEST_SUITE("testbed")
{
  TEST_CASE("bump values")
  {
    CHECK(bump(0.0) == doctest::Approx(0.3678794).epsilon(1e-7));
    CHECK(bump(1.0) == 0.0);
    CHECK(bump(-1.3) == 0.0);
    for (double t : { 0.1, 0.5, 0.9, 0.999 })
      CHECK(bump(t) == bump(-t));
  }

  TEST_CASE("bump derivatives match finite differences")
  {
    const double h = 1e-5;
    for (int k = 1; k <= 3; ++k)
      for (double t : { -0.7, -0.2, 0.0, 0.3, 0.8 }) {
        const double fd = (bump_derivative(t + h, k - 1) - bump_derivative(t - h, k - 1)) / (2 * h);
        CHECK(bump_derivative(t, k) == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
      }
    CHECK(bump_derivative(0.0, 0) == bump(0.0));
    CHECK(bump_derivative(1.2, 2) == 0.0);
  }

  TEST_CASE("binary words")
  {
    auto w = BinaryWord::from_bits("0110010");
    CHECK(w.length == 7);
    CHECK(w.ones == std::vector<int>{ 1, 2, 5 });
    CHECK(w.bits() == "0110010");
    CHECK(hamming(w, BinaryWord::from_bits("0100011")) == 2);
  }

  TEST_CASE("packing sets pass an exhaustive check")
  {
    for (auto [m, n] : { std::pair{ 4, 36 }, { 4, 64 }, { 8, 80 }, { 4, 16 } }) {
      auto set = vg_set(m, n, 3);
      std::set<std::vector<int>> distinct;
      for (const auto& w : set.words) {
        CHECK(w.length == n);
        CHECK(int(w.ones.size()) == m);
        distinct.insert(w.ones);
      }
      CHECK(distinct.size() == set.words.size());
      for (std::size_t a = 0; a < set.words.size(); ++a)
        for (std::size_t b = a + 1; b < set.words.size(); ++b)
          CHECK(2 * hamming(set.words[a], set.words[b]) >= m);
      CHECK(double(set.words.size()) >= std::pow(2.0, -m) * std::pow(double(n) / m - 1, m / 2.0));
      CHECK(set.certificate.ok());
      CHECK(set.certificate.ratio_ok == (n >= 9 * m));
    }
    CHECK(vg_bound(4, 36) == doctest::Approx(4.0));
    CHECK(vg_bound(4, 16) == doctest::Approx(0.5625));
  }

  TEST_CASE("certificate rejects bad sets")
  {
    std::vector<BinaryWord> close = { BinaryWord::from_bits("1111111100000000"),
                                      BinaryWord::from_bits("1111111010000000") };
    auto c = certify_vg(close, 8, 16);
    CHECK(c.weights_ok);
    CHECK_FALSE(c.distance_ok);
    std::vector<BinaryWord> heavy = { BinaryWord::from_bits("11111000") };
    CHECK_FALSE(certify_vg(heavy, 4, 8).weights_ok);
  }

  TEST_CASE("dense family follows the recipe")
  {
    const ClassSpec theta({ 1.0 }, { inf }, { 12.0 });
    const double eps = 0.05;
    auto fam = build_family(theta, 2.0, eps, default_lower_bound_constants(theta, 2.0), 1.0, 11);
    CHECK(fam.zone == Zone::Dense);
    const double base = 12.0 * eps * eps;
    const double sigma_raw = std::pow(base, 1.0 / 3.0) / 12.0;
    const int M = int(std::ceil(1.0 / sigma_raw));
    CHECK(fam.M[0] == M);
    CHECK(fam.sigma[0] == doctest::Approx(1.0 / M));
    CHECK(fam.m == int(std::floor(12.0 * std::pow(base, -1.0 / 3.0) / 9.0)));
    CHECK(double(fam.cells) / fam.m >= 9.0);
    CHECK(fam.W[0].ones.empty());
    CHECK(fam.certificate.ok());
    CHECK(fam.cond_likelihood);
    CHECK(fam.cond_membership);
  }

  TEST_CASE("dense family is infeasible when the index set is too small")
  {
    // smoothness 2 at unit radius leaves only seven cells at this noise level
    const ClassSpec theta({ 2.0 }, { inf }, { 1.0 });
    CHECK_THROWS_AS(build_family(theta, 2.0, 0.01, default_lower_bound_constants(theta, 2.0)), InfeasibleError);
  }

  TEST_CASE("sparse family has four bumps")
  {
    const ClassSpec theta({ 1.0 }, { 1.2 }, { 1.0 });
    REQUIRE(classify(theta, 4.0).zone == Zone::Sparse);
    auto fam = build_family(theta, 4.0, 0.05, default_lower_bound_constants(theta, 4.0), 1.0, 2);
    CHECK(fam.m == 4);
    for (std::size_t w = 1; w < fam.W.size(); ++w)
      CHECK(fam.W[w].ones.size() <= 4u);
  }

  TEST_CASE("rendered members")
  {
    const ClassSpec theta({ 1.0, 2.0 }, { inf, inf }, { 12.0, 12.0 });
    const double p = 2.0;
    auto fam = build_family(theta, p, 0.05, default_lower_bound_constants(theta, p), 1.0, 4);
    Grid g(2, 1.0, 128);
    auto zero = render_family_member(fam, fam.W[0], g);
    CHECK(lp_norm(zero, inf) == 0.0);

    BinaryWord single{ int(fam.cells), { 0 } };
    auto one = render_word(fam, single, g);
    const double peak = fam.A * std::exp(-2.0);
    CHECK(lp_norm(one, inf) <= peak * (1 + 1e-12));
    CHECK(lp_norm(one, inf) >= 0.9 * peak);

    // bumps of half-width sigma around the centers tile the cube
    for (int l = 0; l < 2; ++l) {
      CHECK(fam.center(l, 1) - fam.sigma[l] >= -1.0 - 1e-12);
      CHECK(fam.center(l, fam.M[l]) + fam.sigma[l] <= 1.0 + 1e-12);
    }
    std::vector<GridFunction> members;
    for (const auto& w : fam.W)
      members.push_back(render_family_member(fam, w, g));

    double prod_sigma = fam.sigma[0] * fam.sigma[1];
    for (std::size_t a = 0; a < members.size(); ++a) {
      const double energy = std::pow(lp_norm(members[a], 2.0), 2);
      CHECK(energy <= fam.constants.C3 * fam.A * fam.A * fam.W[a].ones.size() * prod_sigma * 1.1);
      for (std::size_t b = a + 1; b < members.size(); ++b)
        CHECK(lp_distance(members[a], members[b], p) >= 2 * fam.rho * 0.9);
    }
    CHECK_THROWS(render_family_member(fam, BinaryWord{ int(fam.cells), { 0, 1, 2, 3, 4, 5, 6, 7, 8 } }, g));
  }

  TEST_CASE("lacunary signal")
  {
    Grid g(1, 0.25, 512);
    CHECK(default_lacunary_terms(g) == 8);
    auto f = lacunary_signal(g, { 2.0 });
    CHECK(f[0] == doctest::Approx(0.0).scale(1.0));
    CHECK(lp_norm(f, inf) > 0.1);
    auto f2 = lacunary_signal(g, { 2.0 }, 3);
    CHECK(lp_distance(f, f2, 2.0) > 0);
    CHECK_THROWS(lacunary_signal(g, { 2.0, 1.0 }));
  }
}
