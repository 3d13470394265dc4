#include "doctest.h"

#include "wnlab/nikolskii.hpp"
#include "wnlab/rates.hpp"
#include "wnlab/selection.hpp"
#include "wnlab/testbed.hpp"

#include <cmath>
#include <random>

using namespace wnlab;

namespace {

//! max over all grid boxes containing i with side <= cap
GridFunction brute_maximal_2d(const GridFunction& lam, int cap)
{
  const Grid& g = lam.grid;
  const int n = g.points_per_axis();
  GridFunction out(g);
  for (int x0 = 0; x0 < n; ++x0)
    for (int x1 = 0; x1 < n; ++x1) {
      double best = 0;
      for (int a0 = std::max(0, x0 - cap + 1); a0 <= x0; ++a0)
        for (int e0 = x0; e0 < std::min(n, a0 + cap); ++e0)
          for (int a1 = std::max(0, x1 - cap + 1); a1 <= x1; ++a1)
            for (int e1 = x1; e1 < std::min(n, a1 + cap); ++e1) {
              double s = 0;
              for (int i = a0; i <= e0; ++i)
                for (int j = a1; j <= e1; ++j)
                  s += lam[g.ravel({ i, j, 0 })];
              best = std::max(best, s / ((e0 - a0 + 1) * (e1 - a1 + 1)));
            }
      out[g.ravel({ x0, x1, 0 })] = best;
    }
  return out;
}

} // namespace

TEST_SUITE("nikolskii")
{
  TEST_CASE("differences of affine and quadratic functions")
  {
    Grid g(2, 1.0, 64);
    const double u = 2 * g.step();
    auto lin = tabulate(g, [](std::span<const double> x) { return 3 * x[1] - x[0] + 0.5; });
    auto sq = tabulate(g, [](std::span<const double> x) { return x[1] * x[1] + x[0]; });
    auto D1 = difference(lin, u, 1, 1);
    auto D2 = difference(lin, u, 1, 2);
    auto Q = difference(sq, u, 1, 2);
    auto Z = difference(sq, u, 1, 3);
    for (int i = 0; i < 64; ++i)
      for (int j = 0; j + 6 < 64; ++j) {
        auto k = g.ravel({ i, j, 0 });
        CHECK(D1[k] == doctest::Approx(3 * u).epsilon(1e-12));
        CHECK(std::abs(D2[k]) <= 1e-12);
        CHECK(std::abs(Q[k] - 2 * u * u) <= 1e-12);
        CHECK(std::abs(Z[k]) <= 1e-12);
      }
  }

  TEST_CASE("differences along an axis the function ignores vanish")
  {
    Grid g(2, 1.0, 32);
    auto f = tabulate(g, [](std::span<const double> x) { return std::sin(3 * x[1]); });
    for (int k = 1; k <= 3; ++k) {
      auto D = difference(f, 4 * g.step(), 0, k);
      for (int i = 0; i + 4 * k < 32; ++i)
        for (int j = 0; j < 32; ++j)
          CHECK(std::abs(D[g.ravel({ i, j, 0 })]) <= 1e-14);
    }
  }

  TEST_CASE("higher differences compose from first differences")
  {
    Grid g(1, 1.0, 128);
    std::mt19937_64 eng(3);
    std::normal_distribution<double> N;
    GridFunction f(g);
    for (std::size_t i = 0; i < g.size(); ++i)
      f[i] = N(eng);
    const double u = 3 * g.step();
    for (int k = 2; k <= 4; ++k) {
      auto direct = difference(f, u, 0, k);
      auto composed = difference(difference(f, u, 0, k - 1), u, 0, 1);
      for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(direct[i] == doctest::Approx(composed[i]).epsilon(1e-12).scale(1.0));
    }
  }

  TEST_CASE("misaligned steps are rejected")
  {
    Grid g(1, 1.0, 64);
    GridFunction f(g, 1.0);
    CHECK_THROWS(difference(f, 1.5 * g.step(), 0, 1));
  }

  TEST_CASE("zero function is in every class")
  {
    Grid g(2, 1.0, 32);
    auto rep = check_membership(GridFunction(g), ClassSpec({ 0.5, 2.0 }, { 1.0, INFINITY }, { 0.1, 0.1 }),
                                default_u_grid(g));
    CHECK(rep.pass);
  }

  TEST_CASE("family members pass and doubled members fail")
  {
    Grid g(1, 1.0, 256);
    const ClassSpec theta({ 1.0 }, { INFINITY }, { 12.0 });
    auto fam = build_family(theta, 2.0, 0.05, default_lower_bound_constants(theta, 2.0), 1.0, 11);
    REQUIRE(fam.W.size() >= 2);
    auto ug = default_u_grid(g);
    double worst = 0;
    for (std::size_t w = 1; w < fam.W.size(); ++w) {
      auto f = render_family_member(fam, fam.W[w], g);
      auto rep = check_membership(f, theta, ug);
      CHECK(rep.pass);
      worst = std::max(worst, rep.worst_ratio[0]);
    }
    // amplify until the family saturates the radius
    auto f = render_family_member(fam, fam.W[1], g);
    const double s = 2.0 / worst;
    CHECK_FALSE(check_membership(s * f, theta, ug).pass);
  }

  TEST_CASE("embedding examples")
  {
    auto e = embed(ClassSpec({ 1.0 }, { 1.0 }, { 1.0 }), 4.0);
    CHECK(e.gamma_bar[0] == doctest::Approx(0.25));
    CHECK(e.r_s[0] == 4.0);

    auto f = embed(ClassSpec({ 2.0, 3.0 }, { 3.0, 3.0 }, { 1.0, 1.0 }), 3.0);
    CHECK(f.gamma_bar[0] == doctest::Approx(2.0));
    CHECK(f.gamma_bar[1] == doctest::Approx(3.0));
    CHECK(f.r_s == std::vector<double>{ 3.0, 3.0 });
    CHECK(f.valid);

    auto bad = embed(ClassSpec({ 0.5 }, { 1.0 }, { 1.0 }), 2.0);
    CHECK_FALSE(bad.valid);
    CHECK(bad.gamma_bar.size() == 1);
  }

  TEST_CASE("embedding agrees with the rate aggregates")
  {
    std::mt19937_64 eng(12);
    std::uniform_real_distribution<double> B(0.3, 4.0), R(1.0, 8.0), P(1.0, 8.0);
    std::bernoulli_distribution isinf(0.25);
    for (int i = 0; i < 50; ++i) {
      const int d = 1 + i % 3;
      std::vector<double> b(d), r(d), L(d, 1.0);
      for (int j = 0; j < d; ++j) {
        b[j] = B(eng);
        r[j] = isinf(eng) ? INFINITY : R(eng);
      }
      ClassSpec theta(b, r, L);
      auto pr = aggregates(theta, P(eng));
      auto e = embed(theta, pr.p_pm);
      for (int j = 0; j < d; ++j)
        if (std::isfinite(r[j])) {
          CHECK(e.gamma_bar[j] == doctest::Approx(pr.gamma_vec[j]).epsilon(1e-12));
          CHECK(e.r_s[j] == pr.q_vec[j]);
        }
    }
  }

  TEST_CASE("maximal function of constants and with every axis frozen")
  {
    Grid g(2, 1.0, 16);
    GridFunction c(g, 2.5);
    for (auto J : std::vector<std::vector<int>>{ {}, { 0 }, { 1 } }) {
      auto M = strong_maximal(c, J);
      for (double v : M.values)
        CHECK(v == doctest::Approx(2.5));
    }
    std::mt19937_64 eng(1);
    std::uniform_real_distribution<double> U;
    GridFunction lam(g);
    for (auto& v : lam.values)
      v = U(eng);
    CHECK(strong_maximal(lam, { 0, 1 }).values == lam.values);
    GridFunction neg(g, -1.0);
    CHECK_THROWS(strong_maximal(neg, {}));
  }

  TEST_CASE("maximal function matches exhaustive boxes")
  {
    Grid g(2, 1.0, 8);
    std::mt19937_64 eng(2);
    std::exponential_distribution<double> E;
    GridFunction lam(g);
    for (auto& v : lam.values)
      v = E(eng);
    for (int cap : { 3, 8 }) {
      auto fast = strong_maximal(lam, {}, cap);
      auto slow = brute_maximal_2d(lam, cap);
      for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("maximal function of an indicator in one dimension")
  {
    Grid g(1, 1.0, 32);
    auto lam = tabulate(g, [](std::span<const double> x) { return x[0] >= 0 && x[0] <= 0.5 ? 1.0 : 0.0; });
    auto M = strong_maximal(lam, {}, 64);
    // from the leftmost cell the best box runs to x = 1/2
    const int ones = 8, left_zeros = 16;
    CHECK(M[0] == doctest::Approx(double(ones) / (left_zeros + ones)));
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(M[i] >= lam[i]);
  }

  TEST_CASE("maximal operator stays bounded in L_r")
  {
    for (double r : { 2.0, 4.0 }) {
      double worst_coarse = 0, worst_fine = 0;
      for (int n : { 32, 64 }) {
        Grid g(2, 1.0, n);
        std::mt19937_64 eng(40 + n);
        std::uniform_real_distribution<double> U(-0.8, 0.8), W(0.05, 0.4);
        double worst = 0;
        for (int i = 0; i < 25; ++i) {
          double c0 = U(eng), c1 = U(eng), w0 = W(eng), w1 = W(eng);
          auto lam = tabulate(g, [&](std::span<const double> x) {
            return std::abs(x[0] - c0) < w0 && std::abs(x[1] - c1) < w1 ? 1.0 : 0.0;
          });
          if (lp_norm(lam, r) == 0)
            continue;
          worst = std::max(worst, lp_norm(strong_maximal(lam, {}, n), r) / lp_norm(lam, r));
        }
        (n == 32 ? worst_coarse : worst_fine) = worst;
      }
      CHECK(std::isfinite(worst_fine));
      CHECK(worst_fine >= 1.0);
      CHECK(worst_fine <= 2 * worst_coarse);
    }
  }
}
