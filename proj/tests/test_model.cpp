#include "doctest.h"

#include "wnlab/model.hpp"

#include <cmath>
#include <sstream>

using namespace wnlab;

TEST_SUITE("model")
{
  TEST_CASE("midpoint grid in one dimension")
  {
    Grid g = make_grid(1, 1.0, 4);
    CHECK(g.size() == 4);
    CHECK(g.cell_volume() == doctest::Approx(0.5));
    const double expect[] = { -0.75, -0.25, 0.25, 0.75 };
    for (int i = 0; i < 4; ++i)
      CHECK(g.coordinate(i) == doctest::Approx(expect[i]));
  }

  TEST_CASE("tensor grid in two dimensions")
  {
    Grid g = make_grid(2, 1.0, 4);
    CHECK(g.size() == 16);
    CHECK(g.cell_volume() == doctest::Approx(0.25));
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(g.ravel(g.unravel(i)) == i);
    auto x = g.point(1);
    CHECK(x[0] == doctest::Approx(-0.75));
    CHECK(x[1] == doctest::Approx(-0.25));
  }

  TEST_CASE("grid preconditions")
  {
    CHECK_THROWS_AS(make_grid(1, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(4, 1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1, -1.0, 4), std::invalid_argument);
  }

  TEST_CASE("grid functions reject non-finite values")
  {
    Grid g = make_grid(1, 1.0, 4);
    CHECK_THROWS(GridFunction(g, std::vector<double>{ 0, 1, NAN, 2 }));
    CHECK_THROWS(GridFunction(g, std::vector<double>{ 0, 1 }));
  }

  TEST_CASE("noise is reproducible and seed dependent")
  {
    Grid g = make_grid(1, 1.0, 256);
    auto a = sample_noise(g, 7);
    auto b = sample_noise(g, 7);
    auto c = sample_noise(g, 8);
    CHECK(a.increments == b.increments);
    CHECK(a.increments != c.increments);
    CHECK(sample_noise(g, 7, 1).increments != a.increments);
  }

  TEST_CASE("noise increments have variance equal to the cell volume")
  {
    Grid g = make_grid(1, 1.0, 256);
    auto w = sample_noise(g, 7);
    double s = 0, s2 = 0;
    for (double x : w.increments) {
      double z = x / std::sqrt(g.cell_volume());
      s += z;
      s2 += z * z;
    }
    const double n = 256;
    double var = (s2 - s * s / n) / (n - 1);
    CHECK(var >= 0.8);
    CHECK(var <= 1.2);
    CHECK(std::abs(s / n) <= 5.0 / std::sqrt(n));
  }

  TEST_CASE("functional of constants is exact without noise")
  {
    Grid g = make_grid(1, 1.0, 64);
    GridFunction one(g, 1.0);
    Observation obs(one, sample_noise(g, 1), 0.0);
    CHECK(apply_functional(obs, one) == doctest::Approx(2.0).epsilon(1e-14));
    Observation noisy(one, sample_noise(g, 1), 0.3);
    CHECK(apply_functional(noisy, GridFunction(g)) == 0.0);
  }

  TEST_CASE("functional is linear")
  {
    Grid g = make_grid(2, 1.0, 16);
    auto f = tabulate(g, [](std::span<const double> x) { return std::sin(x[0]) + x[1]; });
    auto g1 = tabulate(g, [](std::span<const double> x) { return x[0] * x[1]; });
    auto g2 = tabulate(g, [](std::span<const double> x) { return std::cos(3 * x[1]); });
    Observation obs(f, sample_noise(g, 3), 0.2);
    double lhs = apply_functional(obs, 2.0 * g1 + (-0.5) * g2);
    double rhs = 2.0 * apply_functional(obs, g1) - 0.5 * apply_functional(obs, g2);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
  }

  TEST_CASE("stochastic part of the functional has variance 2 eps^2 for g = 1 on (-1,1)")
  {
    Grid g = make_grid(1, 1.0, 16);
    GridFunction zero(g), one(g, 1.0);
    const double eps = 0.1;
    double s2 = 0;
    const int reps = 10000;
    for (int i = 0; i < reps; ++i) {
      Observation obs(zero, sample_noise(g, 11, i), eps);
      double v = apply_functional(obs, one);
      s2 += v * v;
    }
    CHECK(std::sqrt(s2 / reps) == doctest::Approx(eps * std::sqrt(2.0)).epsilon(0.05));
  }

  TEST_CASE("observation preconditions")
  {
    Grid g = make_grid(1, 1.0, 4), h = make_grid(1, 1.0, 8);
    CHECK_THROWS(Observation(GridFunction(g), sample_noise(h, 1), 0.1));
    CHECK_THROWS(Observation(GridFunction(g), sample_noise(g, 1), 1.0));
    CHECK_THROWS(Observation(GridFunction(g), sample_noise(g, 1), -0.1));
  }

  TEST_CASE("csv and binary round trip")
  {
    Grid g = make_grid(2, 0.5, 4);
    auto f = tabulate(g, [](std::span<const double> x) { return x[0] - 2 * x[1]; });
    std::stringstream bin;
    write_binary(bin, f);
    auto back = read_binary(bin);
    CHECK(back.grid == g);
    CHECK(back.values == f.values);
    std::stringstream csv;
    write_csv(csv, f);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "x0,x1,value");
    int rows = 0;
    for (std::string line; std::getline(csv, line);)
      ++rows;
    CHECK(rows == 16);
  }
}
