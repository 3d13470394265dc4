#include "wnlab/nikolskii.hpp"
#include "wnlab/rates.hpp"
#include "wnlab/selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wnlab {

namespace {

double binom(int n, int k)
{
  double c = 1.0;
  for (int i = 1; i <= k; ++i)
    c = c * (n - k + i) / i;
  return c;
}

int aligned_steps(const Grid& grid, double u)
{
  double m = u / grid.step();
  double r = std::round(m);
  if (std::abs(m - r) > 1e-9 * std::max(1.0, std::abs(m)))
    throw std::invalid_argument("difference step is not a multiple of the grid step");
  return static_cast<int>(r);
}

} // namespace

GridFunction difference(const GridFunction& g, double u, int j, int k)
{
  const Grid& grid = g.grid;
  if (j < 0 || j >= grid.dim())
    throw std::invalid_argument("axis out of range");
  if (k < 1)
    throw std::invalid_argument("difference order must be positive");
  const int m = aligned_steps(grid, u);
  const int n = grid.points_per_axis();
  const std::size_t stride = grid.stride(j);
  GridFunction out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const int xi = grid.unravel(i)[j];
    auto at = [&](int shift) {
      int t = xi + shift;
      return (t < 0 || t >= n) ? 0.0 : g.values[i + static_cast<std::ptrdiff_t>(shift) * stride];
    };
    double s = 0.0;
    for (int l = 1; l <= k; ++l) {
      double sign = ((l + k) % 2) ? -1.0 : 1.0;
      s += sign * binom(k, l) * (at(l * m) - at(0));
    }
    out.values[i] = s;
  }
  return out;
}

double difference_norm(const GridFunction& g, double u, int j, int k, double r)
{
  const Grid& grid = g.grid;
  if (j < 0 || j >= grid.dim())
    throw std::invalid_argument("axis out of range");
  const int m = aligned_steps(grid, u);
  const int n = grid.points_per_axis();
  const std::size_t stride = grid.stride(j);
  const std::size_t outer = grid.size() / (stride * n);
  const int lo = std::min(0, -k * m);
  const int hi = std::max(n - 1, n - 1 - k * m);
  std::vector<double> coef(k + 1);
  for (int l = 0; l <= k; ++l)
    coef[l] = (((k - l) % 2) ? -1.0 : 1.0) * binom(k, l);

  double acc = 0.0;
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < stride; ++in) {
      const std::size_t base = o * stride * n + in;
      for (int x = lo; x <= hi; ++x) {
        double s = 0.0;
        for (int l = 0; l <= k; ++l) {
          int t = x + l * m;
          if (t >= 0 && t < n)
            s += coef[l] * g.values[base + t * stride];
        }
        s = std::abs(s);
        if (std::isinf(r))
          acc = std::max(acc, s);
        else
          acc += r == 2.0 ? s * s : std::pow(s, r);
      }
    }
  }
  if (std::isinf(r))
    return acc;
  return std::pow(acc * grid.cell_volume(), 1.0 / r);
}

std::vector<double> default_u_grid(const Grid& grid)
{
  std::vector<double> u;
  const double limit = 2.0 * grid.half_width() / 8.0;
  for (double s = grid.step(); s <= limit * (1.0 + 1e-12); s *= 2.0)
    u.push_back(s);
  return u;
}

MembershipReport check_membership(const GridFunction& g,
                                  const ClassSpec& theta,
                                  const std::vector<double>& u_grid,
                                  double slack)
{
  const int d = g.grid.dim();
  if (theta.dim() != d)
    throw std::invalid_argument("class dimension does not match the grid");
  MembershipReport rep;
  rep.slack = slack;
  rep.pass = true;
  const auto k = theta.k();
  for (int j = 0; j < d; ++j) {
    double nrm = lp_norm(g, theta.r[j]);
    rep.norms.push_back(nrm);
    rep.radii.push_back(theta.L[j]);
    if (nrm > theta.L[j] * (1.0 + slack))
      rep.pass = false;
    double worst = 0.0, worst_u = 0.0;
    for (double u : u_grid) {
      double ratio = difference_norm(g, u, j, k[j], theta.r[j]) /
                     (theta.L[j] * std::pow(std::abs(u), theta.beta[j]));
      if (ratio > worst) {
        worst = ratio;
        worst_u = u;
      }
    }
    rep.worst_ratio.push_back(worst);
    rep.worst_u.push_back(worst_u);
    if (worst > 1.0 + slack)
      rep.pass = false;
  }
  return rep;
}

Embedding embed(const ClassSpec& theta, double s)
{
  if (!(s >= 1.0))
    throw std::invalid_argument("embedding index must be >= 1");
  auto pr = aggregates(theta, s);
  Embedding e;
  const double ts = tau(pr, s);
  e.r_star = 0.0;
  for (int j = 0; j < theta.dim(); ++j) {
    double gb = theta.beta[j] * ts / tau(pr, theta.r[j]);
    e.gamma_bar.push_back(gb);
    e.gamma.push_back(std::min(gb, theta.beta[j]));
    e.r_s.push_back(std::max(theta.r[j], s));
    e.r_star = std::max(e.r_star, e.r_s.back());
  }
  e.valid = tau(pr, e.r_star) > 0.0;
  return e;
}

namespace {

// max over intervals [a, a+len) containing x, len <= cap, of the mean of v
std::vector<double> interval_max_1d(const std::vector<double>& v, int cap)
{
  const int n = static_cast<int>(v.size());
  std::vector<double> P(n + 1, 0.0), out(n, 0.0);
  for (int i = 0; i < n; ++i)
    P[i + 1] = P[i] + v[i];
  const int L = std::min(cap, n);
  std::vector<double> u(L);
  for (int a = 0; a < n; ++a) {
    const int lmax = std::min(L, n - a);
    // u[t] = max over len > t of mean(a, len): covers x = a + t
    double run = -1.0;
    for (int len = lmax; len >= 1; --len) {
      run = std::max(run, (P[a + len] - P[a]) / len);
      u[len - 1] = run;
    }
    for (int t = 0; t < lmax; ++t)
      out[a + t] = std::max(out[a + t], u[t]);
  }
  return out;
}

// values laid out row-major over f axes of length n each
std::vector<double> box_max(const std::vector<double>& v, int f, int n, int cap)
{
  if (f == 1)
    return interval_max_1d(v, cap);
  std::size_t inner = 1;
  for (int i = 1; i < f; ++i)
    inner *= n;
  std::vector<double> P((n + 1) * inner, 0.0);
  for (int i = 0; i < n; ++i)
    for (std::size_t r = 0; r < inner; ++r)
      P[(i + 1) * inner + r] = P[i * inner + r] + v[i * inner + r];
  std::vector<double> out(v.size(), 0.0), collapsed(inner);
  const int L = std::min(cap, n);
  for (int a = 0; a < n; ++a) {
    for (int len = 1; len <= L && a + len <= n; ++len) {
      for (std::size_t r = 0; r < inner; ++r)
        collapsed[r] = (P[(a + len) * inner + r] - P[a * inner + r]) / len;
      auto G = box_max(collapsed, f - 1, n, cap);
      for (int x = a; x < a + len; ++x)
        for (std::size_t r = 0; r < inner; ++r)
          out[x * inner + r] = std::max(out[x * inner + r], G[r]);
    }
  }
  return out;
}

} // namespace

GridFunction strong_maximal(const GridFunction& lambda, const std::vector<int>& frozen, int cap)
{
  const Grid& grid = lambda.grid;
  const int d = grid.dim();
  const int n = grid.points_per_axis();
  for (double v : lambda.values)
    if (v < 0.0)
      throw std::invalid_argument("maximal function needs a nonnegative input");
  if (cap < 1)
    throw std::invalid_argument("box cap must be positive");
  std::vector<bool> is_frozen(d, false);
  for (int j : frozen) {
    if (j < 0 || j >= d)
      throw std::invalid_argument("axis out of range");
    is_frozen[j] = true;
  }
  std::vector<int> free_axes, frozen_axes;
  for (int j = 0; j < d; ++j)
    (is_frozen[j] ? frozen_axes : free_axes).push_back(j);
  if (free_axes.empty())
    return lambda;

  const int f = static_cast<int>(free_axes.size());
  std::size_t nfree = 1, nfix = 1;
  for (int i = 0; i < f; ++i)
    nfree *= n;
  for (std::size_t i = 0; i < frozen_axes.size(); ++i)
    nfix *= n;

  GridFunction out(grid);
  std::vector<double> sub(nfree);
  for (std::size_t fx = 0; fx < nfix; ++fx) {
    std::array<int, 3> idx{ 0, 0, 0 };
    std::size_t t = fx;
    for (int i = static_cast<int>(frozen_axes.size()) - 1; i >= 0; --i) {
      idx[frozen_axes[i]] = static_cast<int>(t % n);
      t /= n;
    }
    auto flat_of = [&](std::size_t fr) {
      auto id = idx;
      for (int i = f - 1; i >= 0; --i) {
        id[free_axes[i]] = static_cast<int>(fr % n);
        fr /= n;
      }
      return grid.ravel(id);
    };
    for (std::size_t fr = 0; fr < nfree; ++fr)
      sub[fr] = lambda.values[flat_of(fr)];
    auto M = box_max(sub, f, n, cap);
    for (std::size_t fr = 0; fr < nfree; ++fr)
      out.values[flat_of(fr)] = M[fr];
  }
  return out;
}

} // namespace wnlab
