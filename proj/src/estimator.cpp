#include "wnlab/estimator.hpp"
#include "wnlab/errors.hpp"

#include <cmath>
#include <map>
#include <string>

namespace wnlab {

int resolvability_floor(const Grid& grid)
{
  const double h_min = 2.0 * grid.step();
  int s = static_cast<int>(std::floor(-std::log(h_min) - 2.0));
  while (s >= 0 && std::exp(-s - 2.0) < h_min)
    --s;
  while (std::exp(-(s + 1) - 2.0) >= h_min)
    ++s;
  return s;
}

namespace {

void check_resolvable(const Grid& grid, int level)
{
  if (h_of(level) < 2.0 * grid.step())
    throw ResolutionError("bandwidth level " + std::to_string(level) +
                            " is below two grid cells",
                          level);
}

// convolve along axis j with zero extension
void convolve_axis(const std::vector<double>& in,
                   std::vector<double>& out,
                   const Grid& grid,
                   int j,
                   const std::vector<double>& w)
{
  const int n = grid.points_per_axis();
  const int R = static_cast<int>(w.size() / 2);
  const std::size_t stride = grid.stride(j);
  const std::size_t outer = grid.size() / (stride * n);
  out.assign(in.size(), 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t inner = 0; inner < stride; ++inner) {
      const std::size_t base = o * stride * n + inner;
      for (int i = 0; i < n; ++i) {
        const int lo = std::max(-R, -i);
        const int hi = std::min(R, n - 1 - i);
        double s = 0.0;
        for (int k = lo; k <= hi; ++k)
          s += w[k + R] * in[base + (i + k) * stride];
        out[base + i * stride] = s;
      }
    }
  }
}

struct WeightCache
{
  const ScalarKernel& k;
  double step;
  std::map<int, std::vector<double>> cache;

  const std::vector<double>& get(int level)
  {
    auto it = cache.find(level);
    if (it == cache.end())
      it = cache.emplace(level, axis_weights(k, level, step)).first;
    return it->second;
  }
};

GridFunction separable(const GridFunction& f, const Levels& lv, const ProductKernel& K)
{
  const Grid& grid = f.grid;
  std::vector<double> cur = f.values, next;
  for (int j = 0; j < grid.dim(); ++j) {
    check_resolvable(grid, lv[j]);
    convolve_axis(cur, next, grid, j, axis_weights(K.scalar, lv[j], grid.step()));
    cur.swap(next);
  }
  GridFunction out(grid);
  out.values = std::move(cur);
  return out;
}

} // namespace

std::vector<double> axis_weights(const ScalarKernel& k, int level, double step)
{
  const double h = h_of(level);
  const int R = static_cast<int>(std::ceil(k.support_radius() * h / step + 0.5));
  std::vector<double> w(2 * R + 1);
  double prev = k.cdf((-R - 0.5) * step / h);
  for (int i = -R; i <= R; ++i) {
    double cur = k.cdf((i + 0.5) * step / h);
    w[i + R] = cur - prev;
    prev = cur;
  }
  return w;
}

GridFunction smoother_pointwise(const GridFunction& f, const BandwidthField& h, const ProductKernel& K)
{
  const Grid& grid = f.grid;
  require_same_grid(grid, h.grid());
  const int d = grid.dim();
  const int n = grid.points_per_axis();
  WeightCache wc{ K.scalar, grid.step(), {} };
  for (const auto& lv : h.cell_levels())
    for (int j = 0; j < d; ++j)
      check_resolvable(grid, lv[j]);

  GridFunction out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& lv = h.levels_at(i);
    const auto x = grid.unravel(i);
    const std::vector<double>* w[3] = { nullptr, nullptr, nullptr };
    int lo[3] = { 0, 0, 0 }, hi[3] = { 0, 0, 0 }, R[3] = { 0, 0, 0 };
    for (int j = 0; j < d; ++j) {
      w[j] = &wc.get(lv[j]);
      R[j] = static_cast<int>(w[j]->size() / 2);
      lo[j] = std::max(-R[j], -x[j]);
      hi[j] = std::min(R[j], n - 1 - x[j]);
    }
    double s = 0.0;
    if (d == 1) {
      for (int a = lo[0]; a <= hi[0]; ++a)
        s += (*w[0])[a + R[0]] * f.values[x[0] + a];
    } else if (d == 2) {
      for (int a = lo[0]; a <= hi[0]; ++a) {
        double sa = 0.0;
        const std::size_t row = static_cast<std::size_t>(x[0] + a) * n;
        for (int b = lo[1]; b <= hi[1]; ++b)
          sa += (*w[1])[b + R[1]] * f.values[row + x[1] + b];
        s += (*w[0])[a + R[0]] * sa;
      }
    } else {
      for (int a = lo[0]; a <= hi[0]; ++a) {
        double sa = 0.0;
        for (int b = lo[1]; b <= hi[1]; ++b) {
          double sb = 0.0;
          const std::size_t row = (static_cast<std::size_t>(x[0] + a) * n + (x[1] + b)) * n;
          for (int c = lo[2]; c <= hi[2]; ++c)
            sb += (*w[2])[c + R[2]] * f.values[row + x[2] + c];
          sa += (*w[1])[b + R[1]] * sb;
        }
        s += (*w[0])[a + R[0]] * sa;
      }
    }
    out.values[i] = s;
  }
  return out;
}

GridFunction smoother(const GridFunction& f, const BandwidthField& h, const ProductKernel& K)
{
  require_same_grid(f.grid, h.grid());
  if (h.is_constant())
    return separable(f, h.constant_levels(), K);
  return smoother_pointwise(f, h, K);
}

namespace {

GridFunction noise_density(const Observation& obs)
{
  GridFunction z(obs.grid());
  const double inv = 1.0 / obs.grid().cell_volume();
  for (std::size_t i = 0; i < z.size(); ++i)
    z.values[i] = obs.noise().increments[i] * inv;
  return z;
}

} // namespace

EstimateDecomposition kernel_estimate(const Observation& obs, const BandwidthField& h, const ProductKernel& K)
{
  EstimateDecomposition out;
  out.deterministic = smoother(obs.signal(), h, K);
  out.stochastic = obs.noise_level() * smoother(noise_density(obs), h, K);
  out.estimate = out.deterministic + out.stochastic;
  return out;
}

GridFunction estimate_only(const Observation& obs, const BandwidthField& h, const ProductKernel& K)
{
  GridFunction y(obs.grid());
  const double inv = obs.noise_level() / obs.grid().cell_volume();
  for (std::size_t i = 0; i < y.size(); ++i)
    y.values[i] = obs.signal().values[i] + inv * obs.noise().increments[i];
  return smoother(y, h, K);
}

GridFunction kernel_window(const Grid& grid, const BandwidthField& h, const ProductKernel& K, std::size_t x_index)
{
  require_same_grid(grid, h.grid());
  const int d = grid.dim();
  const auto& lv = h.levels_at(x_index);
  const auto x = grid.unravel(x_index);
  std::vector<std::vector<double>> w(d);
  for (int j = 0; j < d; ++j) {
    check_resolvable(grid, lv[j]);
    w[j] = axis_weights(K.scalar, lv[j], grid.step());
  }
  GridFunction g(grid);
  const double inv = 1.0 / grid.cell_volume();
  for (std::size_t t = 0; t < grid.size(); ++t) {
    auto ti = grid.unravel(t);
    double v = inv;
    for (int j = 0; j < d && v != 0.0; ++j) {
      int R = static_cast<int>(w[j].size() / 2);
      int off = ti[j] - x[j];
      v = (off < -R || off > R) ? 0.0 : v * w[j][off + R];
    }
    g.values[t] = v;
  }
  return g;
}

BiasTerms bias_terms(const GridFunction& f, const BandwidthField& h, const BandwidthField& eta, const ProductKernel& K)
{
  auto s_join = smoother(f, lattice_join(h, eta), K);
  auto s_eta = smoother(f, eta, K);
  auto s_h = smoother(f, h, K);
  return { abs(s_join - s_eta), abs(s_h - f) };
}

DirectionalBias directional_bias(const GridFunction& f, const BandwidthVector& h, const ProductKernel& K, int j)
{
  const Grid& grid = f.grid;
  if (static_cast<int>(h.levels.size()) != grid.dim())
    throw std::invalid_argument("bandwidth vector dimension mismatch");
  if (j < 0 || j >= grid.dim())
    throw std::invalid_argument("axis out of range");
  check_resolvable(grid, h.levels[j]);
  DirectionalBias out{ GridFunction(grid), resolvability_floor(grid) };
  std::vector<double> conv;
  for (int s = h.levels[j]; s <= out.floor_level; ++s) {
    convolve_axis(f.values, conv, grid, j, axis_weights(K.scalar, s, grid.step()));
    for (std::size_t i = 0; i < conv.size(); ++i)
      out.values.values[i] = std::max(out.values.values[i], std::abs(conv[i] - f.values[i]));
  }
  return out;
}

} // namespace wnlab
