#include "wnlab/model.hpp"
#include "wnlab/errors.hpp"
#include "wnlab/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace wnlab {

Grid::Grid(int dim, double half_width, int points_per_axis)
  : dim_(dim)
  , b_(half_width)
  , n_(points_per_axis)
{
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw std::invalid_argument("grid half-width must be positive");
  if (points_per_axis < 4 ||
      !std::has_single_bit(static_cast<unsigned>(points_per_axis)))
    throw std::invalid_argument("points per axis must be a power of two >= 4");
  size_ = 1;
  for (int j = 0; j < dim; ++j)
    size_ *= static_cast<std::size_t>(n_);
}

double Grid::cell_volume() const
{
  return std::pow(step(), dim_);
}

std::size_t Grid::stride(int j) const
{
  std::size_t s = 1;
  for (int k = j + 1; k < dim_; ++k)
    s *= static_cast<std::size_t>(n_);
  return s;
}

std::array<int, 3> Grid::unravel(std::size_t flat) const
{
  std::array<int, 3> idx{ 0, 0, 0 };
  for (int j = dim_ - 1; j >= 0; --j) {
    idx[j] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

std::size_t Grid::ravel(const std::array<int, 3>& idx) const
{
  std::size_t flat = 0;
  for (int j = 0; j < dim_; ++j)
    flat = flat * n_ + idx[j];
  return flat;
}

std::array<double, 3> Grid::point(std::size_t flat) const
{
  auto idx = unravel(flat);
  std::array<double, 3> x{ 0, 0, 0 };
  for (int j = 0; j < dim_; ++j)
    x[j] = coordinate(idx[j]);
  return x;
}

Grid make_grid(int d, double b, int n)
{
  return Grid(d, b, n);
}

GridFunction::GridFunction(const Grid& g, std::vector<double> v)
  : grid(g)
  , values(std::move(v))
{
  if (values.size() != grid.size())
    throw std::invalid_argument("value count does not match grid size");
  for (double x : values)
    if (!std::isfinite(x))
      throw std::invalid_argument("grid function values must be finite");
}

GridFunction tabulate(const Grid& grid,
                      const std::function<double(std::span<const double>)>& f)
{
  GridFunction out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto x = grid.point(i);
    out.values[i] = f(std::span<const double>(x.data(), grid.dim()));
  }
  return out;
}

void require_same_grid(const Grid& a, const Grid& b)
{
  if (!(a == b))
    throw GridMismatch("grid mismatch");
}

GridFunction operator+(const GridFunction& a, const GridFunction& b)
{
  require_same_grid(a.grid, b.grid);
  GridFunction out(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i)
    out.values[i] = a.values[i] + b.values[i];
  return out;
}

GridFunction operator-(const GridFunction& a, const GridFunction& b)
{
  require_same_grid(a.grid, b.grid);
  GridFunction out(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i)
    out.values[i] = a.values[i] - b.values[i];
  return out;
}

GridFunction operator*(double c, const GridFunction& a)
{
  GridFunction out(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i)
    out.values[i] = c * a.values[i];
  return out;
}

GridFunction abs(const GridFunction& a)
{
  GridFunction out(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i)
    out.values[i] = std::abs(a.values[i]);
  return out;
}

NoiseField sample_noise(const Grid& grid, std::uint64_t seed, std::uint64_t stream)
{
  NoiseField nf;
  nf.grid = grid;
  nf.seed = seed;
  nf.stream = stream;
  nf.increments.resize(grid.size());
  auto eng = make_engine(seed, stream);
  std::normal_distribution<double> normal(0.0, std::sqrt(grid.cell_volume()));
  for (auto& x : nf.increments)
    x = normal(eng);
  return nf;
}

Observation::Observation(GridFunction signal, NoiseField noise, double eps)
  : signal_(std::move(signal))
  , noise_(std::move(noise))
  , eps_(eps)
{
  require_same_grid(signal_.grid, noise_.grid);
  // eps = 0 is accepted for noiseless experiments
  if (!(eps >= 0.0 && eps < 1.0))
    throw std::invalid_argument("noise level must lie in [0,1)");
}

double apply_functional(const Observation& obs, const GridFunction& g)
{
  require_same_grid(obs.grid(), g.grid);
  const double delta = obs.grid().cell_volume();
  const auto& f = obs.signal().values;
  const auto& dw = obs.noise().increments;
  double det = 0.0, sto = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    det += f[i] * g.values[i];
    sto += g.values[i] * dw[i];
  }
  return det * delta + obs.noise_level() * sto;
}

void write_csv(std::ostream& os, const GridFunction& g)
{
  const int d = g.grid.dim();
  for (int j = 0; j < d; ++j)
    os << 'x' << j << ',';
  os << "value\n";
  char buf[64];
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto x = g.grid.point(i);
    for (int j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,", x[j]);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", g.values[i]);
    os << buf;
  }
}

namespace {

template<class T>
void put_le(std::ostream& os, T v)
{
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template<class T>
T get_le(std::istream& is)
{
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw std::runtime_error("truncated grid function dump");
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

} // namespace

// header: int32 d, float64 b, int32 n; then n^d float64 values
void write_binary(std::ostream& os, const GridFunction& g)
{
  put_le<std::int32_t>(os, g.grid.dim());
  put_le<double>(os, g.grid.half_width());
  put_le<std::int32_t>(os, g.grid.points_per_axis());
  for (double v : g.values)
    put_le<double>(os, v);
}

GridFunction read_binary(std::istream& is)
{
  int d = get_le<std::int32_t>(is);
  double b = get_le<double>(is);
  int n = get_le<std::int32_t>(is);
  Grid grid(d, b, n);
  std::vector<double> v(grid.size());
  for (auto& x : v)
    x = get_le<double>(is);
  return GridFunction(grid, std::move(v));
}

} // namespace wnlab
