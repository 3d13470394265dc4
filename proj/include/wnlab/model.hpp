#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace wnlab {

//! Uniform midpoint grid on the cube (-b,b)^d. Flat indices are row-major:
//! axis 0 varies slowest.
class Grid
{
public:
  Grid() = default;
  Grid(int dim, double half_width, int points_per_axis);

  int dim() const { return dim_; }
  double half_width() const { return b_; }
  int points_per_axis() const { return n_; }
  double step() const { return 2.0 * b_ / n_; }
  double cell_volume() const;
  std::size_t size() const { return size_; }

  //! midpoint of the i-th cell along any axis
  double coordinate(int i) const { return -b_ + (i + 0.5) * step(); }

  std::array<int, 3> unravel(std::size_t flat) const;
  std::size_t ravel(const std::array<int, 3>& idx) const;
  //! stride of axis j in the flat layout
  std::size_t stride(int j) const;
  std::array<double, 3> point(std::size_t flat) const;

  bool operator==(const Grid& other) const = default;

private:
  int dim_ = 1;
  double b_ = 1.0;
  int n_ = 4;
  std::size_t size_ = 4;
};

Grid make_grid(int d, double b, int n);

struct GridFunction
{
  Grid grid;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(const Grid& g, double fill = 0.0)
    : grid(g)
    , values(g.size(), fill)
  {}
  GridFunction(const Grid& g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

//! Evaluates `f` at every grid point.
GridFunction tabulate(const Grid& grid,
                      const std::function<double(std::span<const double>)>& f);

GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double c, const GridFunction& a);
GridFunction abs(const GridFunction& a);

void require_same_grid(const Grid& a, const Grid& b);

struct NoiseField
{
  Grid grid;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<double> increments; // each ~ N(0, cell volume)
};

NoiseField sample_noise(const Grid& grid,
                        std::uint64_t seed,
                        std::uint64_t stream = 0);

class Observation
{
public:
  Observation(GridFunction signal, NoiseField noise, double eps);

  const GridFunction& signal() const { return signal_; }
  const NoiseField& noise() const { return noise_; }
  double noise_level() const { return eps_; }
  const Grid& grid() const { return signal_.grid; }

private:
  GridFunction signal_;
  NoiseField noise_;
  double eps_;
};

//! Riemann-sum version of X_eps(g) = int f g + eps int g dW.
double apply_functional(const Observation& obs, const GridFunction& g);

// serialization
void write_csv(std::ostream& os, const GridFunction& g);
void write_binary(std::ostream& os, const GridFunction& g);
GridFunction read_binary(std::istream& is);

} // namespace wnlab
