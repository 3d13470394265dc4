#pragma once

#include "wnlab/class_spec.hpp"
#include "wnlab/model.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace wnlab {

inline constexpr int max_level = 40;

//! lattice bandwidth e^{-s-2}
double h_of(int s);
//! smallest level whose bandwidth does not exceed `h`
int level_at_most(double h);

using Levels = std::array<int, 3>;

struct BandwidthVector
{
  std::vector<int> levels;

  std::vector<double> values() const;
  double volume() const;
  bool operator==(const BandwidthVector&) const = default;
};

//! Dyadic tiling of (-b-1, b+1)^d into 2^{level d} half-open boxes.
class DyadicPartition
{
public:
  DyadicPartition(int level, int dim, double b);

  int level() const { return level_; }
  int dim() const { return dim_; }
  double half_width() const { return b_; }
  int cells_per_axis() const { return 1 << level_; }
  std::size_t cell_count() const;
  double width() const { return 2.0 * (b_ + 1.0) / cells_per_axis(); }
  //! t_k = -(b+1) + (b+1) k 2^{1-level}
  double edge(int k) const { return -(b_ + 1.0) + k * width(); }

  int axis_cell(double x) const;
  std::size_t cell_of(std::span<const double> x) const;
  std::array<int, 3> unravel(std::size_t cell) const;
  std::size_t ravel(const std::array<int, 3>& idx) const;
  //! Lebesgue measure of the cell intersected with (-b,b)^d
  double measure_in_domain(std::size_t cell) const;

  bool operator==(const DyadicPartition&) const = default;

private:
  int level_, dim_;
  double b_;
};

DyadicPartition dyadic_partition(int n, int d, double b);

//! Piecewise constant bandwidth field on a dyadic partition.
class BandwidthField
{
public:
  BandwidthField(const Grid& grid, int partition_level, std::vector<Levels> cell_levels);
  static BandwidthField constant(const Grid& grid, const std::vector<int>& levels);

  const Grid& grid() const { return grid_; }
  const DyadicPartition& partition() const { return part_; }
  int partition_level() const { return part_.level(); }
  const std::vector<Levels>& cell_levels() const { return cells_; }

  std::size_t cell_at(std::size_t grid_index) const { return (*point_cell_)[grid_index]; }
  const Levels& levels_at(std::size_t grid_index) const { return cells_[cell_at(grid_index)]; }
  double volume_at(std::size_t grid_index) const;

  //! one distinct level tuple over the cells that meet the domain
  bool is_constant() const;
  //! level tuple of a constant field
  Levels constant_levels() const;
  //! same field on a finer partition
  BandwidthField refine(int level) const;
  //! domain-averaged sum of levels, used for tie-breaking
  double mean_level_sum() const;
  //! canonical key (partition level plus levels of cells meeting the domain)
  std::vector<int> key() const;

  bool operator==(const BandwidthField& o) const;

private:
  Grid grid_;
  DyadicPartition part_;
  std::vector<Levels> cells_;
  std::shared_ptr<const std::vector<std::uint32_t>> point_cell_;
};

//! Field on Gamma_d(partition_level) whose domain cells get independent
//! levels drawn uniformly from [0, max_level_per_axis]; deterministic in seed.
BandwidthField random_bandwidth_field(const Grid& grid, int partition_level, int max_level_per_axis,
                                      std::uint64_t seed, std::uint64_t stream);

//! coordinatewise larger bandwidth (smaller level) on the common refinement
BandwidthField lattice_join(const BandwidthField& h, const BandwidthField& eta);

struct ComplexityParams
{
  double kappa = 0.5;
  double script_L = 1.0;
  double script_A = 1.0;
};

double complexity(const BandwidthField& h, double kappa);
bool member_Hd(const BandwidthField& h, double kappa, double script_L);

//! || V_h^{-1/2} ||_q over (-b,b)^d, computed from cell measures
double inv_sqrt_volume_norm(const BandwidthField& h, double q);

struct NormIndex
{
  int r = 0;
  bool ok = false;
  int cap = 64;
};

//! smallest r in {floor(p)+1, ...} with ||V^{-1/2}||_{rp/(r-p)} <= A
NormIndex norm_index_set(const BandwidthField& h, double script_A, double p, int cap = 64);
//! h lies in the integrability class with constant A
bool member_B(const BandwidthField& h, double script_A, double p, int cap = 64);

//! default tuning constants
double tuning_bandwidth(double eps);   // e^{-sqrt|ln eps|}
double tuning_integrability(double eps); // e^{ln^2 eps}

struct OracleGridOptions
{
  int ell = 2;                 // kernel order entering the truncation index
  double min_bandwidth = 0.0;  // stop once every component falls below this
  int cap = 10000;
};

struct OracleGrid
{
  std::vector<BandwidthVector> vectors; // distinct, in order of m
  std::vector<std::vector<double>> eta_bar; // continuous targets for each m
  std::vector<int> m_values;
  double phi = 0;
  long m_tilde = 0;
  bool m_tilde_infinite = false;
  long m_hat = -1;     // only in the sparse zone
  long m_used = 0;     // last m actually produced
};

//! switch index used in the sparse zone; throws ZoneMismatch elsewhere
long sparse_switch_index(const ClassSpec& theta, double p, double eps);
double oracle_phi(const ClassSpec& theta, double p, double eps);
OracleGrid oracle_bandwidth_grid(const ClassSpec& theta,
                                 double p,
                                 double eps,
                                 const OracleGridOptions& opts = {});

} // namespace wnlab
