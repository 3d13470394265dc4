#include "wnlab/bandwidths.hpp"
#include "wnlab/rng.hpp"
#include "wnlab/errors.hpp"
#include "wnlab/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace wnlab {

double h_of(int s)
{
  if (s < 0)
    throw std::invalid_argument("bandwidth level must be nonnegative");
  return std::exp(-s - 2.0);
}

int level_at_most(double h)
{
  if (!(h > 0.0))
    throw std::invalid_argument("bandwidth must be positive");
  if (h >= h_of(0))
    return 0;
  int s = static_cast<int>(std::ceil(-std::log(h) - 2.0));
  while (s > 0 && h_of(s - 1) <= h)
    --s;
  while (h_of(s) > h)
    ++s;
  return s;
}

std::vector<double> BandwidthVector::values() const
{
  std::vector<double> v;
  for (int s : levels)
    v.push_back(h_of(s));
  return v;
}

double BandwidthVector::volume() const
{
  double lv = 0.0;
  for (int s : levels)
    lv -= s + 2.0;
  return std::exp(lv);
}

DyadicPartition::DyadicPartition(int level, int dim, double b)
  : level_(level)
  , dim_(dim)
  , b_(b)
{
  if (level < 0 || level > 20)
    throw std::invalid_argument("partition level must be in [0,20]");
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("partition dimension must be 1, 2 or 3");
  if (level * dim > 30)
    throw std::invalid_argument("partition has too many cells");
}

std::size_t DyadicPartition::cell_count() const
{
  return std::size_t{ 1 } << (level_ * dim_);
}

int DyadicPartition::axis_cell(double x) const
{
  int k = static_cast<int>(std::floor((x + b_ + 1.0) / width()));
  return std::clamp(k, 0, cells_per_axis() - 1);
}

std::size_t DyadicPartition::cell_of(std::span<const double> x) const
{
  std::array<int, 3> idx{ 0, 0, 0 };
  for (int j = 0; j < dim_; ++j)
    idx[j] = axis_cell(x[j]);
  return ravel(idx);
}

std::array<int, 3> DyadicPartition::unravel(std::size_t cell) const
{
  std::array<int, 3> idx{ 0, 0, 0 };
  const std::size_t m = cells_per_axis();
  for (int j = dim_ - 1; j >= 0; --j) {
    idx[j] = static_cast<int>(cell % m);
    cell /= m;
  }
  return idx;
}

std::size_t DyadicPartition::ravel(const std::array<int, 3>& idx) const
{
  std::size_t c = 0;
  for (int j = 0; j < dim_; ++j)
    c = c * cells_per_axis() + idx[j];
  return c;
}

double DyadicPartition::measure_in_domain(std::size_t cell) const
{
  auto idx = unravel(cell);
  double m = 1.0;
  for (int j = 0; j < dim_; ++j) {
    double lo = std::max(edge(idx[j]), -b_);
    double hi = std::min(edge(idx[j] + 1), b_);
    m *= std::max(0.0, hi - lo);
  }
  return m;
}

DyadicPartition dyadic_partition(int n, int d, double b)
{
  return DyadicPartition(n, d, b);
}

BandwidthField::BandwidthField(const Grid& grid, int partition_level, std::vector<Levels> cell_levels)
  : grid_(grid)
  , part_(partition_level, grid.dim(), grid.half_width())
  , cells_(std::move(cell_levels))
{
  if (cells_.size() != part_.cell_count())
    throw std::invalid_argument("one level tuple per partition cell is required");
  for (auto& lv : cells_) {
    for (int j = 0; j < 3; ++j) {
      if (j >= grid.dim())
        lv[j] = 0;
      else if (lv[j] < 0 || lv[j] > max_level)
        throw std::invalid_argument("bandwidth level out of range");
    }
  }
  const int n = grid.points_per_axis();
  std::vector<int> axis(n);
  for (int i = 0; i < n; ++i)
    axis[i] = part_.axis_cell(grid.coordinate(i));
  auto pc = std::make_shared<std::vector<std::uint32_t>>(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto gi = grid.unravel(i);
    std::array<int, 3> ci{ 0, 0, 0 };
    for (int j = 0; j < grid.dim(); ++j)
      ci[j] = axis[gi[j]];
    (*pc)[i] = static_cast<std::uint32_t>(part_.ravel(ci));
  }
  point_cell_ = std::move(pc);
}

BandwidthField BandwidthField::constant(const Grid& grid, const std::vector<int>& levels)
{
  if (static_cast<int>(levels.size()) != grid.dim())
    throw std::invalid_argument("constant field needs one level per axis");
  Levels lv{ 0, 0, 0 };
  std::copy(levels.begin(), levels.end(), lv.begin());
  return BandwidthField(grid, 0, { lv });
}

double BandwidthField::volume_at(std::size_t grid_index) const
{
  const auto& lv = levels_at(grid_index);
  double e = 0.0;
  for (int j = 0; j < grid_.dim(); ++j)
    e -= lv[j] + 2.0;
  return std::exp(e);
}

bool BandwidthField::is_constant() const
{
  const Levels* first = nullptr;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    if (part_.measure_in_domain(c) <= 0.0)
      continue;
    if (!first)
      first = &cells_[c];
    else if (cells_[c] != *first)
      return false;
  }
  return true;
}

Levels BandwidthField::constant_levels() const
{
  if (!is_constant())
    throw std::invalid_argument("bandwidth field is not constant");
  for (std::size_t c = 0; c < cells_.size(); ++c)
    if (part_.measure_in_domain(c) > 0.0)
      return cells_[c];
  return cells_.front();
}

BandwidthField BandwidthField::refine(int level) const
{
  if (level < part_.level())
    throw std::invalid_argument("refinement level below current level");
  if (level == part_.level())
    return *this;
  DyadicPartition fine(level, grid_.dim(), grid_.half_width());
  const int shift = level - part_.level();
  std::vector<Levels> out(fine.cell_count());
  for (std::size_t c = 0; c < out.size(); ++c) {
    auto idx = fine.unravel(c);
    for (int j = 0; j < grid_.dim(); ++j)
      idx[j] >>= shift;
    out[c] = cells_[part_.ravel(idx)];
  }
  return BandwidthField(grid_, level, std::move(out));
}

double BandwidthField::mean_level_sum() const
{
  double total = 0.0, mass = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    double m = part_.measure_in_domain(c);
    if (m <= 0.0)
      continue;
    int s = 0;
    for (int j = 0; j < grid_.dim(); ++j)
      s += cells_[c][j];
    total += m * s;
    mass += m;
  }
  return total / mass;
}

std::vector<int> BandwidthField::key() const
{
  std::vector<int> k{ part_.level() };
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    if (part_.measure_in_domain(c) <= 0.0)
      continue;
    for (int j = 0; j < grid_.dim(); ++j)
      k.push_back(cells_[c][j]);
  }
  return k;
}

bool BandwidthField::operator==(const BandwidthField& o) const
{
  return grid_ == o.grid_ && part_ == o.part_ && cells_ == o.cells_;
}

BandwidthField random_bandwidth_field(const Grid& grid, int partition_level, int max_level_per_axis,
                                      std::uint64_t seed, std::uint64_t stream)
{
  if (max_level_per_axis < 0 || max_level_per_axis > max_level)
    throw std::invalid_argument("level range out of bounds");
  DyadicPartition part(partition_level, grid.dim(), grid.half_width());
  auto eng = make_engine(seed, stream);
  std::uniform_int_distribution<int> pick(0, max_level_per_axis);
  std::vector<Levels> cells(part.cell_count(), Levels{ 0, 0, 0 });
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (part.measure_in_domain(c) <= 0.0)
      continue;
    for (int j = 0; j < grid.dim(); ++j)
      cells[c][j] = pick(eng);
  }
  return BandwidthField(grid, partition_level, std::move(cells));
}

BandwidthField lattice_join(const BandwidthField& h, const BandwidthField& eta)
{
  require_same_grid(h.grid(), eta.grid());
  const int level = std::max(h.partition_level(), eta.partition_level());
  auto a = h.refine(level);
  auto b = eta.refine(level);
  std::vector<Levels> out(a.cell_levels().size());
  for (std::size_t c = 0; c < out.size(); ++c)
    for (int j = 0; j < 3; ++j)
      out[c][j] = std::min(a.cell_levels()[c][j], b.cell_levels()[c][j]);
  return BandwidthField(h.grid(), level, std::move(out));
}

double complexity(const BandwidthField& h, double kappa)
{
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::invalid_argument("complexity exponent must lie in (0,1)");
  std::map<Levels, double> level_sets;
  const auto& part = h.partition();
  for (std::size_t c = 0; c < h.cell_levels().size(); ++c) {
    double m = part.measure_in_domain(c);
    if (m > 0.0)
      level_sets[h.cell_levels()[c]] += m;
  }
  double s = 0.0;
  for (const auto& [lv, m] : level_sets)
    s += std::pow(m, kappa);
  return s;
}

bool member_Hd(const BandwidthField& h, double kappa, double script_L)
{
  return complexity(h, kappa) <= script_L;
}

double inv_sqrt_volume_norm(const BandwidthField& h, double q)
{
  const auto& part = h.partition();
  const int d = h.grid().dim();
  double best = 0.0, sum = 0.0;
  for (std::size_t c = 0; c < h.cell_levels().size(); ++c) {
    double m = part.measure_in_domain(c);
    if (m <= 0.0)
      continue;
    double log_v = 0.0;
    for (int j = 0; j < d; ++j)
      log_v -= h.cell_levels()[c][j] + 2.0;
    if (std::isinf(q))
      best = std::max(best, std::exp(-0.5 * log_v));
    else
      sum += m * std::exp(-0.5 * q * log_v);
  }
  return std::isinf(q) ? best : std::pow(sum, 1.0 / q);
}

NormIndex norm_index_set(const BandwidthField& h, double script_A, double p, int cap)
{
  if (!(p >= 1.0) || std::isinf(p))
    throw std::invalid_argument("norm index search needs finite p >= 1");
  NormIndex out;
  out.cap = cap;
  const int r0 = static_cast<int>(std::floor(p)) + 1;
  for (int r = r0; r <= std::max(cap, r0); ++r) {
    double q = r * p / (r - p);
    if (inv_sqrt_volume_norm(h, q) <= script_A) {
      out.r = r;
      out.ok = true;
      return out;
    }
  }
  return out;
}

bool member_B(const BandwidthField& h, double script_A, double p, int cap)
{
  return norm_index_set(h, script_A, p, cap).ok;
}

double tuning_bandwidth(double eps)
{
  return std::exp(-std::sqrt(std::abs(std::log(eps))));
}

double tuning_integrability(double eps)
{
  double l = std::log(eps);
  return std::exp(l * l);
}

namespace {

constexpr double tol = rate_zero_tol;

// omega / (beta_j r_j), with the limits used when omega or r_j is infinite
double omega_weight(const RateProfile& pr, int j)
{
  if (pr.inv_omega == 0.0)
    return pr.beta / pr.theta.beta[j];
  if (std::isinf(pr.theta.r[j]))
    return 0.0;
  return pr.omega / (pr.theta.beta[j] * pr.theta.r[j]);
}

// upsilon / (gamma_j q_j), same conventions
double upsilon_weight(const RateProfile& pr, int j)
{
  if (pr.inv_upsilon == 0.0)
    return pr.gamma / pr.gamma_vec[j];
  if (std::isinf(pr.q_vec[j]))
    return 0.0;
  return pr.upsilon / (pr.gamma_vec[j] * pr.q_vec[j]);
}

double log_eta_tilde(const RateProfile& pr, double log_phi, int j, long m)
{
  const int d = pr.theta.dim();
  const double bj = pr.theta.beta[j];
  return -2.0 + (log_phi - std::log(pr.theta.L[j])) / bj +
         2.0 * d * m * (1.0 / bj - (2.0 + pr.inv_beta) * omega_weight(pr, j));
}

double log_eta_hat(const RateProfile& pr, double log_phi, int j, long m)
{
  const int d = pr.theta.dim();
  const double gj = pr.gamma_vec[j];
  const double w = upsilon_weight(pr, j);
  const double bracket = std::log(pr.L_gamma) + log_phi * pr.inv_beta -
                         std::log(pr.L_beta) - log_phi * pr.inv_gamma;
  return -2.0 + (log_phi - std::log(pr.theta.L[j])) / gj +
         2.0 * d * m * (1.0 / gj - (2.0 + pr.inv_gamma) * w) + w * bracket;
}

// p*/kappa(p*), tending to -1 as p* grows without bound
double pstar_over_kappa(const RateProfile& pr)
{
  if (std::isinf(pr.p_star))
    return -1.0;
  return pr.p_star / kappa(pr, pr.p_star);
}

long floor_index(double log_x, int d)
{
  return static_cast<long>(std::floor(log_x / (2.0 * d)));
}

long switch_index(const RateProfile& pr, double log_phi)
{
  const double t2 = tau(pr, 2.0);
  const double dg = pr.inv_gamma - pr.inv_beta;
  double inner = -log_phi;
  if (std::abs(dg) > 1e-14)
    inner += (std::log(pr.L_gamma) - std::log(pr.L_beta)) / dg;
  return std::max(0L, floor_index(inner / (2.0 * pr.beta * pr.omega * t2), pr.theta.dim()));
}

} // namespace

double oracle_phi(const ClassSpec& theta, double p, double eps)
{
  auto pr = classify(theta, p);
  double base = pr.L_beta * eps * eps;
  if (!(kappa(pr, p) > tol))
    base *= std::abs(std::log(eps));
  return std::pow(base, pr.beta / (2.0 * pr.beta + 1.0));
}

long sparse_switch_index(const ClassSpec& theta, double p, double eps)
{
  auto pr = classify(theta, p);
  if (pr.zone != Zone::Sparse)
    throw ZoneMismatch("switch index is defined only in the sparse zone");
  return switch_index(pr, std::log(oracle_phi(theta, p, eps)));
}

OracleGrid oracle_bandwidth_grid(const ClassSpec& theta, double p, double eps, const OracleGridOptions& opts)
{
  auto pr = classify(theta, p);
  if (!pr.consistent || pr.zone == Zone::NoConsistency)
    throw ZoneMismatch("oracle grid requires parameters in the consistency region");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("noise level must lie in (0,1)");
  const int d = theta.dim();
  OracleGrid out;
  out.phi = oracle_phi(theta, p, eps);
  const double log_phi = std::log(out.phi);
  const double log_L0 = std::log(*std::min_element(theta.L.begin(), theta.L.end()));
  const double kp = kappa(pr, p);
  const bool sparse = pr.zone == Zone::Sparse;

  if (sparse)
    out.m_hat = switch_index(pr, log_phi);

  if (kp > tol) {
    if (kappa(pr, pr.p_star) >= -tol)
      out.m_tilde_infinite = true;
    else {
      double log_h = -std::sqrt(std::abs(std::log(eps)));
      out.m_tilde = floor_index(pstar_over_kappa(pr) * (-opts.ell * log_h - log_L0 + log_phi), d);
    }
  } else if (!sparse) {
    out.m_tilde = floor_index(pstar_over_kappa(pr) * (log_phi - log_L0), d);
  } else if (pr.p_star == p) {
    out.m_tilde = out.m_hat + 1;
  } else {
    double inv_ps = std::isinf(pr.p_star) ? 0.0 : 1.0 / pr.p_star;
    double u = pr.upsilon * (1.0 / p - inv_ps);
    double expo = -(1.0 + (pr.inv_gamma - pr.inv_beta) * u) / ((2.0 + pr.inv_gamma) * u);
    out.m_tilde = out.m_hat + std::max(0L, floor_index(expo * log_phi, d));
  }
  //! the truncation index is positive only asymptotically; m = 0 is always kept
  if (!out.m_tilde_infinite)
    out.m_tilde = std::max(0L, out.m_tilde);

  const double log_min = opts.min_bandwidth > 0.0 ? std::log(opts.min_bandwidth) : -INFINITY;
  for (long m = 0; m <= opts.cap; ++m) {
    if (!out.m_tilde_infinite && m > out.m_tilde)
      break;
    std::vector<double> eta(d);
    bool all_below = true;
    for (int j = 0; j < d; ++j) {
      double le = (sparse && m > out.m_hat) ? log_eta_hat(pr, log_phi, j, m)
                                            : log_eta_tilde(pr, log_phi, j, m);
      eta[j] = std::exp(le);
      all_below = all_below && le < log_min;
    }
    if (all_below)
      break;
    BandwidthVector v;
    bool too_fine = false;
    for (int j = 0; j < d; ++j) {
      int s = level_at_most(eta[j]);
      too_fine = too_fine || s > max_level;
      v.levels.push_back(s);
    }
    if (too_fine)
      break;
    out.m_used = m;
    if (std::find(out.vectors.begin(), out.vectors.end(), v) == out.vectors.end()) {
      out.vectors.push_back(v);
      out.eta_bar.push_back(eta);
      out.m_values.push_back(static_cast<int>(m));
    }
  }
  if (out.vectors.empty())
    throw InfeasibleError("noise level too large: the oracle bandwidth grid is empty");
  return out;
}

} // namespace wnlab
