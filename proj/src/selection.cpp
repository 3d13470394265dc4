#include "wnlab/selection.hpp"
#include "wnlab/estimator.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace wnlab {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

double lp_norm(const GridFunction& g, double p)
{
  if (!(p >= 1.0))
    throw std::invalid_argument("norm index must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : g.values)
      m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  if (p == 2.0)
    for (double v : g.values)
      s += v * v;
  else
    for (double v : g.values)
      s += std::pow(std::abs(v), p);
  return std::pow(s * g.grid.cell_volume(), 1.0 / p);
}

double lp_distance(const GridFunction& a, const GridFunction& b, double p)
{
  require_same_grid(a.grid, b.grid);
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double v = std::abs(a.values[i] - b.values[i]);
    s += p == 2.0 ? v * v : std::pow(v, p);
  }
  return std::pow(s * a.grid.cell_volume(), 1.0 / p);
}

double abs_normal_moment(double k)
{
  return std::pow(2.0, k / 2.0) * boost::math::tgamma((k + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
}

double C3_uv(double u, double v, double K_norm2, int d)
{
  const double c = 1.0 / (8.0 * K_norm2 * K_norm2);
  // substitute y = z^{2/v}: int = (v/2) int_0^inf y^{uv/2 - 1} e^{-c y} dy
  const double k = u * v / 2.0 - 1.0;
  boost::math::quadrature::exp_sinh<double> integrator;
  double I = integrator.integrate([&](double y) { return y > 0.0 ? std::pow(y, k) * std::exp(-c * y) : 0.0; });
  I *= v / 2.0;
  return std::pow(2.0, d / v) * std::pow(2.0 * u * I, 1.0 / (u * v));
}

UpperConstants compute_constants(const ProductKernel& K, int d, double p, double q, double b)
{
  if (!(p >= 1.0) || !(q >= 1.0))
    throw std::invalid_argument("need p >= 1 and q >= 1");
  UpperConstants c;
  const double K2 = kernel_norm(K, 2.0);
  const double A = K.scalar.lipschitz();
  const double pp = std::isinf(p) ? 1.0 : p;
  c.C1 = 2.0 * std::max(q, pp) +
         2.0 * std::sqrt(2.0 * d) *
           (std::sqrt(std::numbers::pi) + K2 * (std::sqrt(std::abs(std::log(4.0 * b * A * K2))) + 1.0));
  if (std::isinf(p))
    c.C3 = C3_uv(q, 1.0, K2, d);
  else
    c.C3 = C3_uv(std::max(q / p, 1.0), p, K2, d);

  if (std::isinf(p)) {
    c.C4 = 0.0; // the index set above p is empty
  } else {
    double series = 0.0;
    for (int r = static_cast<int>(std::floor(p)) + 1; r < 64; ++r) {
      double log_decay = -std::exp(static_cast<double>(r));
      if (log_decay < -745.0)
        break;
      double kn = scalar_norm(K.scalar, 2.0 * r / (r + 2.0));
      double term = std::exp(log_decay) * std::pow(std::pow(r * std::sqrt(std::numbers::e), d) * std::pow(kn, d), q / 2.0);
      series += term;
      if (term < 1e-16 * series)
        break;
    }
    double pre = abs_normal_moment(q + 1.0) * std::sqrt(std::numbers::pi / 2.0) *
                 std::max(1.0, std::pow(2.0 * b, q * d));
    c.C4 = std::pow(pre * series, 1.0 / q);
  }
  return c;
}

std::map<int, double> kernel_scaled_C2(const ProductKernel& K, double p, int r_cap)
{
  if (!(p >= 1.0) || std::isinf(p))
    throw std::invalid_argument("kernel-scaled C2 needs a finite p >= 1");
  const int r0 = static_cast<int>(std::floor(p)) + 1;
  const double k2 = kernel_norm(K, 2.0);
  std::map<int, double> out;
  for (int r = r0; r <= std::max(r0, r_cap); ++r)
    out[r] = r * k2 / r0;
  return out;
}

double UpperFunctionConfig::C2(int r) const
{
  auto it = C2_table.find(r);
  return it == C2_table.end() ? static_cast<double>(r) : it->second;
}

double UpperFunctionConfig::C2p() const
{
  if (std::isinf(p))
    return inf;
  const int r0 = static_cast<int>(std::floor(p)) + 1;
  double best = inf;
  for (int r = r0; r <= std::max(r_cap, r0); ++r)
    best = std::min(best, C2(r));
  return std::pow(2.0 * b, dim / p) * best;
}

void UpperFunctionConfig::validate() const
{
  auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
  if (!positive(C1) || C1 < 2.0)
    throw std::invalid_argument("C1 must be finite and at least 2");
  if (!positive(C3))
    throw std::invalid_argument("C3 must be positive and finite");
  if (!(C4 >= 0.0) || !std::isfinite(C4))
    throw std::invalid_argument("C4 must be nonnegative and finite");
  for (const auto& [r, v] : C2_table)
    if (r < 1 || !positive(v))
      throw std::invalid_argument("C2 table entry for r=" + std::to_string(r) + " must be positive");
  if (!(p >= 1.0) || !(q >= 1.0))
    throw std::invalid_argument("need p >= 1 and q >= 1");
  if (!positive(h_eps) || !(A_eps > 0.0))
    throw std::invalid_argument("tuning constants must be positive");
}

UpperFunctionConfig make_upper_config(const ProductKernel& K, const Grid& grid, double p, double q, double eps)
{
  auto c = compute_constants(K, grid.dim(), p, q, grid.half_width());
  UpperFunctionConfig cfg;
  cfg.C1 = c.C1;
  cfg.C3 = c.C3;
  cfg.C4 = c.C4;
  cfg.p = p;
  cfg.q = q;
  cfg.h_eps = tuning_bandwidth(eps);
  cfg.A_eps = tuning_integrability(eps);
  cfg.b = grid.half_width();
  cfg.dim = grid.dim();
  return cfg;
}

double psi_tilde(const BandwidthField& h, double eps, const UpperFunctionConfig& cfg)
{
  const auto& part = h.partition();
  const int d = h.grid().dim();
  const double p = cfg.p;
  double best = 0.0, sum = 0.0;
  for (std::size_t c = 0; c < h.cell_levels().size(); ++c) {
    double m = part.measure_in_domain(c);
    if (m <= 0.0)
      continue;
    double log_v = 0.0;
    for (int j = 0; j < d; ++j)
      log_v -= h.cell_levels()[c][j] + 2.0;
    double val = std::sqrt(std::abs(std::log(eps) + log_v)) * std::exp(-0.5 * log_v);
    if (std::isinf(p))
      best = std::max(best, val);
    else
      sum += m * std::pow(val, p);
  }
  return cfg.C1 * (std::isinf(p) ? best : std::pow(sum, 1.0 / p));
}

namespace {

bool below_threshold(const BandwidthField& h, double h_eps)
{
  const auto& part = h.partition();
  for (std::size_t c = 0; c < h.cell_levels().size(); ++c) {
    if (part.measure_in_domain(c) <= 0.0)
      continue;
    for (int j = 0; j < h.grid().dim(); ++j)
      if (h_of(h.cell_levels()[c][j]) > h_eps)
        return false;
  }
  return true;
}

} // namespace

PsiValue psi(const BandwidthField& h, double eps, const UpperFunctionConfig& cfg)
{
  PsiValue out;
  out.tilde = psi_tilde(h, eps, cfg);
  out.bar = inf;
  out.value = out.tilde;
  if (std::isinf(cfg.p) || !below_threshold(h, cfg.h_eps))
    return out;
  const int r0 = static_cast<int>(std::floor(cfg.p)) + 1;
  bool any = false;
  for (int r = r0; r <= std::max(cfg.r_cap, r0); ++r) {
    double norm = inv_sqrt_volume_norm(h, r * cfg.p / (r - cfg.p));
    if (norm > cfg.A_eps)
      continue;
    any = true;
    out.bar = std::min(out.bar, cfg.C2(r) * norm);
  }
  if (!any) {
    out.fallback = true;
    return out;
  }
  if (out.bar < out.tilde) {
    out.value = out.bar;
    out.bar_used = true;
  }
  return out;
}

double psi_const(const BandwidthField& h, double eps, const UpperFunctionConfig& cfg)
{
  auto lv = h.constant_levels();
  double log_v = 0.0;
  for (int j = 0; j < h.grid().dim(); ++j)
    log_v -= lv[j] + 2.0;
  const double inv_sqrt_v = std::exp(-0.5 * log_v);
  if (std::isinf(cfg.p))
    return cfg.C1 * std::sqrt(std::abs(std::log(eps) + log_v)) * inv_sqrt_v;
  return cfg.C2p() * inv_sqrt_v;
}

double penalty(const BandwidthField& h, double eps, const UpperFunctionConfig& cfg, PenaltyKind kind)
{
  return kind == PenaltyKind::constant ? psi_const(h, eps, cfg) : psi(h, eps, cfg).value;
}

Selector::Selector(const Observation& obs, const ProductKernel& K)
  : obs_(obs)
  , K_(K)
{}

const GridFunction& Selector::estimate(const BandwidthField& h)
{
  auto key = h.key();
  auto it = cache_.find(key);
  if (it == cache_.end())
    it = cache_.emplace(std::move(key), estimate_only(obs_, h, K_)).first;
  return it->second;
}

SelectionResult Selector::run(const std::vector<BandwidthField>& H,
                              double p,
                              double eps,
                              const UpperFunctionConfig& cfg,
                              PenaltyKind kind,
                              std::size_t cap)
{
  if (H.empty())
    throw std::invalid_argument("bandwidth set is empty");
  if (H.size() > cap)
    throw std::invalid_argument("bandwidth set exceeds the configured cap");
  if (kind == PenaltyKind::constant)
    for (const auto& h : H)
      if (!h.is_constant())
        throw std::invalid_argument("constant penalty needs constant bandwidths");

  std::map<std::vector<int>, double> pen_cache;
  auto pen = [&](const BandwidthField& h) {
    auto key = h.key();
    auto it = pen_cache.find(key);
    if (it == pen_cache.end())
      it = pen_cache.emplace(std::move(key), penalty(h, eps, cfg, kind)).first;
    return it->second;
  };

  const std::size_t m = H.size();
  SelectionResult res;
  res.rhat.assign(m, 0.0);
  res.penalty.resize(m);
  res.objective.resize(m);
  for (std::size_t a = 0; a < m; ++a)
    res.penalty[a] = pen(H[a]);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t e = 0; e < m; ++e) {
      auto join = lattice_join(H[a], H[e]);
      double diff = lp_distance(estimate(join), estimate(H[e]), p);
      double t = diff - eps * pen(join) - eps * res.penalty[e];
      res.rhat[a] = std::max(res.rhat[a], t);
    }
    res.objective[a] = res.rhat[a] + eps * res.penalty[a];
  }

  std::size_t best = 0;
  for (std::size_t a = 1; a < m; ++a) {
    if (res.objective[a] < res.objective[best]) {
      best = a;
    } else if (res.objective[a] == res.objective[best]) {
      double sa = H[a].mean_level_sum(), sb = H[best].mean_level_sum();
      if (sa < sb || (sa == sb && H[a].key() < H[best].key()))
        best = a;
    }
  }
  res.chosen_index = best;
  return res;
}

std::vector<double> pairwise_stat(const Observation& obs,
                                  const std::vector<BandwidthField>& H,
                                  double p,
                                  double eps,
                                  const UpperFunctionConfig& cfg,
                                  const ProductKernel& K,
                                  PenaltyKind kind,
                                  std::size_t cap)
{
  Selector s(obs, K);
  return s.run(H, p, eps, cfg, kind, cap).rhat;
}

SelectionResult select(const Observation& obs,
                       const std::vector<BandwidthField>& H,
                       double p,
                       double eps,
                       const UpperFunctionConfig& cfg,
                       const ProductKernel& K,
                       PenaltyKind kind,
                       std::size_t cap)
{
  Selector s(obs, K);
  return s.run(H, p, eps, cfg, kind, cap);
}

std::vector<BandwidthField> constant_lattice(const Grid& grid, double h_max, double v_min)
{
  const int lo = level_at_most(std::min(h_max, h_of(0)));
  const int hi = resolvability_floor(grid);
  std::vector<BandwidthField> out;
  if (hi < lo)
    return out;
  const int d = grid.dim();
  std::vector<int> lv(d, lo);
  while (true) {
    double log_v = 0.0;
    for (int s : lv)
      log_v -= s + 2.0;
    if (std::exp(log_v) >= v_min)
      out.push_back(BandwidthField::constant(grid, lv));
    int j = d - 1;
    while (j >= 0 && lv[j] == hi) {
      lv[j] = lo;
      --j;
    }
    if (j < 0)
      break;
    ++lv[j];
  }
  return out;
}

} // namespace wnlab
