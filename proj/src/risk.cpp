#include "wnlab/risk.hpp"
#include "wnlab/estimator.hpp"
#include "wnlab/rng.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace wnlab {

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body)
{
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      body(i);
    return;
  }
  std::atomic<std::size_t> next{ 0 };
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lk(err_mu);
          if (!err)
            err = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& th : pool)
    th.join();
  if (err)
    std::rethrow_exception(err);
}

std::string to_string(RiskMethod m)
{
  switch (m) {
    case RiskMethod::select_const: return "select_const";
    case RiskMethod::select_varying: return "select_varying";
    case RiskMethod::fixed_h: return "fixed_h";
  }
  return "?";
}

RiskMethod risk_method_from_string(const std::string& s)
{
  if (s == "select_const")
    return RiskMethod::select_const;
  if (s == "select_varying")
    return RiskMethod::select_varying;
  if (s == "fixed_h")
    return RiskMethod::fixed_h;
  throw std::invalid_argument("unknown risk method '" + s + "'");
}

namespace {

double power_mean(const std::vector<double>& x, const std::vector<std::size_t>& idx, double q)
{
  double s = 0.0;
  for (std::size_t i : idx)
    s += std::pow(x[i], q);
  return std::pow(s / idx.size(), 1.0 / q);
}

// stream reserved for bootstrap resampling, disjoint from replication streams
constexpr std::uint64_t bootstrap_stream = 0xb0075742ull << 20;

} // namespace

double bootstrap_stderr(const std::vector<double>& losses, double q, int resamples, std::uint64_t seed)
{
  const std::size_t n = losses.size();
  if (n < 2 || resamples < 2)
    return 0.0;
  if (std::all_of(losses.begin(), losses.end(), [&](double v) { return v == losses[0]; }))
    return 0.0;
  auto eng = make_engine(seed, bootstrap_stream);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> idx(n);
  std::vector<double> stats(resamples);
  for (int b = 0; b < resamples; ++b) {
    for (auto& i : idx)
      i = pick(eng);
    stats[b] = power_mean(losses, idx, q);
  }
  double mean = 0.0;
  for (double s : stats)
    mean += s;
  mean /= resamples;
  double var = 0.0;
  for (double s : stats)
    var += (s - mean) * (s - mean);
  return std::sqrt(var / (resamples - 1));
}

double replication_scale(const RiskSetup& setup, std::size_t i, int reps)
{
  if (setup.amplitude_log_spread == 0.0)
    return 1.0;
  return std::exp(setup.amplitude_log_spread * ((i + 0.5) / reps - 0.5));
}

RiskEstimate mc_risk(const GridFunction& f,
                     const RiskSetup& setup,
                     const ProductKernel& K,
                     double p,
                     double q,
                     double eps,
                     int reps,
                     std::uint64_t seed)
{
  if (reps < 30)
    throw std::invalid_argument("need at least 30 replications");
  if (!(q >= 1.0))
    throw std::invalid_argument("need q >= 1");
  if (setup.method == RiskMethod::fixed_h) {
    if (!setup.fixed)
      throw std::invalid_argument("fixed_h needs a bandwidth");
  } else {
    if (setup.H.empty())
      throw std::invalid_argument("selection needs a nonempty bandwidth set");
    setup.cfg.validate();
  }
  const PenaltyKind kind =
    setup.method == RiskMethod::select_const ? PenaltyKind::constant : PenaltyKind::general;

  RiskEstimate out;
  out.reps = reps;
  out.losses.assign(reps, 0.0);
  out.chosen.assign(reps, 0);
  parallel_for(reps, setup.threads, [&](std::size_t i) {
    const double scale = replication_scale(setup, i, reps);
    GridFunction fi = scale == 1.0 ? f : scale * f;
    Observation obs(fi, sample_noise(f.grid, seed, i), eps);
    if (setup.method == RiskMethod::fixed_h) {
      out.losses[i] = lp_distance(estimate_only(obs, *setup.fixed, K), fi, p);
      return;
    }
    Selector sel(obs, K);
    auto res = sel.run(setup.H, p, eps, setup.cfg, kind, setup.cap);
    out.chosen[i] = res.chosen_index;
    out.losses[i] = lp_distance(sel.estimate(setup.H[res.chosen_index]), fi, p);
  });
  std::vector<std::size_t> all(reps);
  for (int i = 0; i < reps; ++i)
    all[i] = i;
  out.risk = power_mean(out.losses, all, q);
  out.stderr_ = bootstrap_stderr(out.losses, q, setup.bootstrap_resamples, seed);
  return out;
}

OracleTerms oracle_benchmark(const GridFunction& f,
                             const std::vector<BandwidthField>& H,
                             double p,
                             double eps,
                             const UpperFunctionConfig& cfg,
                             const ProductKernel& K,
                             PenaltyKind kind)
{
  if (H.empty())
    throw std::invalid_argument("bandwidth set is empty");
  std::map<std::vector<int>, GridFunction> cache;
  auto smooth = [&](const BandwidthField& h) -> const GridFunction& {
    auto key = h.key();
    auto it = cache.find(key);
    if (it == cache.end())
      it = cache.emplace(std::move(key), smoother(f, h, K)).first;
    return it->second;
  };
  OracleTerms out;
  const std::size_t m = H.size();
  out.bias.assign(m, 0.0);
  out.penalty.assign(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    double sup = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      auto join = lattice_join(H[a], H[e]);
      sup = std::max(sup, lp_distance(smooth(join), smooth(H[e]), p));
    }
    out.bias[a] = sup + lp_distance(smooth(H[a]), f, p);
    out.penalty[a] = penalty(H[a], eps, cfg, kind);
  }
  out.value = out.bias[0] + eps * out.penalty[0];
  for (std::size_t a = 1; a < m; ++a) {
    double v = out.bias[a] + eps * out.penalty[a];
    if (v < out.value) {
      out.value = v;
      out.argmin = a;
    }
  }
  return out;
}

OracleBound oracle_bound_const(const GridFunction& f,
                               const std::vector<BandwidthField>& H,
                               double p,
                               double eps,
                               const UpperFunctionConfig& cfg,
                               const ProductKernel& K)
{
  if (H.empty())
    throw std::invalid_argument("bandwidth set is empty");
  const int d = f.grid.dim();
  const double K1 = kernel_norm(K, 1.0);
  std::map<std::pair<int, int>, double> dir; // (axis, level) -> ||b||_p
  OracleBound out;
  for (const auto& h : H) {
    if (!h.is_constant())
      throw std::invalid_argument("bound needs constant bandwidths");
    auto lv = h.constant_levels();
    BandwidthVector v{ std::vector<int>(lv.begin(), lv.begin() + d) };
    double sum = 0.0;
    for (int j = 0; j < d; ++j) {
      auto key = std::make_pair(j, lv[j]);
      auto it = dir.find(key);
      if (it == dir.end())
        it = dir.emplace(key, lp_norm(directional_bias(f, v, K, j).values, p)).first;
      sum += it->second;
    }
    out.bias.push_back(3.0 * K1 * sum);
    out.penalty.push_back(psi_const(h, eps, cfg));
  }
  out.min_term = out.bias[0] + eps * out.penalty[0];
  for (std::size_t a = 1; a < H.size(); ++a) {
    double v = out.bias[a] + eps * out.penalty[a];
    if (v < out.min_term) {
      out.min_term = v;
      out.argmin = a;
    }
  }
  out.slack = 9.0 * (cfg.C3 + cfg.C4 + 2.0) * eps;
  out.bound = 5.0 * out.min_term + out.slack;
  return out;
}

UpperFunctionReport upper_function_check(const Grid& grid,
                                         const std::vector<BandwidthField>& H,
                                         double eps,
                                         int reps,
                                         const UpperFunctionConfig& cfg,
                                         const ProductKernel& K,
                                         std::uint64_t seed,
                                         unsigned threads)
{
  if (reps < 100)
    throw std::invalid_argument("need at least 100 replications");
  if (H.empty())
    throw std::invalid_argument("bandwidth set is empty");
  std::vector<double> thresholds;
  for (const auto& h : H)
    thresholds.push_back(psi_tilde(h, eps, cfg));
  const GridFunction zero(grid);
  UpperFunctionReport out;
  out.reps = reps;
  out.exceedance.assign(reps, 0.0);
  parallel_for(reps, threads, [&](std::size_t i) {
    //! unit-level field: the estimate of zero at level 1/2, doubled
    Observation obs(zero, sample_noise(grid, seed, i), 0.5);
    double sup = 0.0;
    for (std::size_t a = 0; a < H.size(); ++a)
      sup = std::max(sup, 2.0 * lp_norm(estimate_only(obs, H[a], K), cfg.p) - thresholds[a]);
    out.exceedance[i] = sup;
  });
  double s = 0.0, s2 = 0.0;
  for (double e : out.exceedance) {
    double v = std::pow(e, cfg.q);
    s += v;
    s2 += v * v;
  }
  out.moment = s / reps;
  out.stderr_ = std::sqrt(std::max(0.0, s2 / reps - out.moment * out.moment) / (reps - 1));
  out.bound = std::pow(cfg.C3 * eps, cfg.q);
  out.ratio = out.moment / out.bound;
  return out;
}

RateFit rate_fit(const std::vector<double>& x, const std::vector<double>& y)
{
  if (x.size() != y.size())
    throw std::invalid_argument("x and y differ in length");
  const std::size_t n = x.size();
  if (n < 4)
    throw std::invalid_argument("need at least 4 points");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("rate fit needs positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  auto [lo, hi] = std::minmax_element(lx.begin(), lx.end());
  if (*hi - *lo < std::log(10.0) - 1e-12)
    throw std::invalid_argument("points span less than a decade");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  RateFit out;
  out.points = static_cast<int>(n);
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = ly[i] - out.intercept - out.slope * lx[i];
    sse += r * r;
  }
  const double se = std::sqrt(sse / (n - 2) / sxx);
  boost::math::students_t dist(static_cast<double>(n - 2));
  out.halfwidth = boost::math::quantile(dist, 0.975) * se;
  return out;
}

double rate_argument(Zone zone, double eps)
{
  return zone == Zone::Dense ? eps : eps * eps * std::abs(std::log(eps));
}

double theoretical_slope(const RateProfile& pr)
{
  return pr.zone == Zone::Dense ? 2.0 * pr.a : pr.a;
}

void write_risk_csv(std::ostream& os, const RiskReport& r)
{
  os << "eps,risk,stderr,oracle,ratio\n";
  char buf[256];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", row.eps, row.risk, row.stderr_, row.oracle,
                  row.ratio);
    os << buf;
  }
}

} // namespace wnlab
