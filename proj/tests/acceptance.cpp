#include "wnlab/errors.hpp"
#include "wnlab/estimator.hpp"
#include "wnlab/experiment.hpp"
#include "wnlab/nikolskii.hpp"
#include "wnlab/rates.hpp"
#include "wnlab/risk.hpp"
#include "wnlab/rng.hpp"
#include "wnlab/selection.hpp"
#include "wnlab/testbed.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

using namespace wnlab;

namespace {

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const double inf = std::numeric_limits<double>::infinity();

// 1 --------------------------------------------------------------------------
Outcome kernel_suite()
{
  double worst_int = 0, worst_mom = 0;
  for (auto prof : { KernelProfile::cosine_bump, KernelProfile::quartic_spline })
    for (int ell = 1; ell <= 3; ++ell) {
      auto K = make_kernel(prof, ell, 1);
      worst_int = std::max(worst_int, std::abs(kernel_moment(K.scalar, 0) - 1.0));
      for (int k = 1; k < ell; ++k)
        worst_mom = std::max(worst_mom, std::abs(kernel_moment(K.scalar, k)));
    }
  return { worst_int <= 1e-10 && worst_mom <= 1e-8,
           "max |int w - 1| " + fmt("%.2e", worst_int) + ", max |moment| " + fmt("%.2e", worst_mom) };
}

// 2 --------------------------------------------------------------------------
Outcome difference_membership_suite()
{
  Grid grid(1, 1.0, 256);
  const double u = 3 * grid.step();
  auto lin = tabulate(grid, [](std::span<const double> x) { return 2.5 * x[0] - 0.75; });
  auto sq = tabulate(grid, [](std::span<const double> x) { return x[0] * x[0]; });
  auto D1 = difference(lin, u, 0, 1), D2 = difference(lin, u, 0, 2), Q = difference(sq, u, 0, 2);
  double worst = 0;
  for (int i = 0; i + 6 < 256; ++i) {
    worst = std::max(worst, std::abs(D1[i] - 2.5 * u));
    worst = std::max(worst, std::abs(D2[i]));
    worst = std::max(worst, std::abs(Q[i] - 2 * u * u));
  }
  bool ok = worst <= 1e-12;
  std::string detail = "identity error " + fmt("%.1e", worst);

  //! smoother classes need smaller eps before the family has four bumps
  const std::vector<ClassSpec> classes = { ClassSpec({ 1.0 }, { inf }, { 12.0 }),
                                           ClassSpec({ 1.0 }, { 2.0 }, { 30.0 }),
                                           ClassSpec({ 1.0 }, { 3.0 }, { 60.0 }) };
  int members = 0;
  for (const auto& theta : classes) {
    auto pr = classify(theta, 2.0);
    if (pr.zone != Zone::Dense)
      return { false, "test class is not in the dense zone" };
    auto fam = build_family(theta, 2.0, 0.05, default_lower_bound_constants(theta, 2.0), 1.0, 11);
    auto ug = default_u_grid(grid);
    for (std::size_t w = 1; w < fam.W.size(); ++w) {
      auto rep = check_membership(render_family_member(fam, fam.W[w], grid), theta, ug, 0.1);
      ok = ok && rep.pass;
      ++members;
    }
  }
  return { ok, detail + ", " + std::to_string(members) + " family members checked" };
}

// 3 --------------------------------------------------------------------------
Outcome vg_suite()
{
  bool ok = true;
  std::string detail;
  for (auto [m, n] : { std::pair{ 4, 36 }, { 4, 64 }, { 8, 80 } }) {
    auto set = vg_set(m, n, 5);
    // independent check on dense bit vectors
    std::vector<std::vector<char>> bits;
    for (const auto& w : set.words) {
      std::vector<char> v(n, 0);
      for (int pos : w.ones)
        v.at(pos) = 1;
      bits.push_back(v);
    }
    bool weights = true;
    for (const auto& v : bits)
      weights = weights && std::count(v.begin(), v.end(), 1) == m;
    int min_dist = n;
    for (std::size_t a = 0; a < bits.size(); ++a)
      for (std::size_t b = a + 1; b < bits.size(); ++b) {
        int dist = 0;
        for (int i = 0; i < n; ++i)
          dist += bits[a][i] != bits[b][i];
        min_dist = std::min(min_dist, dist);
      }
    std::set<std::vector<char>> distinct(bits.begin(), bits.end());
    const double bound = std::pow(2.0, -m) * std::pow(double(n) / m - 1.0, m / 2.0);
    bool good = weights && 2 * min_dist >= m && distinct.size() == bits.size() && bits.size() >= bound;
    ok = ok && good;
    detail += "(" + std::to_string(m) + "," + std::to_string(n) + "): " + std::to_string(bits.size()) +
              " words, dmin " + std::to_string(min_dist) + "; ";
  }
  return { ok, detail };
}

// 4 --------------------------------------------------------------------------
Outcome rate_calculus_suite()
{
  auto eng = make_engine(4, 0);
  std::uniform_real_distribution<double> B(0.3, 4.0), R(1.0, 8.0), L(0.5, 5.0), P(1.0, 8.0);
  double worst_kt = 0, worst_id = 0;
  for (int i = 0; i < 100; ++i) {
    const int d = 1 + i % 3;
    std::vector<double> b(d), r(d), l(d);
    for (int j = 0; j < d; ++j) {
      b[j] = B(eng);
      r[j] = R(eng);
      l[j] = L(eng);
    }
    auto pr = aggregates(ClassSpec(b, r, l), P(eng));
    for (double s : { 1.0, 2.0, 3.0, 5.0, 10.0 })
      worst_kt = std::max(worst_kt, std::abs(kappa(pr, s) / (pr.omega * s) - (2.0 - s) / s - tau(pr, s)));
    const double lhs = pr.upsilon * (2 + pr.inv_gamma) - pr.omega * (2 + pr.inv_beta);
    const double rhs = 2 * pr.beta * tau(pr, 2.0) * pr.omega * pr.upsilon * (pr.inv_gamma - pr.inv_beta);
    worst_id = std::max(worst_id, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }
  auto c1 = classify(ClassSpec({ 2.0, 2.0 }, { 2.0, 2.0 }, { 1.0, 1.0 }), 2.0);
  auto c2 = classify(ClassSpec({ 1.0 }, { 1.0 }, { 1.0 }), 4.0);
  auto c3 = classify(ClassSpec({ 0.5 }, { 1.0 }, { 1.0 }), 2.0);
  bool zones = c1.zone == Zone::Dense && std::abs(c1.a - 1.0 / 3) <= 1e-15 && c2.zone == Zone::Sparse &&
               std::abs(c2.a - 0.25) <= 1e-15 && c3.zone == Zone::NoConsistency && c3.a == 0.0;
  return { worst_kt <= 1e-10 && worst_id <= 1e-10 && zones,
           "kappa-tau " + fmt("%.1e", worst_kt) + ", gamma-upsilon " + fmt("%.1e", worst_id) +
             (zones ? ", zones reproduced" : ", zone mismatch") };
}

// 5 --------------------------------------------------------------------------
Outcome lattice_complexity_suite()
{
  int good = 0;
  for (int i = 0; i < 100; ++i) {
    const int d = 1 + i % 3;
    Grid grid(d, 0.25, d == 1 ? 256 : (d == 2 ? 128 : 64));
    const double kap = 1.0 / (2.0 * d);
    const int top = resolvability_floor(grid);
    auto h = random_bandwidth_field(grid, 1 + i % 3, top, 55, 2 * i);
    auto eta = random_bandwidth_field(grid, 1 + (i + 1) % 3, top, 55, 2 * i + 1);
    //! smallest constants for which both fields are in the class
    const double L = std::max(complexity(h, kap), complexity(eta, kap));
    const double A = std::max({ std::exp(double(d)), inv_sqrt_volume_norm(h, 6.0), inv_sqrt_volume_norm(eta, 6.0) });
    auto j = lattice_join(h, eta);
    good += member_Hd(h, kap, L) && member_Hd(eta, kap, L) && member_Hd(j, d * kap, std::pow(2.0 * L, d)) &&
            member_B(j, A, 2.0);
  }
  return { good == 100, std::to_string(good) + "/100 joins in the class" };
}

// shared setup of the one-dimensional smoothness-2 experiments
struct Design
{
  Grid grid;
  ProductKernel K;
  std::vector<BandwidthField> H;
  GridFunction f0;
};

Design design_1d()
{
  Grid grid(1, 0.25, 512);
  return { grid, make_kernel(KernelProfile::cosine_bump, 3, 1), constant_lattice(grid), lacunary_signal(grid, { 2.0 }) };
}

UpperFunctionConfig scaled_config(const Design& ds, double eps)
{
  auto cfg = make_upper_config(ds.K, ds.grid, 2.0, 2.0, eps);
  cfg.C2_table = kernel_scaled_C2(ds.K, 2.0, cfg.r_cap);
  return cfg;
}

// 6 --------------------------------------------------------------------------
Outcome oracle_inequality()
{
  auto ds = design_1d();
  auto f = 100.0 * ds.f0;
  bool ok = true;
  std::string detail;
  for (double eps : { 0.05, 0.02 }) {
    RiskSetup setup;
    setup.H = ds.H;
    setup.cfg = scaled_config(ds, eps);
    setup.threads = 1;
    setup.bootstrap_resamples = 0;
    auto bound = oracle_bound_const(f, ds.H, 2.0, eps, setup.cfg, ds.K);
    auto est = mc_risk(f, setup, ds.K, 2.0, 2.0, eps, 200, 606);
    int within = 0;
    double worst = 0;
    for (double l : est.losses) {
      within += l <= bound.bound;
      worst = std::max(worst, l / bound.bound);
    }
    const double frac = double(within) / est.losses.size();
    ok = ok && frac >= 0.99;
    detail += "eps " + fmt("%g", eps) + ": " + fmt("%.3f", frac) + " within, worst loss/bound " + fmt("%.3f", worst) + "; ";
  }
  return { ok, detail };
}

RateFit slope_experiment(const Grid& grid,
                         const ProductKernel& K,
                         const std::vector<BandwidthField>& H,
                         const GridFunction& f,
                         double spread,
                         int kmax,
                         int reps,
                         std::uint64_t seed)
{
  std::vector<double> es, rs;
  for (int k = 0; k <= kmax; ++k) {
    const double eps = 0.2 * std::pow(2.0, -k);
    RiskSetup setup;
    setup.H = H;
    setup.cfg = make_upper_config(K, grid, 2.0, 2.0, eps);
    setup.cfg.C2_table = kernel_scaled_C2(K, 2.0, setup.cfg.r_cap);
    setup.threads = 1;
    setup.bootstrap_resamples = 0;
    setup.amplitude_log_spread = spread;
    es.push_back(eps);
    rs.push_back(mc_risk(f, setup, K, 2.0, 2.0, eps, reps, seed).risk);
  }
  return rate_fit(es, rs);
}

// 7 --------------------------------------------------------------------------
Outcome rate_slope_1d()
{
  auto ds = design_1d();
  const double beta = 2.0, target = 2 * beta / (2 * beta + 1);
  // one lattice period in ln eps for h ~ eps^{2/(2 beta + 1)}
  const double spread = (2 * beta + 1) / 2;
  auto fit = slope_experiment(ds.grid, ds.K, ds.H, 100.0 * ds.f0, spread, 5, 100, 707);
  return { std::abs(fit.slope - target) <= 0.1,
           "slope " + fmt("%.3f", fit.slope) + " +- " + fmt("%.3f", fit.halfwidth) + ", target " + fmt("%.3f", target) };
}

// 8 --------------------------------------------------------------------------
Outcome rate_slope_2d()
{
  Grid grid(2, 0.125, 128);
  auto K = make_kernel(KernelProfile::cosine_bump, 3, 2);
  const std::vector<double> beta = { 2.0, 1.0 };
  const double bbar = 1.0 / (1.0 / beta[0] + 1.0 / beta[1]);
  const double target = 2 * bbar / (2 * bbar + 1);
  // coarser axis moves one lattice level over this span of ln eps
  const double spread = beta[0] * (2 * bbar + 1) / 2;
  auto fit = slope_experiment(grid, K, constant_lattice(grid), 100.0 * lacunary_signal(grid, beta), spread, 4, 50, 808);
  return { std::abs(fit.slope - target) <= 0.12,
           "slope " + fmt("%.3f", fit.slope) + " +- " + fmt("%.3f", fit.halfwidth) + ", target " + fmt("%.3f", target) };
}

// 9 --------------------------------------------------------------------------
Outcome upper_function_exceedance()
{
  // ten resolvable constant levels need a small domain at moderate n
  Grid grid(1, 1.0 / 256, 1024);
  auto K = make_kernel(KernelProfile::cosine_bump, 2, 1);
  std::vector<BandwidthField> H;
  for (int s = 0; s < 10; ++s)
    H.push_back(BandwidthField::constant(grid, { s }));
  const double eps = 0.05;
  auto cfg = make_upper_config(K, grid, 2.0, 2.0, eps);
  cfg.C1 *= 3;
  auto rep = upper_function_check(grid, H, eps, 500, cfg, K, 909, 1);
  const double limit = std::pow(3 * cfg.C3 * eps, 2.0);
  return { rep.moment <= limit, "moment " + fmt("%.3e", rep.moment) + ", limit " + fmt("%.3e", limit) };
}

// 10 -------------------------------------------------------------------------
Outcome lower_bound_separation()
{
  const ClassSpec theta({ 1.0 }, { inf }, { 12.0 });
  const double p = 2.0;
  Grid grid(1, 1.0, 2048);
  bool ok = true;
  std::vector<double> normalized;
  std::string detail;
  for (double eps : { 0.05, 0.02 }) {
    auto fam = build_family(theta, p, eps, default_lower_bound_constants(theta, p), 1.0, 10);
    std::vector<GridFunction> members;
    for (const auto& w : fam.W)
      members.push_back(render_family_member(fam, w, grid));
    double min_sep = inf;
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        min_sep = std::min(min_sep, lp_distance(members[a], members[b], p));
    ok = ok && fam.zone == Zone::Dense && min_sep >= 2 * fam.rho * 0.9;
    normalized.push_back(fam.rho / lower_rate(theta, p, eps));
    detail += "eps " + fmt("%g", eps) + ": " + std::to_string(members.size()) + " members, min sep/rho " +
              fmt("%.3f", min_sep / fam.rho) + ", rho/rate " + fmt("%.4f", normalized.back()) + "; ";
  }
  const double spread = std::max(normalized[0], normalized[1]) / std::min(normalized[0], normalized[1]);
  ok = ok && spread <= 2.0;
  return { ok, detail + "ratio spread " + fmt("%.3f", spread) };
}

// 11 -------------------------------------------------------------------------
std::vector<json> determinism_configs()
{
  std::vector<json> out;
  out.push_back({ { "kind", "rates_table" },
                  { "classes", { { { "beta", { 2, 1 } }, { "r", { 2, "inf" } }, { "L", { 1, 2 } } } } } });
  out.push_back({ { "kind", "risk_curve" },
                  { "grid", { { "d", 1 }, { "b", 0.25 }, { "n", 128 } } },
                  { "class", { { "beta", { 2 } }, { "r", { "inf" } }, { "L", { 1 } } } },
                  { "eps", { 0.1, 0.05, 0.025, 0.0125 } },
                  { "reps", 30 },
                  { "signal", { { "kind", "lacunary" }, { "amplitude", 100 }, { "amplitude_log_spread", 2.5 } } },
                  { "bootstrap", 200 } });
  out.push_back({ { "kind", "risk_curve" },
                  { "grid", { { "d", 2 }, { "b", 0.25 }, { "n", 16 } } },
                  { "eps", { 0.1 } },
                  { "reps", 30 },
                  { "H", { { "recipe", "dyadic_varying" }, { "level", 1 }, { "count", 6 } } },
                  { "signal", { { "kind", "lacunary" }, { "smoothness", { 1, 1 } }, { "amplitude", 10 } } },
                  { "bootstrap", 100 } });
  out.push_back({ { "kind", "oracle_check" },
                  { "grid", { { "d", 1 }, { "b", 0.25 }, { "n", 128 } } },
                  { "eps", { 0.05 } },
                  { "reps", 30 },
                  { "signal", { { "kind", "lacunary" }, { "smoothness", { 2 } }, { "amplitude", 50 } } } });
  out.push_back({ { "kind", "upper_function_check" },
                  { "grid", { { "d", 1 }, { "b", 1 }, { "n", 128 } } },
                  { "eps", { 0.05 } },
                  { "reps", 100 } });
  out.push_back({ { "kind", "testbed_export" },
                  { "p", 2 },
                  { "grid", { { "d", 1 }, { "b", 1 }, { "n", 1024 } } },
                  { "class", { { "beta", { 1 } }, { "r", { "inf" } }, { "L", { 12 } } } },
                  { "eps", { 0.05 } } });
  out.push_back({ { "kind", "membership_check" },
                  { "p", 2 },
                  { "grid", { { "d", 1 }, { "b", 1 }, { "n", 1024 } } },
                  { "class", { { "beta", { 1 } }, { "r", { "inf" } }, { "L", { 12 } } } },
                  { "signal", { { "kind", "family_member" }, { "eps", 0.05 } } } });
  return out;
}

std::string all_csv(const RunOutputs& out)
{
  std::string s = results_csv_text(out);
  for (const auto& [name, text] : out.extra)
    s += "\n--" + name + "\n" + text;
  return s;
}

Outcome determinism()
{
  int compared = 0;
  std::string mismatch;
  for (auto raw : determinism_configs()) {
    raw["seed"] = 1111;
    raw["threads"] = 1;
    auto a = all_csv(run_experiment(resolve_config(raw)));
    auto b = all_csv(run_experiment(resolve_config(raw)));
    raw["threads"] = 3;
    auto c = all_csv(run_experiment(resolve_config(raw)));
    compared += 3;
    if (a != b || a != c)
      mismatch += raw["kind"].get<std::string>() + " ";
  }
  // the acceptance suites with fixed seeds
  std::ostringstream v1, v2;
  verify_suite(v1, 3);
  verify_suite(v2, 3);
  compared += 1;
  if (v1.str() != v2.str())
    mismatch += "verify ";
  auto ds = design_1d();
  RiskSetup setup;
  setup.H = ds.H;
  setup.cfg = scaled_config(ds, 0.05);
  setup.bootstrap_resamples = 200;
  setup.amplitude_log_spread = 2.5;
  std::string runs[2];
  for (int t = 0; t < 2; ++t) {
    setup.threads = 1 + 2 * t;
    auto est = mc_risk(100.0 * ds.f0, setup, ds.K, 2.0, 2.0, 0.05, 40, 707);
    std::ostringstream os;
    os.precision(17);
    os << est.risk << "," << est.stderr_;
    for (double l : est.losses)
      os << "," << l;
    runs[t] = os.str();
  }
  compared += 1;
  if (runs[0] != runs[1])
    mismatch += "mc_risk ";
  return { mismatch.empty(), std::to_string(compared) + " outputs compared" +
                               (mismatch.empty() ? std::string() : ", mismatch in " + mismatch) };
}

struct Criterion
{
  const char* name;
  std::function<Outcome()> run;
  double time_limit; // seconds, 0 for none
};

const std::map<int, Criterion>& criteria()
{
  static const std::map<int, Criterion> table = {
    { 1, { "kernel moments", kernel_suite, 1.0 } },
    { 2, { "differences and family membership", difference_membership_suite, 30.0 } },
    { 3, { "packing sets", vg_suite, 10.0 } },
    { 4, { "rate calculus", rate_calculus_suite, 1.0 } },
    { 5, { "lattice complexity", lattice_complexity_suite, 10.0 } },
    { 6, { "pathwise oracle inequality", oracle_inequality, 0.0 } },
    { 7, { "rate slope, one dimension", rate_slope_1d, 0.0 } },
    { 8, { "rate slope, anisotropic", rate_slope_2d, 0.0 } },
    { 9, { "upper-function exceedance", upper_function_exceedance, 0.0 } },
    { 10, { "lower-bound separation", lower_bound_separation, 0.0 } },
    { 11, { "determinism", determinism, 0.0 } },
  };
  return table;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "acceptance criteria" };
  std::vector<int> which;
  app.add_option("--criterion", which, "criterion numbers (default: all)");
  CLI11_PARSE(app, argc, argv);
  if (which.empty())
    for (const auto& [k, c] : criteria())
      which.push_back(k);

  bool all = true;
  for (int k : which) {
    auto it = criteria().find(k);
    if (it == criteria().end()) {
      std::printf("criterion %d: unknown\n", k);
      all = false;
      continue;
    }
    const auto& c = it->second;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = { false, std::string("exception: ") + e.what() };
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit > 0 && secs > c.time_limit) {
      o.pass = false;
      o.detail += ", over the " + fmt("%g", c.time_limit) + " s budget";
    }
    std::printf("criterion %d %s: %s (%s; %.1f s)\n", k, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
