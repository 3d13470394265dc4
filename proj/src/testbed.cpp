#include "wnlab/testbed.hpp"
#include "wnlab/errors.hpp"
#include "wnlab/quadrature.hpp"
#include "wnlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace wnlab {

double bump(double t)
{
  if (std::abs(t) >= 1.0)
    return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

namespace {

using Poly = std::vector<double>; // coefficients, lowest degree first

Poly poly_mul(const Poly& a, const Poly& b)
{
  Poly c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      c[i + j] += a[i] * b[j];
  return c;
}

Poly poly_add(Poly a, const Poly& b)
{
  if (b.size() > a.size())
    a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i)
    a[i] += b[i];
  return a;
}

Poly poly_deriv(const Poly& a)
{
  if (a.size() <= 1)
    return { 0.0 };
  Poly d(a.size() - 1);
  for (std::size_t i = 1; i < a.size(); ++i)
    d[i - 1] = i * a[i];
  return d;
}

// P_{k+1} = P_k' (1-t^2)^2 + 4k t (1-t^2) P_k - 2t P_k
Poly bump_poly(int k)
{
  Poly P{ 1.0 };
  const Poly one_minus_t2{ 1.0, 0.0, -1.0 };
  const Poly sq = poly_mul(one_minus_t2, one_minus_t2);
  for (int i = 0; i < k; ++i) {
    Poly a = poly_mul(poly_deriv(P), sq);
    Poly b = poly_mul(poly_mul(Poly{ 0.0, 4.0 * i }, one_minus_t2), P);
    Poly c = poly_mul(Poly{ 0.0, -2.0 }, P);
    P = poly_add(poly_add(a, b), c);
  }
  return P;
}

double poly_eval(const Poly& P, double t)
{
  double s = 0.0;
  for (auto it = P.rbegin(); it != P.rend(); ++it)
    s = s * t + *it;
  return s;
}

double norm_1d(const std::function<double(double)>& f, double r)
{
  if (std::isinf(r)) {
    const int m = 200000;
    double best = 0.0;
    for (int i = 0; i <= m; ++i)
      best = std::max(best, std::abs(f(-1.0 + 2.0 * i / m)));
    return best;
  }
  return std::pow(simpson([&](double t) { return std::pow(std::abs(f(t)), r); }, -1.0, 1.0), 1.0 / r);
}

} // namespace

double bump_derivative(double t, int k)
{
  if (k < 0)
    throw std::invalid_argument("derivative order must be nonnegative");
  if (std::abs(t) >= 1.0)
    return 0.0;
  if (k == 0)
    return bump(t);
  const double v = 1.0 - t * t;
  return poly_eval(bump_poly(k), t) * bump(t) / std::pow(v, 2 * k);
}

int default_lacunary_terms(const Grid& grid)
{
  return std::max(1, static_cast<int>(std::floor(std::log2(grid.points_per_axis()))) - 1);
}

GridFunction lacunary_signal(const Grid& grid, const std::vector<double>& beta, int terms)
{
  const int d = grid.dim();
  if (static_cast<int>(beta.size()) != d)
    throw std::invalid_argument("one smoothness value per axis is required");
  if (terms <= 0)
    terms = default_lacunary_terms(grid);
  const double b = grid.half_width();
  return tabulate(grid, [&](std::span<const double> x) {
    double cut = 1.0, sum = 0.0;
    for (int j = 0; j < d; ++j) {
      const double t = x[j] / b;
      cut *= std::exp(1.0) * bump(t / 0.9);
      for (int k = 0; k < terms; ++k)
        sum += std::pow(2.0, -beta[j] * k) * std::cos(std::pow(2.0, k + 1) * std::numbers::pi * t + k);
    }
    return cut * sum;
  });
}

std::string BinaryWord::bits() const
{
  std::string s(length, '0');
  for (int i : ones)
    s[i] = '1';
  return s;
}

BinaryWord BinaryWord::from_bits(const std::string& s)
{
  BinaryWord w;
  w.length = static_cast<int>(s.size());
  for (int i = 0; i < w.length; ++i) {
    if (s[i] == '1')
      w.ones.push_back(i);
    else if (s[i] != '0')
      throw std::invalid_argument("bitstring may contain only 0 and 1");
  }
  return w;
}

int hamming(const BinaryWord& a, const BinaryWord& b)
{
  if (a.length != b.length)
    throw std::invalid_argument("words have different lengths");
  std::size_t i = 0, j = 0;
  int common = 0;
  while (i < a.ones.size() && j < b.ones.size()) {
    if (a.ones[i] == b.ones[j]) {
      ++common;
      ++i;
      ++j;
    } else if (a.ones[i] < b.ones[j])
      ++i;
    else
      ++j;
  }
  return static_cast<int>(a.ones.size() + b.ones.size()) - 2 * common;
}

double vg_bound(int m, int n)
{
  double ratio = static_cast<double>(n) / m - 1.0;
  if (ratio <= 0.0)
    return 0.0;
  return std::pow(2.0, -m) * std::pow(ratio, m / 2.0);
}

VgCertificate certify_vg(const std::vector<BinaryWord>& words, int m, int n)
{
  VgCertificate c;
  c.m = m;
  c.n = n;
  c.size = words.size();
  c.bound = vg_bound(m, n);
  c.ratio_ok = n >= 9 * m;
  c.weights_ok = true;
  for (const auto& w : words) {
    if (w.length != n || static_cast<int>(w.ones.size()) != m)
      c.weights_ok = false;
    for (int i : w.ones)
      if (i < 0 || i >= n)
        c.weights_ok = false;
  }
  c.distance_ok = true;
  c.min_distance = 0;
  bool first = true;
  for (std::size_t a = 0; a < words.size(); ++a)
    for (std::size_t b = a + 1; b < words.size(); ++b) {
      int dist = hamming(words[a], words[b]);
      c.min_distance = first ? dist : std::min(c.min_distance, dist);
      first = false;
      if (2 * dist < m)
        c.distance_ok = false;
    }
  c.cardinality_ok = static_cast<double>(words.size()) >= c.bound;
  return c;
}

VgSet vg_set(int m, int n, std::uint64_t seed, int restarts)
{
  if (m < 1 || n < m)
    throw std::invalid_argument("need 1 <= m <= n");
  const double bound = vg_bound(m, n);
  const std::size_t target = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(bound - 1e-12)));
  const int max_common = (3 * m) / 4; // distance 2(m - common) >= m/2
  std::vector<BinaryWord> best;
  std::vector<int> pool(n);
  for (int r = 0; r < restarts; ++r) {
    auto eng = make_engine(seed, static_cast<std::uint64_t>(r));
    std::vector<BinaryWord> words;
    int failures = 0;
    while (words.size() < target && failures < 20000) {
      std::iota(pool.begin(), pool.end(), 0);
      for (int i = 0; i < m; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(pool[i], pool[pick(eng)]);
      }
      BinaryWord w{ n, std::vector<int>(pool.begin(), pool.begin() + m) };
      std::sort(w.ones.begin(), w.ones.end());
      bool ok = true;
      for (const auto& v : words)
        if (m - hamming(w, v) / 2 > max_common) {
          ok = false;
          break;
        }
      if (ok) {
        words.push_back(std::move(w));
        failures = 0;
      } else
        ++failures;
    }
    if (words.size() > best.size())
      best = words;
    if (words.size() >= target) {
      VgSet out{ std::move(words), {} };
      out.certificate = certify_vg(out.words, m, n);
      out.certificate.restarts_used = r + 1;
      return out;
    }
  }
  throw InfeasibleError("packing reached only " + std::to_string(best.size()) + " words, below the bound " +
                        std::to_string(bound));
}

LowerBoundConstants default_lower_bound_constants(const ClassSpec& theta, double p)
{
  const int d = theta.dim();
  const auto k = theta.k();
  LowerBoundConstants c;
  auto g = [](double t) { return bump(t); };
  for (int l = 0; l < d; ++l) {
    double gn = norm_1d(g, theta.r[l]);
    double dn = norm_1d([&](double t) { return bump_derivative(t, k[l]); }, theta.r[l]);
    c.C1 = std::max({ c.C1, std::pow(2.0, k[l]) * std::pow(gn, d), dn * std::pow(gn, d - 1) });
  }
  c.C2 = 0.5 * std::pow(norm_1d(g, p), d);
  c.C3 = std::pow(simpson([](double t) { return bump(t) * bump(t); }, -1.0, 1.0), d);
  return c;
}

namespace {

struct Layout
{
  std::vector<double> sigma;
  std::vector<int> M;
  double cells = 1;
  bool fits = true; // every sigma below b/2
};

Layout layout_from(const std::vector<double>& raw, double b)
{
  Layout L;
  for (double s : raw) {
    double mm = std::ceil(b / s - 1e-9);
    if (!(mm < 1e7)) {
      L.fits = false;
      mm = 1e7;
    }
    int M = std::max(1, static_cast<int>(mm));
    L.M.push_back(M);
    L.sigma.push_back(b / M);
    L.cells *= M;
    if (!(b / M < b / 2.0))
      L.fits = false;
  }
  return L;
}

} // namespace

BumpFamily build_family(const ClassSpec& theta,
                        double p,
                        double eps,
                        const LowerBoundConstants& constants,
                        double b,
                        std::uint64_t seed)
{
  if (!(eps > 0.0 && eps < std::exp(-1.0)))
    throw std::invalid_argument("noise level must lie in (0, 1/e)");
  if (!(constants.C1 > 0.0 && constants.C2 > 0.0 && constants.C3 > 0.0))
    throw std::invalid_argument("lower-bound constants must be positive");
  const auto pr = classify(theta, p);
  const int d = theta.dim();
  BumpFamily fam;
  fam.theta = theta;
  fam.p = p;
  fam.eps = eps;
  fam.b = b;
  fam.zone = pr.zone;
  fam.constants = constants;
  const double le = std::abs(std::log(eps));

  Layout lay;
  double amp_base = 0.0; // A = c * amp_base
  std::string cname;

  if (pr.zone == Zone::Dense) {
    const double base = pr.L_beta * eps * eps;
    fam.varpi = base;
    std::vector<double> raw;
    for (int l = 0; l < d; ++l)
      raw.push_back(std::pow(theta.L[l], -1.0 / theta.beta[l]) *
                    std::pow(base, pr.beta / (theta.beta[l] * (2.0 * pr.beta + 1.0))));
    lay = layout_from(raw, b);
    double m_raw = pr.L_beta * std::pow(base, -1.0 / (2.0 * pr.beta + 1.0)) / 9.0;
    fam.m = static_cast<int>(std::min(std::floor(m_raw), std::floor(lay.cells / 9.0)));
    amp_base = std::pow(base, pr.beta / (2.0 * pr.beta + 1.0));
    cname = "c6";
  } else if (pr.zone == Zone::Sparse) {
    const double t2 = tau(pr, 2.0);
    fam.varpi = eps * eps * le;
    std::vector<double> raw;
    for (int l = 0; l < d; ++l) {
      const double rl = theta.r[l];
      const double lexp = std::isinf(rl) ? 1.0 : (rl - 2.0) / rl;
      raw.push_back(std::pow(theta.L[l], -1.0 / theta.beta[l]) *
                    std::pow(pr.L_beta, lexp / (2.0 * theta.beta[l] * t2)) *
                    std::pow(fam.varpi, tau(pr, rl) / (2.0 * theta.beta[l] * t2)));
    }
    lay = layout_from(raw, b);
    fam.m = 4;
    amp_base = std::pow(pr.L_beta, 1.0 / (2.0 * t2)) * std::pow(fam.varpi, (1.0 - pr.inv_omega) / (2.0 * t2));
    cname = "c4";
  } else {
    const double kps = kappa(pr, pr.p_star);
    double log_varpi;
    if (kps < -rate_zero_tol) {
      double expo = std::isinf(kps) ? 0.0 : pr.omega / kps;
      log_varpi = expo * std::log(pr.L_beta * eps * eps * le);
    } else {
      log_varpi = std::log(pr.L_beta) + 1.0 / (eps * eps);
    }
    if (!(log_varpi > 0.0) || log_varpi > 700.0)
      throw InfeasibleError("separation scale is not in (1, overflow) at this noise level");
    fam.varpi = std::exp(log_varpi);
    const double tps = tau(pr, pr.p_star);
    double c2 = 1.0;
    double m_raw = c2 * pr.L_beta * std::exp(-pr.p_star * tps * log_varpi);
    for (int i = 0; i < 60 && m_raw < 4.0; ++i) {
      c2 *= 2.0;
      m_raw *= 2.0;
    }
    if (!(m_raw >= 4.0) || m_raw > 1e7)
      throw InfeasibleError("sparsity parameter out of range");
    fam.m = static_cast<int>(std::floor(m_raw));
    fam.calibrated["c2"] = c2;
    double c3 = 1.0;
    bool ok = false;
    for (int i = 0; i < 500 && !ok; ++i) {
      std::vector<double> raw;
      for (int l = 0; l < d; ++l) {
        const double rl = theta.r[l];
        const double e = std::isinf(rl) ? 1.0 / theta.beta[l] : (rl - pr.p_star) / (theta.beta[l] * rl);
        raw.push_back(c3 * std::pow(theta.L[l], -1.0 / theta.beta[l]) * std::exp(e * log_varpi));
      }
      lay = layout_from(raw, b);
      ok = lay.fits && lay.cells / fam.m >= 9.0;
      if (!ok)
        c3 *= 0.9;
    }
    if (!ok)
      throw InfeasibleError("no bump width satisfies the packing condition");
    fam.calibrated["c3"] = c3;
    amp_base = fam.varpi;
    cname = "c1";
  }

  if (!lay.fits)
    throw InfeasibleError("bump half-width is not below b/2 at this noise level");
  if (lay.cells > 1e7)
    throw InfeasibleError("too many bump cells");
  if (fam.m < 4)
    throw InfeasibleError("sparsity parameter below 4 at this noise level");
  if (lay.cells / fam.m < 9.0)
    throw InfeasibleError("fewer than 9 cells per active bump");
  fam.sigma = lay.sigma;
  fam.M = lay.M;
  fam.cells = static_cast<std::size_t>(lay.cells);

  double prod_sigma = 1.0;
  for (double s : fam.sigma)
    prod_sigma *= s;
  const double rhs24 = (std::log2(lay.cells / fam.m - 1.0) - 2.0) / (2.0 * constants.C3);
  auto conditions = [&](double A, bool& lik, bool& mem) {
    lik = A * A * prod_sigma / (eps * eps) <= rhs24;
    mem = true;
    for (int l = 0; l < d; ++l) {
      const double rl = theta.r[l];
      const double mass = std::isinf(rl) ? 1.0 : std::pow(fam.m * prod_sigma, 1.0 / rl);
      if (A * std::pow(fam.sigma[l], -theta.beta[l]) * mass > theta.L[l] / constants.C1)
        mem = false;
    }
  };
  double c = 1.0;
  for (int i = 0; i < 2000; ++i) {
    conditions(c * amp_base, fam.cond_likelihood, fam.cond_membership);
    if (fam.cond_likelihood && fam.cond_membership)
      break;
    c *= 0.9;
  }
  if (!(fam.cond_likelihood && fam.cond_membership))
    throw InfeasibleError("amplitude calibration failed");
  fam.calibrated[cname] = c;
  fam.A = c * amp_base;

  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  fam.rho = std::pow(2.0, -inv_p) * constants.C2 * fam.A * std::pow(fam.m * prod_sigma, inv_p);

  auto vg = vg_set(fam.m, static_cast<int>(fam.cells), seed);
  fam.certificate = vg.certificate;
  fam.W.push_back(BinaryWord{ static_cast<int>(fam.cells), {} });
  for (auto& w : vg.words)
    fam.W.push_back(std::move(w));
  fam.cond_log_card = constants.C3 * fam.A * fam.A * fam.m * prod_sigma / (eps * eps) <=
                      std::log(static_cast<double>(fam.W.size()));
  return fam;
}

GridFunction render_word(const BumpFamily& fam, const BinaryWord& w, const Grid& grid)
{
  const int d = fam.theta.dim();
  if (grid.dim() != d)
    throw std::invalid_argument("grid dimension does not match the family");
  if (w.length != static_cast<int>(fam.cells))
    throw std::invalid_argument("word length does not match the family");
  GridFunction out(grid);
  const int n = grid.points_per_axis();
  const double step = grid.step();
  for (int pos : w.ones) {
    // row-major position -> per-axis bump indices
    std::array<int, 3> mi{ 0, 0, 0 };
    int t = pos;
    for (int l = d - 1; l >= 0; --l) {
      mi[l] = t % fam.M[l];
      t /= fam.M[l];
    }
    std::array<int, 3> lo{ 0, 0, 0 }, hi{ 0, 0, 0 };
    std::array<double, 3> c{ 0, 0, 0 };
    for (int l = 0; l < d; ++l) {
      c[l] = fam.center(l, mi[l] + 1);
      lo[l] = std::max(0, static_cast<int>(std::floor((c[l] - fam.sigma[l] + fam.b) / step)) - 1);
      hi[l] = std::min(n - 1, static_cast<int>(std::ceil((c[l] + fam.sigma[l] + fam.b) / step)) + 1);
    }
    std::array<int, 3> idx = lo;
    while (true) {
      double v = fam.A;
      for (int l = 0; l < d && v != 0.0; ++l)
        v *= bump((grid.coordinate(idx[l]) - c[l]) / fam.sigma[l]);
      out.values[grid.ravel(idx)] += v;
      int l = d - 1;
      while (l >= 0 && idx[l] == hi[l]) {
        idx[l] = lo[l];
        --l;
      }
      if (l < 0)
        break;
      ++idx[l];
    }
  }
  return out;
}

GridFunction render_family_member(const BumpFamily& fam, const BinaryWord& w, const Grid& grid)
{
  if (std::find(fam.W.begin(), fam.W.end(), w) == fam.W.end())
    throw std::invalid_argument("word is not in the family");
  return render_word(fam, w, grid);
}

} // namespace wnlab
