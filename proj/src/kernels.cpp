#include "wnlab/kernels.hpp"
#include "wnlab/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace wnlab {

namespace {

constexpr double pi = std::numbers::pi;

double binom(int n, int k)
{
  double c = 1.0;
  for (int i = 1; i <= k; ++i)
    c = c * (n - k + i) / i;
  return c;
}

// unit profiles on [-1,1] with their antiderivatives and max |phi'|
double cosine_phi(double u)
{
  return std::abs(u) >= 1.0 ? 0.0 : 0.5 * (1.0 + std::cos(pi * u));
}
double cosine_Phi(double u)
{
  if (u <= -1.0)
    return 0.0;
  if (u >= 1.0)
    return 1.0;
  return 0.5 * (u + 1.0) + std::sin(pi * u) / (2.0 * pi);
}
double quartic_phi(double u)
{
  if (std::abs(u) >= 1.0)
    return 0.0;
  double v = 1.0 - u * u;
  return 15.0 / 16.0 * v * v;
}
double quartic_Phi(double u)
{
  if (u <= -1.0)
    return 0.0;
  if (u >= 1.0)
    return 1.0;
  return 0.5 + 15.0 / 16.0 * (u - 2.0 * u * u * u / 3.0 + std::pow(u, 5) / 5.0);
}

} // namespace

std::string to_string(KernelProfile p)
{
  switch (p) {
    case KernelProfile::cosine_bump:
      return "cosine_bump";
    case KernelProfile::quartic_spline:
      return "quartic_spline";
    default:
      return "custom";
  }
}

KernelProfile profile_from_string(const std::string& s)
{
  if (s == "cosine_bump")
    return KernelProfile::cosine_bump;
  if (s == "quartic_spline")
    return KernelProfile::quartic_spline;
  throw std::invalid_argument("unknown kernel profile '" + s + "'");
}

ScalarKernel::ScalarKernel(std::function<double(double)> eval,
                           std::function<double(double)> cdf,
                           int order,
                           double support_radius,
                           double lipschitz,
                           KernelProfile profile,
                           int base_order)
  : eval_(std::move(eval))
  , cdf_(std::move(cdf))
  , order_(order)
  , radius_(support_radius)
  , lipschitz_(lipschitz)
  , profile_(profile)
  , base_order_(base_order)
{
  if (!(support_radius > 0.0))
    throw std::invalid_argument("support radius must be positive");
}

double ScalarKernel::cdf(double y) const
{
  if (cdf_)
    return cdf_(y);
  if (y <= -radius_)
    return 0.0;
  double hi = std::min(y, radius_);
  return simpson(eval_, -radius_, hi, 1 << 12);
}

double ProductKernel::operator()(std::span<const double> t) const
{
  double v = 1.0;
  for (int j = 0; j < dim; ++j)
    v *= scalar(t[j]);
  return v;
}

ScalarKernel build_base_w(KernelProfile profile, int ell)
{
  if (ell < 1)
    throw std::invalid_argument("kernel order must be >= 1");
  double (*phi)(double) = nullptr;
  double (*Phi)(double) = nullptr;
  double slope = 0.0;
  switch (profile) {
    case KernelProfile::cosine_bump:
      phi = cosine_phi;
      Phi = cosine_Phi;
      slope = pi / 2.0;
      break;
    case KernelProfile::quartic_spline:
      phi = quartic_phi;
      Phi = quartic_Phi;
      slope = 5.0 / (2.0 * std::sqrt(3.0));
      break;
    default:
      throw std::invalid_argument("base profile must be cosine_bump or quartic_spline");
  }
  const double c = 2.0 * ell;
  return ScalarKernel([=](double y) { return c * phi(c * y); },
                      [=](double y) { return Phi(c * y); },
                      1,
                      1.0 / c,
                      c * c * slope,
                      profile,
                      ell);
}

ScalarKernel build_wl(const ScalarKernel& w, int ell)
{
  if (ell < 1)
    throw std::invalid_argument("kernel order must be >= 1");
  if (w.base_order() != ell)
    throw std::invalid_argument("base kernel was not built for this order");
  std::vector<double> coef(ell);
  double lip = 0.0;
  for (int i = 1; i <= ell; ++i) {
    coef[i - 1] = binom(ell, i) * ((i % 2) ? 1.0 : -1.0);
    lip += std::abs(coef[i - 1]) / (double(i) * i);
  }
  lip *= w.lipschitz();
  auto eval = [w, coef](double y) {
    double s = 0.0;
    for (std::size_t i = 1; i <= coef.size(); ++i)
      s += coef[i - 1] / i * w(y / i);
    return s;
  };
  auto cdf = [w, coef](double y) {
    double s = 0.0;
    for (std::size_t i = 1; i <= coef.size(); ++i)
      s += coef[i - 1] * w.cdf(y / i);
    return s;
  };
  return ScalarKernel(eval, cdf, ell, ell * w.support_radius(), lip, w.profile(), 0);
}

ProductKernel product_kernel(const ScalarKernel& wl, int d)
{
  if (d < 1)
    throw std::invalid_argument("kernel dimension must be >= 1");
  return ProductKernel{ wl, d };
}

ProductKernel make_kernel(KernelProfile profile, int ell, int d)
{
  return product_kernel(build_wl(build_base_w(profile, ell), ell), d);
}

namespace {

//! integral over the support, split where the dilated terms of w_l end
double support_integral(const ScalarKernel& k, const std::function<double(double)>& f)
{
  const double a = k.support_radius();
  const int pieces = k.base_order() == 0 ? k.order() : 1;
  double s = 0.0;
  for (int i = -pieces; i < pieces; ++i)
    s += simpson(f, a * i / pieces, a * (i + 1) / pieces, (1 << 14) / pieces);
  return s;
}

} // namespace

double kernel_moment(const ScalarKernel& k, int power)
{
  return support_integral(k, [&](double y) { return k(y) * std::pow(y, power); });
}

double scalar_norm(const ScalarKernel& k, double p)
{
  if (!(p >= 1.0))
    throw std::invalid_argument("norm index must be >= 1");
  const double a = k.support_radius();
  if (std::isinf(p)) {
    const int m = 100000;
    double best = std::abs(k(0.0));
    for (int i = 0; i <= m; ++i)
      best = std::max(best, std::abs(k(-a + 2.0 * a * i / m)));
    return best;
  }
  double s = support_integral(k, [&](double y) { return std::pow(std::abs(k(y)), p); });
  return std::pow(s, 1.0 / p);
}

double kernel_norm(const ProductKernel& K, double p)
{
  return std::pow(scalar_norm(K.scalar, p), K.dim);
}

namespace {

double max_slope(const ScalarKernel& k, double R, int m)
{
  double best = 0.0;
  const double dt = 2.0 * R / m;
  double prev = k(-R);
  for (int i = 1; i <= m; ++i) {
    double cur = k(-R + i * dt);
    best = std::max(best, std::abs(cur - prev) / dt);
    prev = cur;
  }
  return best;
}

} // namespace

Assumption1Report check_assumption1(const ProductKernel& K)
{
  const auto& k = K.scalar;
  Assumption1Report rep;
  // sample well beyond the declared support to detect leakage
  const double R = 2.0 * k.support_radius();
  const int m = 10000;
  for (int i = 0; i <= m; ++i) {
    double t = -R + 2.0 * R * i / m;
    if (std::abs(k(t)) > 1e-13)
      rep.a = std::max(rep.a, std::abs(t));
  }
  rep.A = max_slope(k, R, m);
  rep.A_fine = max_slope(k, R, 10 * m);
  rep.integral = std::pow(kernel_moment(k, 0), K.dim);

  rep.pass = true;
  auto fail = [&](const std::string& why) {
    rep.pass = false;
    if (!rep.failure.empty())
      rep.failure += "; ";
    rep.failure += why;
  };
  if (rep.a > k.support_radius() + 1e-12)
    fail("kernel does not vanish outside its declared support");
  if (std::abs(rep.integral - 1.0) > 1e-10)
    fail("kernel does not integrate to one");
  // a Lipschitz kernel has a slope estimate that settles as the sample
  // refines; a jump makes it grow like the inverse spacing
  if (rep.A_fine > 1.5 * rep.A + 1e-12)
    fail("slope estimate grows with sample density");
  else if (rep.A_fine > k.lipschitz() * (1.0 + 1e-9))
    fail("slope exceeds the declared Lipschitz constant");
  return rep;
}

} // namespace wnlab
