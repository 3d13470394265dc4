#include "wnlab/rates.hpp"
#include "wnlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wnlab {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

ClassSpec::ClassSpec(std::vector<double> beta_, std::vector<double> r_, std::vector<double> L_)
  : beta(std::move(beta_))
  , r(std::move(r_))
  , L(std::move(L_))
{
  if (beta.empty() || beta.size() > 3 || r.size() != beta.size() || L.size() != beta.size())
    throw std::invalid_argument("class parameters must be 1 to 3 equal-length tuples");
  for (std::size_t j = 0; j < beta.size(); ++j) {
    if (!(beta[j] > 0.0) || std::isinf(beta[j]))
      throw std::invalid_argument("smoothness must be positive and finite");
    if (!(r[j] >= 1.0))
      throw std::invalid_argument("norm index must be >= 1");
    if (!(L[j] > 0.0) || std::isinf(L[j]))
      throw std::invalid_argument("radius must be positive and finite");
  }
}

std::vector<int> ClassSpec::k() const
{
  std::vector<int> out;
  for (double b : beta)
    out.push_back(static_cast<int>(std::floor(b)) + 1);
  return out;
}

std::string to_string(Zone z)
{
  switch (z) {
    case Zone::Dense:
      return "dense";
    case Zone::Sparse:
      return "sparse";
    case Zone::NewZone:
      return "new_zone";
    default:
      return "no_consistency";
  }
}

double tau(const RateProfile& prof, double s)
{
  double last = std::isinf(s) ? 0.0 : prof.inv_beta / s;
  return 1.0 - prof.inv_omega + last;
}

double kappa(const RateProfile& prof, double s)
{
  if (std::isinf(s))
    return -inf;
  if (prof.inv_omega == 0.0)
    return inf;
  return prof.omega * (2.0 + prof.inv_beta) - s;
}

RateProfile aggregates(const ClassSpec& theta, double p)
{
  if (!(p >= 1.0))
    throw std::invalid_argument("norm index p must be >= 1");
  RateProfile pr;
  pr.theta = theta;
  pr.p = p;
  const int d = theta.dim();
  double log_Lb = 0.0;
  double rmax = 1.0;
  double rmax_finite = 0.0;
  for (int j = 0; j < d; ++j) {
    pr.inv_beta += 1.0 / theta.beta[j];
    if (!std::isinf(theta.r[j])) {
      pr.inv_omega += 1.0 / (theta.beta[j] * theta.r[j]);
      rmax_finite = std::max(rmax_finite, theta.r[j]);
    }
    rmax = std::max(rmax, theta.r[j]);
    log_Lb += std::log(theta.L[j]) / theta.beta[j];
  }
  pr.beta = 1.0 / pr.inv_beta;
  pr.omega = pr.inv_omega == 0.0 ? inf : 1.0 / pr.inv_omega;
  pr.L_beta = std::exp(log_Lb);
  pr.p_star = std::max(rmax, p);
  pr.p_pm = std::max(rmax_finite, p);

  const double tau_pm = tau(pr, pr.p_pm);
  double log_Lg = 0.0;
  for (int j = 0; j < d; ++j) {
    double g, q;
    if (std::isinf(theta.r[j])) {
      g = theta.beta[j];
      q = inf;
    } else {
      g = theta.beta[j] * tau_pm / tau(pr, theta.r[j]);
      q = pr.p_pm;
    }
    pr.gamma_vec.push_back(g);
    pr.q_vec.push_back(q);
    pr.inv_gamma += 1.0 / g;
    if (!std::isinf(q))
      pr.inv_upsilon += 1.0 / (g * q);
    log_Lg += std::log(theta.L[j]) / g;
  }
  pr.gamma = 1.0 / pr.inv_gamma;
  pr.upsilon = pr.inv_upsilon == 0.0 ? inf : 1.0 / pr.inv_upsilon;
  pr.L_gamma = std::exp(log_Lg);
  return pr;
}

RateProfile classify(const ClassSpec& theta, double p)
{
  RateProfile pr = aggregates(theta, p);
  const double kp = kappa(pr, p);
  const double tps = tau(pr, pr.p_star);
  pr.boundary_kappa_zero = std::abs(kp) <= rate_zero_tol;
  pr.boundary_rj_one = *std::min_element(theta.r.begin(), theta.r.end()) == 1.0;

  if (kp > rate_zero_tol) {
    pr.zone = Zone::Dense;
    pr.a = pr.beta / (2.0 * pr.beta + 1.0);
  } else if (tps > rate_zero_tol) {
    pr.zone = Zone::Sparse;
    pr.a = tau(pr, p) / (2.0 * tau(pr, 2.0));
  } else if (pr.p_star > p) {
    pr.zone = Zone::NewZone;
    if (std::isinf(pr.p_star))
      pr.a = pr.omega / p;
    else
      pr.a = pr.omega * (pr.p_star - p) /
             (p * (pr.p_star - pr.omega * (2.0 + pr.inv_beta)));
  } else {
    pr.zone = Zone::NoConsistency;
    pr.a = 0.0;
  }

  // consistency region as defined through tau for p >= 2 and kappa below 2
  double crit = p >= 2.0 ? tau(pr, p) : kp;
  pr.consistent = crit > rate_zero_tol || pr.p_star > p;
  return pr;
}

double lower_normalization(const RateProfile& pr, double eps)
{
  const double e2 = eps * eps;
  const double le = std::abs(std::log(eps));
  switch (pr.zone) {
    case Zone::Dense:
      return pr.L_beta * e2;
    case Zone::Sparse: {
      double inv_p = std::isinf(pr.p) ? 0.0 : 1.0 / pr.p;
      return std::pow(pr.L_beta, (1.0 - 2.0 * inv_p) / tau(pr, pr.p)) * e2 * le;
    }
    default:
      return pr.L_beta * e2 * le;
  }
}

double V_p(const RateProfile& pr)
{
  if (std::isinf(pr.p))
    return pr.L_gamma;
  const double t2 = tau(pr, 2.0);
  const double tp = tau(pr, pr.p);
  const double dg = pr.inv_gamma - pr.inv_beta;
  // log of the displayed expression, which is V_p raised to the rate exponent
  double log_disp = tp / (2.0 * t2) * std::log(pr.L_beta);
  if (std::abs(dg) > 1e-14) {
    double expo = (pr.p - pr.omega * (2.0 + pr.inv_beta)) /
                  (2.0 * pr.p * pr.beta * pr.omega * t2 * dg);
    log_disp += expo * std::log(pr.L_gamma / pr.L_beta);
  }
  return std::exp(log_disp * 2.0 * t2 / tp);
}

double upper_normalization(const RateProfile& pr, double eps)
{
  if (!pr.consistent || pr.zone == Zone::NoConsistency)
    throw ZoneMismatch("upper rate requested outside the consistency region");
  const double e2 = eps * eps;
  const double le = std::abs(std::log(eps));
  const double kp = kappa(pr, pr.p);
  if (kp >= -rate_zero_tol)
    return pr.L_beta * e2;
  if (tau(pr, pr.p_star) <= rate_zero_tol) {
    double Lstar = inf;
    for (int j = 0; j < pr.theta.dim(); ++j)
      if (pr.theta.r[j] == pr.p_star)
        Lstar = std::min(Lstar, pr.theta.L[j]);
    if (std::isinf(Lstar))
      throw std::domain_error("no axis attains the largest norm index");
    return pr.L_beta * std::pow(Lstar, 1.0 / pr.a) * e2 * le;
  }
  return V_p(pr) * e2 * le;
}

double lower_rate(const ClassSpec& theta, double p, double eps)
{
  auto pr = classify(theta, p);
  return std::pow(lower_normalization(pr, eps), pr.a);
}

double upper_rate(const ClassSpec& theta, double p, double eps)
{
  auto pr = classify(theta, p);
  return std::pow(upper_normalization(pr, eps), pr.a);
}

} // namespace wnlab
