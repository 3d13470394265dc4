#pragma once

#include "wnlab/class_spec.hpp"

#include <string>
#include <vector>

namespace wnlab {

enum class Zone
{
  Dense,
  Sparse,
  NewZone,
  NoConsistency
};

std::string to_string(Zone z);

//! |kappa|, |tau| at or below this are treated as zero
inline constexpr double rate_zero_tol = 1e-12;

struct RateProfile
{
  ClassSpec theta;
  double p = 2;

  double inv_beta = 0;  // sum 1/beta_j
  double inv_omega = 0; // sum 1/(beta_j r_j); 0 when every r_j is infinite
  double beta = 0;
  double omega = 0; // +inf when inv_omega == 0
  double L_beta = 0;
  double p_star = 0;
  double p_pm = 0;
  std::vector<double> gamma_vec, q_vec;
  double inv_gamma = 0, inv_upsilon = 0;
  double gamma = 0, upsilon = 0, L_gamma = 0;

  Zone zone = Zone::Dense;
  double a = 0;
  bool boundary_kappa_zero = false;
  bool boundary_rj_one = false;
  bool consistent = true;
};

double tau(const RateProfile& prof, double s);
double kappa(const RateProfile& prof, double s);

//! aggregate quantities only; zone fields left at defaults
RateProfile aggregates(const ClassSpec& theta, double p);
//! aggregates plus zone, exponent and boundary flags
RateProfile classify(const ClassSpec& theta, double p);

double lower_normalization(const RateProfile& prof, double eps);
double upper_normalization(const RateProfile& prof, double eps);
//! delta_eps^a
double lower_rate(const ClassSpec& theta, double p, double eps);
//! bar-delta_eps^a; throws for parameters outside the consistency region
double upper_rate(const ClassSpec& theta, double p, double eps);
double V_p(const RateProfile& prof);

} // namespace wnlab
