#pragma once

#include "wnlab/bandwidths.hpp"
#include "wnlab/kernels.hpp"
#include "wnlab/model.hpp"
#include "wnlab/rates.hpp"
#include "wnlab/selection.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wnlab {

//! Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware).
//! Results must be written by index so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

enum class RiskMethod
{
  select_const,
  select_varying,
  fixed_h
};

std::string to_string(RiskMethod m);
RiskMethod risk_method_from_string(const std::string& s);

struct RiskSetup
{
  RiskMethod method = RiskMethod::select_const;
  std::vector<BandwidthField> H;          // selection family
  std::optional<BandwidthField> fixed;    // used by fixed_h
  UpperFunctionConfig cfg;                // unused by fixed_h
  std::size_t cap = default_H_cap;
  unsigned threads = 0;
  int bootstrap_resamples = 1000;
  //! replication i observes exp(spread ((i + 1/2)/reps - 1/2)) f, a stratified
  //! log-uniform amplitude prior; 0 keeps f fixed
  double amplitude_log_spread = 0;
};

//! amplitude multiplier of replication i
double replication_scale(const RiskSetup& setup, std::size_t i, int reps);

struct RiskEstimate
{
  double risk = 0;
  double stderr_ = 0;
  int reps = 0;
  std::vector<double> losses;          // ||f_hat - f||_p per replication
  std::vector<std::size_t> chosen;     // selected index per replication (0 for fixed_h)
};

//! bootstrap standard error of (mean x^q)^{1/q}
double bootstrap_stderr(const std::vector<double>& losses, double q, int resamples, std::uint64_t seed);

//! replication i uses noise stream i of `seed`
RiskEstimate mc_risk(const GridFunction& f,
                     const RiskSetup& setup,
                     const ProductKernel& K,
                     double p,
                     double q,
                     double eps,
                     int reps,
                     std::uint64_t seed);

struct OracleTerms
{
  std::vector<double> bias;    // sup_eta ||B_{h,eta}||_p + ||B_h||_p
  std::vector<double> penalty; // Psi(h)
  std::size_t argmin = 0;
  double value = 0;            // min_h bias + eps Psi
};

OracleTerms oracle_benchmark(const GridFunction& f,
                             const std::vector<BandwidthField>& H,
                             double p,
                             double eps,
                             const UpperFunctionConfig& cfg,
                             const ProductKernel& K,
                             PenaltyKind kind = PenaltyKind::general);

struct OracleBound
{
  std::vector<double> bias;    // 3 ||K||_1 sum_j ||b_{h,j}||_p
  std::vector<double> penalty; // constant-bandwidth penalty
  std::size_t argmin = 0;
  double min_term = 0;
  double slack = 0;            // 9 (C3 + C4 + 2) eps
  double bound = 0;            // 5 min_term + slack
};

//! bound for selection over constant bandwidths, from directional biases
OracleBound oracle_bound_const(const GridFunction& f,
                               const std::vector<BandwidthField>& H,
                               double p,
                               double eps,
                               const UpperFunctionConfig& cfg,
                               const ProductKernel& K);

struct UpperFunctionReport
{
  double moment = 0;   // mean of sup_h [||xi_h||_p - Psi~(h)]_+^q
  double stderr_ = 0;
  double bound = 0;    // (C3 eps)^q
  double ratio = 0;    // moment / bound
  int reps = 0;
  std::vector<double> exceedance; // sup_h [..]_+ per replication
};

//! xi_h = S_h(dW / Delta) is the unit-level noise field; eps enters only through
//! the thresholds and the bound
UpperFunctionReport upper_function_check(const Grid& grid,
                                         const std::vector<BandwidthField>& H,
                                         double eps,
                                         int reps,
                                         const UpperFunctionConfig& cfg,
                                         const ProductKernel& K,
                                         std::uint64_t seed,
                                         unsigned threads = 0);

struct RateFit
{
  double slope = 0;
  double intercept = 0;
  double halfwidth = 0; // 95% confidence
  int points = 0;
};

//! OLS of ln y on ln x; needs >= 4 points spanning at least a decade in x
RateFit rate_fit(const std::vector<double>& x, const std::vector<double>& y);

//! eps for the dense zone, eps^2 |ln eps| otherwise
double rate_argument(Zone zone, double eps);
//! slope of ln risk against ln(rate_argument) predicted by the rate profile
double theoretical_slope(const RateProfile& pr);

struct RiskRow
{
  double eps = 0;
  double risk = 0;
  double stderr_ = 0;
  int reps = 0;
  double oracle = 0;
  double ratio = 0;
};

struct RiskReport
{
  std::string signal;
  double p = 2, q = 2;
  std::string H_descriptor;
  std::string kernel_descriptor;
  std::uint64_t seed = 0;
  std::vector<RiskRow> rows;
  std::optional<RateFit> fit;
  double theoretical = 0;
  std::string branch;
};

//! eps,risk,stderr,oracle,ratio
void write_risk_csv(std::ostream& os, const RiskReport& r);

} // namespace wnlab
