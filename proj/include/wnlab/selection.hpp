#pragma once

#include "wnlab/bandwidths.hpp"
#include "wnlab/kernels.hpp"
#include "wnlab/model.hpp"

#include <map>
#include <vector>

namespace wnlab {

//! (sum |g|^p Delta)^{1/p} over the grid, max for p = inf
double lp_norm(const GridFunction& g, double p);
//! || a - b ||_p without allocating the difference
double lp_distance(const GridFunction& a, const GridFunction& b, double p);

struct UpperConstants
{
  double C1 = 0, C3 = 0, C4 = 0;
};

//! E|Z|^k for a standard normal Z
double abs_normal_moment(double k);
//! 2^{d/v} [2u int_0^inf z^{u-1} exp(-z^{2/v} / (8 ||K||_2^2)) dz]^{1/(uv)}
double C3_uv(double u, double v, double K_norm2, int d);
UpperConstants compute_constants(const ProductKernel& K, int d, double p, double q, double b);

struct UpperFunctionConfig
{
  double C1 = 0, C3 = 0, C4 = 0;
  //! overrides of the default C2(r) = r
  std::map<int, double> C2_table;
  double p = 2, q = 2;
  double h_eps = 0;  // bandwidth threshold for the refined branch
  double A_eps = 0;  // integrability constant
  double b = 1;
  int dim = 1;
  int r_cap = 64;

  double C2(int r) const;
  //! C_{2,p} = (2b)^{d/p} min_r C2(r)
  double C2p() const;
  //! throws std::invalid_argument on nonpositive or nonfinite constants
  void validate() const;
};

//! C2(r) = r ||K||_2 / (floor(p)+1), so the smallest admissible r gets the
//! kernel's L2 norm and the constant penalty tracks the noise scale
std::map<int, double> kernel_scaled_C2(const ProductKernel& K, double p, int r_cap = 64);

//! constants from the kernel and tuning values from the default formulas
UpperFunctionConfig make_upper_config(const ProductKernel& K, const Grid& grid, double p, double q, double eps);

struct PsiValue
{
  double value = 0;
  double tilde = 0;
  double bar = 0;          // +inf when the refined branch does not apply
  bool bar_used = false;
  bool fallback = false;   // refined branch requested but no admissible r
};

//! C1 || sqrt|ln(eps V)| V^{-1/2} ||_p
double psi_tilde(const BandwidthField& h, double eps, const UpperFunctionConfig& cfg);
PsiValue psi(const BandwidthField& h, double eps, const UpperFunctionConfig& cfg);
//! constant-bandwidth penalty
double psi_const(const BandwidthField& h, double eps, const UpperFunctionConfig& cfg);

enum class PenaltyKind
{
  general,
  constant
};

double penalty(const BandwidthField& h, double eps, const UpperFunctionConfig& cfg, PenaltyKind kind);

struct SelectionResult
{
  std::size_t chosen_index = 0;
  std::vector<double> rhat;
  std::vector<double> penalty; // Psi(h) (not multiplied by eps)
  std::vector<double> objective;
  bool slack_used = false;
};

inline constexpr std::size_t default_H_cap = 256;

std::vector<double> pairwise_stat(const Observation& obs,
                                  const std::vector<BandwidthField>& H,
                                  double p,
                                  double eps,
                                  const UpperFunctionConfig& cfg,
                                  const ProductKernel& K,
                                  PenaltyKind kind = PenaltyKind::general,
                                  std::size_t cap = default_H_cap);

SelectionResult select(const Observation& obs,
                       const std::vector<BandwidthField>& H,
                       double p,
                       double eps,
                       const UpperFunctionConfig& cfg,
                       const ProductKernel& K,
                       PenaltyKind kind = PenaltyKind::general,
                       std::size_t cap = default_H_cap);

//! Selection that also returns every estimate it computed, keyed by field.
class Selector
{
public:
  Selector(const Observation& obs, const ProductKernel& K);
  const GridFunction& estimate(const BandwidthField& h);
  SelectionResult run(const std::vector<BandwidthField>& H,
                      double p,
                      double eps,
                      const UpperFunctionConfig& cfg,
                      PenaltyKind kind,
                      std::size_t cap = default_H_cap);

private:
  const Observation& obs_;
  const ProductKernel& K_;
  std::map<std::vector<int>, GridFunction> cache_;
};

//! every constant lattice bandwidth that is resolvable on the grid, no
//! larger than h_max per axis, and with volume at least v_min
std::vector<BandwidthField> constant_lattice(const Grid& grid, double h_max = 1.0, double v_min = 0.0);

} // namespace wnlab
