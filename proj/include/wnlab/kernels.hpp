#pragma once

#include <functional>
#include <span>
#include <string>

namespace wnlab {

enum class KernelProfile
{
  cosine_bump,
  quartic_spline,
  custom
};

std::string to_string(KernelProfile p);
KernelProfile profile_from_string(const std::string& s);

class ScalarKernel
{
public:
  //! `cdf` may be empty; integrals are then taken numerically.
  ScalarKernel(std::function<double(double)> eval,
               std::function<double(double)> cdf,
               int order,
               double support_radius,
               double lipschitz,
               KernelProfile profile = KernelProfile::custom,
               int base_order = 0);

  double operator()(double y) const { return eval_(y); }
  //! integral of the kernel over (-inf, y]
  double cdf(double y) const;
  bool has_cdf() const { return static_cast<bool>(cdf_); }

  int order() const { return order_; }
  double support_radius() const { return radius_; }
  double lipschitz() const { return lipschitz_; }
  KernelProfile profile() const { return profile_; }
  //! order the base profile was scaled for (0 for combined kernels)
  int base_order() const { return base_order_; }

private:
  std::function<double(double)> eval_;
  std::function<double(double)> cdf_;
  int order_;
  double radius_;
  double lipschitz_;
  KernelProfile profile_;
  int base_order_;
};

struct ProductKernel
{
  ScalarKernel scalar;
  int dim;

  double operator()(std::span<const double> t) const;
};

//! base profile scaled to [-1/(2l), 1/(2l)]
ScalarKernel build_base_w(KernelProfile profile, int ell);
//! w_l(y) = sum_i C(l,i) (-1)^{i+1} (1/i) w(y/i)
ScalarKernel build_wl(const ScalarKernel& w, int ell);
ProductKernel product_kernel(const ScalarKernel& wl, int d);
//! shorthand for product_kernel(build_wl(build_base_w(profile, l), l), d)
ProductKernel make_kernel(KernelProfile profile, int ell, int d);

//! int K(y) y^k dy over the support
double kernel_moment(const ScalarKernel& k, int power);
//! one-dimensional L_p norm, p = inf allowed
double scalar_norm(const ScalarKernel& k, double p);
//! ||K||_p on R^d, which factorizes as ||k||_p^d
double kernel_norm(const ProductKernel& K, double p);

struct Assumption1Report
{
  double a = 0;        // estimated support radius
  double A = 0;        // max slope on the coarse sample
  double A_fine = 0;   // max slope on a 10x denser sample
  double integral = 0; // int K
  bool pass = false;
  std::string failure;
};

Assumption1Report check_assumption1(const ProductKernel& K);

} // namespace wnlab
