#pragma once

#include "wnlab/class_spec.hpp"
#include "wnlab/model.hpp"
#include "wnlab/rates.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace wnlab {

//! e^{-1/(1-t^2)} on (-1,1), zero elsewhere
double bump(double t);
//! k-th derivative of the bump, from its closed form P_k(t) g(t) / (1-t^2)^{2k}
double bump_derivative(double t, int k);

//! prod_j e g(x_j / (0.9 b)) * sum_j sum_{k<terms} 2^{-beta_j k} cos(2^{k+1} pi x_j / b + k):
//! a lacunary test signal whose smoothness along axis j is exactly beta_j down
//! to the finest frequency; terms = 0 picks log2(n) - 1, whose finest wavelength is two grid steps
GridFunction lacunary_signal(const Grid& grid, const std::vector<double>& beta, int terms = 0);
//! largest useful number of lacunary terms on the grid
int default_lacunary_terms(const Grid& grid);

//! Sparse binary word: sorted positions of the ones.
struct BinaryWord
{
  int length = 0;
  std::vector<int> ones;

  std::string bits() const;
  static BinaryWord from_bits(const std::string& s);
  bool operator==(const BinaryWord&) const = default;
};

int hamming(const BinaryWord& a, const BinaryWord& b);

struct VgCertificate
{
  int m = 0, n = 0;
  std::size_t size = 0;
  double bound = 0;        // 2^{-m} (n/m - 1)^{m/2}
  int min_distance = 0;    // over distinct pairs; 0 if fewer than two words
  bool weights_ok = false;
  bool distance_ok = false;
  bool cardinality_ok = false;
  bool ratio_ok = false;   // n/m >= 9
  int restarts_used = 0;
  bool ok() const { return weights_ok && distance_ok && cardinality_ok; }
};

//! exhaustive check of weight, pairwise distance and cardinality
VgCertificate certify_vg(const std::vector<BinaryWord>& words, int m, int n);

struct VgSet
{
  std::vector<BinaryWord> words;
  VgCertificate certificate;
};

double vg_bound(int m, int n);
//! weight-m words with pairwise distance >= m/2, by randomized greedy packing
VgSet vg_set(int m, int n, std::uint64_t seed = 1, int restarts = 64);

struct LowerBoundConstants
{
  double C1 = 0; // membership constant
  double C2 = 0; // separation constant
  double C3 = 0; // energy constant
};

//! constants determined by the bump for the given class and norm
LowerBoundConstants default_lower_bound_constants(const ClassSpec& theta, double p);

struct BumpFamily
{
  ClassSpec theta;
  double p = 2, eps = 0, b = 1;
  Zone zone = Zone::Dense;
  double A = 0;
  int m = 0;
  std::vector<double> sigma;
  std::vector<int> M;
  std::size_t cells = 0; // |M| = prod M_l
  std::vector<BinaryWord> W; // W[0] is the zero word
  double rho = 0;
  double varpi = 0;
  LowerBoundConstants constants;
  std::map<std::string, double> calibrated;
  bool cond_likelihood = false; // A^2 eps^-2 prod sigma <= (2 C3)^-1 [log2(|M|/m - 1) - 2]
  bool cond_membership = false; // A sigma_l^-beta_l (m prod sigma)^{1/r_l} <= L_l / C1
  bool cond_log_card = false;   // C3 eps^-2 A^2 m prod sigma <= ln |W|
  VgCertificate certificate;

  //! center of the bump along axis l for index j in 1..M_l
  double center(int l, int j) const { return -b + (2.0 * j - 1.0) * sigma[l]; }
};

BumpFamily build_family(const ClassSpec& theta,
                        double p,
                        double eps,
                        const LowerBoundConstants& constants,
                        double b = 1.0,
                        std::uint64_t seed = 1);

//! f_w on the grid; throws if w is not in the family
GridFunction render_family_member(const BumpFamily& fam, const BinaryWord& w, const Grid& grid);
//! same without the membership check
GridFunction render_word(const BumpFamily& fam, const BinaryWord& w, const Grid& grid);

} // namespace wnlab
