#pragma once

#include "wnlab/class_spec.hpp"
#include "wnlab/model.hpp"

#include <vector>

namespace wnlab {

//! k-th order difference with step u along axis j (0-based), zero extended.
//! u must be a multiple of the grid step.
GridFunction difference(const GridFunction& g, double u, int j, int k);

//! ||Delta^k_{u,j} g||_r over all of R^d (points outside the grid whose
//! shifts reach into it are included)
double difference_norm(const GridFunction& g, double u, int j, int k, double r);

struct MembershipReport
{
  std::vector<double> norms;        // ||g||_{r_j}
  std::vector<double> radii;        // L_j
  std::vector<double> worst_ratio;  // max_u ||Delta^{k_j}_{u,j} g||_{r_j} / (L_j |u|^{beta_j})
  std::vector<double> worst_u;
  double slack = 0.1;
  bool pass = false;
};

//! steps grid step * 2^i up to an eighth of the domain width
std::vector<double> default_u_grid(const Grid& grid);

MembershipReport check_membership(const GridFunction& g,
                                  const ClassSpec& theta,
                                  const std::vector<double>& u_grid,
                                  double slack = 0.1);

struct Embedding
{
  std::vector<double> gamma_bar; // beta_j tau(s) / tau(r_j)
  std::vector<double> gamma;     // gamma_bar clamped by beta_j
  std::vector<double> r_s;       // max(r_j, s)
  double r_star = 0;
  bool valid = false;            // tau(r_star) > 0
};

Embedding embed(const ClassSpec& theta, double s);

//! Sup of box averages over the axes not in `frozen`, with frozen
//! coordinates held at x. Boxes are grid aligned, contain x, and have at
//! most `cap` cells per axis.
GridFunction strong_maximal(const GridFunction& lambda, const std::vector<int>& frozen, int cap = 64);

} // namespace wnlab
