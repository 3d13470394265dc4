#pragma once

#include "wnlab/bandwidths.hpp"
#include "wnlab/kernels.hpp"
#include "wnlab/model.hpp"

#include <vector>

namespace wnlab {

struct EstimateDecomposition
{
  GridFunction estimate;
  GridFunction deterministic; // S_h f
  GridFunction stochastic;    // eps * xi_h
};

//! largest level whose bandwidth still spans two grid cells
int resolvability_floor(const Grid& grid);

//! Discrete weights of the kernel at level s along one axis: the cell
//! averages of K_h(. - x), indexed by offset -R..R (element R is offset 0).
std::vector<double> axis_weights(const ScalarKernel& k, int level, double step);

//! S_h f with zero extension; separable when h is constant
GridFunction smoother(const GridFunction& f, const BandwidthField& h, const ProductKernel& K);
//! same quantity evaluated point by point (reference path)
GridFunction smoother_pointwise(const GridFunction& f, const BandwidthField& h, const ProductKernel& K);

EstimateDecomposition kernel_estimate(const Observation& obs,
                                      const BandwidthField& h,
                                      const ProductKernel& K);
//! only the estimate, skipping the decomposition
GridFunction estimate_only(const Observation& obs, const BandwidthField& h, const ProductKernel& K);

//! the function g with X_eps(g) equal to the estimate at grid point x
GridFunction kernel_window(const Grid& grid,
                           const BandwidthField& h,
                           const ProductKernel& K,
                           std::size_t x_index);

struct BiasTerms
{
  GridFunction B_h_eta; // |S_{h v eta} f - S_eta f|
  GridFunction B_h;     // |S_h f - f|
};

BiasTerms bias_terms(const GridFunction& f,
                     const BandwidthField& h,
                     const BandwidthField& eta,
                     const ProductKernel& K);

struct DirectionalBias
{
  GridFunction values;
  int floor_level = 0; // finest level included in the supremum
};

//! sup over lattice bandwidths below h_j of the one-dimensional smoothing error along axis j
DirectionalBias directional_bias(const GridFunction& f,
                                 const BandwidthVector& h,
                                 const ProductKernel& K,
                                 int j);

} // namespace wnlab
