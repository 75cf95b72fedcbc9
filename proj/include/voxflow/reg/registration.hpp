#pragma once

#include <functional>
#include <vector>

#include "voxflow/reg/transform.hpp"

namespace voxflow::reg {

enum class Metric { Msd, MutualInformation };
Metric metric_from_string(const std::string &name);

struct RegistrationConfig {
  Metric metric = Metric::Msd;
  int pyramid_levels = 3;
  int max_iterations = 200;
  int mi_bins = 32;
  double convergence_tol = 1e-4;
  int demons_iterations = 50;
};

struct RegistrationResult {
  Transform transform;
  double initial_metric = 0; // identity transform, full resolution
  double final_metric = 0;
  int iterations = 0;
};

// Metric value of `moving` pulled through `t` onto the fixed grid, over the
// voxels whose sample lands inside the moving image. MSD is reported as is;
// MI in bits. Throws NoOverlap when no voxel overlaps.
double metric_value(const ImageVolume &fixed, const ImageVolume &moving, const Transform &t, Metric metric,
                    int mi_bins = 32);

RegistrationResult register_images(const ImageVolume &fixed, const ImageVolume &moving, TransformKind kind,
                                   const RegistrationConfig &cfg = {});

// Derivative-free simplex minimiser, deterministic. Returns the best point.
struct NelderMeadResult {
  std::vector<double> x;
  double value = 0;
  int iterations = 0;
};
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double> &)> &f, std::vector<double> x0,
                             const std::vector<double> &step, int max_iterations, double tol);

} // namespace voxflow::reg
