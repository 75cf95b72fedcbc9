#pragma once

#include <cmath>
#include <numbers>

#include "voxflow/core/rng.hpp"
#include "voxflow/fixtures/phantom.hpp"
#include "voxflow/reg/registration.hpp"

// Synthetic rigid-recovery cases shared by the registration tests and the
// acceptance binary.
namespace voxflow::testing {

inline Geometry recovery_grid() { return fixtures::make_grid({32, 32, 32}, {1, 1, 1}, {-16, -16, -16}); }

// moving(x) = phantom(T(x)), so pulling moving through T reproduces the phantom.
inline ImageVolume synth_moving(const Geometry &g, const reg::Transform &t, double (*remap)(double) = nullptr) {
  ImageVolume v(g);
  const Vec3 c = fixtures::grid_center(g);
  const double r = 0.5 * std::min({double(g.dims[0]) * g.spacing[0], double(g.dims[1]) * g.spacing[1],
                                   double(g.dims[2]) * g.spacing[2]});
  for (std::size_t k = 0; k < g.dims[2]; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        const double f =
            fixtures::smooth_phantom_value(t.forward(g.index_to_physical({double(i), double(j), double(k)})), c, r);
        v.at(i, j, k) = remap ? remap(f) : f;
      }
  return v;
}

struct RecoveryStats {
  int cases = 0;
  int recovered = 0;
  double worst_translation = 0; // voxels
  double worst_rotation = 0;    // degrees
};

// Random rigid perturbations with |t| <= 5 mm and each |angle| <= 5 degrees.
inline RecoveryStats rigid_recovery(int cases, std::uint64_t seed) {
  constexpr double deg = std::numbers::pi / 180.0;
  const Geometry g = recovery_grid();
  const ImageVolume fixed = fixtures::smooth_phantom(g);
  Rng rng(seed);
  RecoveryStats s;
  for (int n = 0; n < cases; ++n) {
    Vec3 t;
    do {
      t = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    } while (norm(t) > 5.0);
    const Vec3 a{rng.uniform(-5, 5) * deg, rng.uniform(-5, 5) * deg, rng.uniform(-5, 5) * deg};
    const reg::Transform truth = reg::Transform::rigid(a, t, fixtures::grid_center(g));
    const auto r = reg::register_images(fixed, synth_moving(g, truth), reg::TransformKind::Rigid);
    double et = 0, er = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      et = std::max(et, std::abs(r.transform.translation[i] - t[i]) / g.spacing[i]);
      er = std::max(er, std::abs(r.transform.angles[i] - a[i]) / deg);
    }
    ++s.cases;
    if (et <= 0.5 && er <= 1.0) ++s.recovered;
    s.worst_translation = std::max(s.worst_translation, et);
    s.worst_rotation = std::max(s.worst_rotation, er);
  }
  return s;
}

} // namespace voxflow::testing
