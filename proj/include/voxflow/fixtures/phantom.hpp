#pragma once

#include <cstdint>
#include <filesystem>

#include "voxflow/core/image.hpp"
#include "voxflow/core/table.hpp"

namespace voxflow::fixtures {

Geometry make_grid(Index3 dims, Vec3 spacing = {1, 1, 1}, Vec3 origin = {0, 0, 0}, Mat3 direction = {});

ImageVolume random_volume(const Geometry &g, std::uint64_t seed, double lo = -1.0, double hi = 1.0);

// Smooth analytic phantom (sum of anisotropic Gaussian blobs) evaluated at a
// physical point; centred on `center` with features spanning ~radius mm.
double smooth_phantom_value(const Vec3 &p, const Vec3 &center, double radius);
ImageVolume smooth_phantom(const Geometry &g);
Vec3 grid_center(const Geometry &g);

// Radiomics demo: a 32^3 volume holding a 3x3x3 lattice of 8^3 cubic ROIs.
// Odd-numbered ROIs carry coarse texture, even ones fine noise; the class
// table maps ROI names to a binary outcome.
struct RadiomicsPhantom {
  ImageVolume image;
  LabelMask mask;
  Table outcomes; // columns: roi, outcome
};
RadiomicsPhantom make_radiomics_phantom(std::uint64_t seed);

// Synthetic labeled cohort with a latent factor driving the outcome; used
// by the PCA + logistic regression configuration.
Table make_labeled_cohort(std::size_t n, std::size_t features, std::uint64_t seed);

// Writes the demo inputs for the bundled workflows into `dir`:
// phantom.nii.gz, rtstruct.dcm, outcomes.csv, cohort.csv.
void write_demo_inputs(const std::filesystem::path &dir);

} // namespace voxflow::fixtures
