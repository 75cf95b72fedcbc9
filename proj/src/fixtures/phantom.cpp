#include "voxflow/fixtures/phantom.hpp"

#include <cmath>
#include <cstdio>

#include "voxflow/core/rng.hpp"
#include "voxflow/fixtures/dicom_writer.hpp"
#include "voxflow/io/image_io.hpp"
#include "voxflow/io/table_io.hpp"

namespace voxflow::fixtures {

Geometry make_grid(Index3 dims, Vec3 spacing, Vec3 origin, Mat3 direction) {
  Geometry g;
  g.dims = dims;
  g.spacing = spacing;
  g.origin = origin;
  g.direction = direction;
  g.validate();
  return g;
}

ImageVolume random_volume(const Geometry &g, std::uint64_t seed, double lo, double hi) {
  ImageVolume v(g);
  Rng rng(seed);
  for (auto &x : v.voxels) x = rng.uniform(lo, hi);
  return v;
}

Vec3 grid_center(const Geometry &g) {
  return g.index_to_physical({0.5 * static_cast<double>(g.dims[0] - 1), 0.5 * static_cast<double>(g.dims[1] - 1),
                              0.5 * static_cast<double>(g.dims[2] - 1)});
}

double smooth_phantom_value(const Vec3 &p, const Vec3 &c, double r) {
  struct Blob {
    Vec3 offset; // in units of r
    Vec3 width;  // in units of r
    double amplitude;
  };
  static const Blob blobs[] = {
      {{0.0, 0.0, 0.0}, {0.55, 0.45, 0.40}, 100.0},
      {{0.35, -0.20, 0.15}, {0.18, 0.22, 0.20}, 60.0},
      {{-0.30, 0.25, -0.10}, {0.22, 0.15, 0.25}, -45.0},
      {{0.10, 0.35, 0.30}, {0.15, 0.18, 0.12}, 35.0},
  };
  double v = 0.0;
  for (const auto &b : blobs) {
    double e = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
      const double d = (p[a] - (c[a] + b.offset[a] * r)) / (b.width[a] * r);
      e += d * d;
    }
    v += b.amplitude * std::exp(-0.5 * e);
  }
  return v;
}

ImageVolume smooth_phantom(const Geometry &g) {
  ImageVolume v(g);
  const Vec3 c = grid_center(g);
  const double r = 0.5 * std::min({static_cast<double>(g.dims[0]) * g.spacing[0], static_cast<double>(g.dims[1]) * g.spacing[1],
                                   static_cast<double>(g.dims[2]) * g.spacing[2]});
  for (std::size_t k = 0; k < g.dims[2]; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i)
        v.at(i, j, k) = smooth_phantom_value(g.index_to_physical({double(i), double(j), double(k)}), c, r);
  return v;
}

RadiomicsPhantom make_radiomics_phantom(std::uint64_t seed) {
  const Geometry g = make_grid({32, 32, 32}, {1, 1, 1}, {-16, -16, -16});
  RadiomicsPhantom ph;
  ph.image = ImageVolume(g);
  ph.mask = LabelMask(g);
  Rng rng(seed);
  for (auto &x : ph.image.voxels) x = rng.normal(0.0, 5.0);

  ph.outcomes.columns = {{"roi", ColumnKind::Categorical}, {"outcome", ColumnKind::Numeric}};
  ph.outcomes.id_column = "roi";
  std::uint32_t label = 0;
  for (std::size_t bz = 0; bz < 3; ++bz)
    for (std::size_t by = 0; by < 3; ++by)
      for (std::size_t bx = 0; bx < 3; ++bx) {
        ++label;
        const bool coarse = label % 2 == 1;
        const std::size_t i0 = 2 + 10 * bx, j0 = 2 + 10 * by, k0 = 2 + 10 * bz;
        const double base = 100.0 + rng.uniform(-10.0, 10.0);
        // coarse: 2x2x2 blocks share one offset; fine: independent voxels
        double block[4][4][4];
        for (auto &a : block)
          for (auto &b : a)
            for (auto &c : b) c = rng.normal(0.0, 25.0);
        for (std::size_t k = 0; k < 8; ++k)
          for (std::size_t j = 0; j < 8; ++j)
            for (std::size_t i = 0; i < 8; ++i) {
              const double t = coarse ? block[k / 2][j / 2][i / 2] : rng.normal(0.0, 25.0);
              ph.image.at(i0 + i, j0 + j, k0 + k) = base + t;
              ph.mask.at(i0 + i, j0 + j, k0 + k) = label;
            }
        char name[16];
        std::snprintf(name, sizeof(name), "roi_%02u", label);
        ph.mask.names[label] = name;
        ph.outcomes.rows.push_back({Cell{std::string(name)}, Cell{coarse ? 1.0 : 0.0}});
      }
  return ph;
}

Table make_labeled_cohort(std::size_t n, std::size_t features, std::uint64_t seed) {
  Rng rng(seed);
  Table t;
  t.columns.push_back({"id", ColumnKind::Text});
  for (std::size_t f = 0; f < features; ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "f%02zu", f + 1);
    t.columns.push_back({name, ColumnKind::Numeric});
  }
  t.columns.push_back({"outcome", ColumnKind::Numeric});
  t.id_column = "id";
  for (std::size_t r = 0; r < n; ++r) {
    const double z = rng.normal();
    const double y = z + 0.3 * rng.normal() > 0.0 ? 1.0 : 0.0;
    char id[32];
    std::snprintf(id, sizeof(id), "p%04zu", r + 1);
    std::vector<Cell> row{Cell{std::string(id)}};
    for (std::size_t f = 0; f < features; ++f)
      row.emplace_back(f < 4 ? 2.0 * z + rng.normal(0.0, 0.5) : rng.normal());
    row.emplace_back(y);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_demo_inputs(const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  const auto ph = make_radiomics_phantom(20240601);
  io::write_image(ph.image, io::ImageFormat::Nifti, dir / "phantom.nii.gz");

  std::vector<RtRoi> rois;
  const Geometry &g = ph.image.geometry;
  for (const auto &[label, name] : ph.mask.names) {
    RtRoi roi;
    roi.number = static_cast<int>(label);
    roi.name = name;
    const std::size_t idx = label - 1;
    const double i0 = 2.0 + 10.0 * static_cast<double>(idx % 3);
    const double j0 = 2.0 + 10.0 * static_cast<double>((idx / 3) % 3);
    const double k0 = 2.0 + 10.0 * static_cast<double>(idx / 9);
    for (int k = 0; k < 8; ++k) {
      RtContour c;
      const double kk = k0 + k;
      for (const auto &[ci, cj] : {std::pair{-0.5, -0.5}, std::pair{7.5, -0.5}, std::pair{7.5, 7.5}, std::pair{-0.5, 7.5}})
        c.points.push_back(g.index_to_physical({i0 + ci, j0 + cj, kk}));
      roi.contours.push_back(std::move(c));
    }
    rois.push_back(std::move(roi));
  }
  io::write_file(dir / "rtstruct.dcm", encode_rtstruct(rois));
  io::write_table(ph.outcomes, dir / "outcomes.csv", io::TableFormat::Csv);
  io::write_table(make_labeled_cohort(400, 12, 7), dir / "cohort.csv", io::TableFormat::Csv);
}

} // namespace voxflow::fixtures
