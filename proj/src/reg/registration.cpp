#include "voxflow/reg/registration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "voxflow/core/cancel.hpp"
#include "voxflow/core/error.hpp"
#include "voxflow/ops/filters.hpp"

namespace voxflow::reg {

Metric metric_from_string(const std::string &name) {
  if (name == "msd") return Metric::Msd;
  if (name == "mutual_information" || name == "mi") return Metric::MutualInformation;
  fail("ParamSchemaViolation", "metric '" + name + "'");
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double> &)> &f, std::vector<double> x0,
                             const std::vector<double> &step, int max_iterations, double tol) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);
  std::vector<std::size_t> order(n + 1);

  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<std::vector<double>> p2(n + 1);
    std::vector<double> v2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      p2[i] = pts[order[i]];
      v2[i] = vals[order[i]];
    }
    pts.swap(p2);
    vals.swap(v2);
  };

  int it = 0;
  for (; it < max_iterations; ++it) {
    check_cancelled();
    sort_simplex();
    double size = 0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d) size = std::max(size, std::abs(pts[i][d] - pts[0][d]));
    if (size < tol) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d];
    for (double &c : centroid) c /= static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t d = 0; d < n; ++d) x[d] = centroid[d] + t * (pts[n][d] - centroid[d]);
      return x;
    };
    const auto xr = along(-1.0);
    const double fr = f(xr);
    if (fr < vals[0]) {
      const auto xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        pts[n] = xe;
        vals[n] = fe;
      } else {
        pts[n] = xr;
        vals[n] = fr;
      }
      continue;
    }
    if (fr < vals[n - 1]) {
      pts[n] = xr;
      vals[n] = fr;
      continue;
    }
    const bool outside = fr < vals[n];
    const auto xc = along(outside ? -0.5 : 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : vals[n])) {
      pts[n] = xc;
      vals[n] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t d = 0; d < n; ++d) pts[i][d] = pts[0][d] + 0.5 * (pts[i][d] - pts[0][d]);
      vals[i] = f(pts[i]);
    }
  }
  sort_simplex();
  return {pts[0], vals[0], it};
}

namespace {

// Precomputed intensity binning for mutual information.
struct Binned {
  std::vector<int> bins;
  int count = 0;
};

Binned bin_image(const ImageVolume &v, int nbins) {
  const auto [lo, hi] = std::minmax_element(v.voxels.begin(), v.voxels.end());
  Binned b;
  b.count = nbins;
  b.bins.resize(v.voxels.size());
  const double range = *hi - *lo;
  for (std::size_t i = 0; i < v.voxels.size(); ++i) {
    const int k = range > 0 ? static_cast<int>((v.voxels[i] - *lo) / range * nbins) : 0;
    b.bins[i] = std::clamp(k, 0, nbins - 1);
  }
  return b;
}

class MetricEvaluator {
public:
  MetricEvaluator(const ImageVolume &fixed, const ImageVolume &moving, Metric metric, int bins)
      : fixed_(fixed), moving_(moving), metric_(metric), bins_(bins) {
    if (metric == Metric::MutualInformation) {
      if (bins < 8) fail("ParamSchemaViolation", "mi_bins must be at least 8");
      fbins_ = bin_image(fixed, bins);
      mbins_ = bin_image(moving, bins);
    }
  }

  // `to_moving(i, j, k)` returns the continuous moving index of a fixed voxel.
  template <typename Map> std::optional<double> evaluate(Map to_moving) const {
    const Index3 &fd = fixed_.geometry.dims;
    const Index3 &md = moving_.geometry.dims;
    double sum = 0.0;
    std::size_t count = 0;
    std::vector<double> hist;
    if (metric_ == Metric::MutualInformation) hist.assign(static_cast<std::size_t>(bins_ * bins_), 0.0);
    const double lim[3] = {double(md[0] - 1), double(md[1] - 1), double(md[2] - 1)};
    for (std::size_t k = 0; k < fd[2]; ++k)
      for (std::size_t j = 0; j < fd[1]; ++j)
        for (std::size_t i = 0; i < fd[0]; ++i) {
          const Vec3 q = to_moving(i, j, k);
          if (!(q[0] >= 0 && q[0] <= lim[0] && q[1] >= 0 && q[1] <= lim[1] && q[2] >= 0 && q[2] <= lim[2])) continue;
          std::size_t i0[3], i1[3];
          double w[3];
          for (std::size_t a = 0; a < 3; ++a) {
            const double fl = std::floor(q[a]);
            i0[a] = static_cast<std::size_t>(fl);
            i1[a] = std::min(i0[a] + 1, md[a] - 1);
            w[a] = q[a] - fl;
          }
          const std::size_t fidx = fixed_.geometry.index(i, j, k);
          ++count;
          if (metric_ == Metric::Msd) {
            double m = 0.0;
            for (int c = 0; c < 8; ++c) {
              const double cw = ((c & 1) ? w[0] : 1 - w[0]) * ((c & 2) ? w[1] : 1 - w[1]) * ((c & 4) ? w[2] : 1 - w[2]);
              if (cw == 0.0) continue;
              m += cw * moving_.at((c & 1) ? i1[0] : i0[0], (c & 2) ? i1[1] : i0[1], (c & 4) ? i1[2] : i0[2]);
            }
            const double d = fixed_.voxels[fidx] - m;
            sum += d * d;
          } else {
            const std::size_t row = static_cast<std::size_t>(fbins_.bins[fidx] * bins_);
            for (int c = 0; c < 8; ++c) {
              const double cw = ((c & 1) ? w[0] : 1 - w[0]) * ((c & 2) ? w[1] : 1 - w[1]) * ((c & 4) ? w[2] : 1 - w[2]);
              if (cw == 0.0) continue;
              const std::size_t midx =
                  moving_.geometry.index((c & 1) ? i1[0] : i0[0], (c & 2) ? i1[1] : i0[1], (c & 4) ? i1[2] : i0[2]);
              hist[row + static_cast<std::size_t>(mbins_.bins[midx])] += cw;
            }
          }
        }
    if (count == 0) return std::nullopt;
    if (metric_ == Metric::Msd) return sum / static_cast<double>(count);
    return mutual_information(hist);
  }

private:
  double mutual_information(const std::vector<double> &hist) const {
    const auto nb = static_cast<std::size_t>(bins_);
    double total = 0.0;
    std::vector<double> pf(nb, 0.0), pm(nb, 0.0);
    for (std::size_t a = 0; a < nb; ++a)
      for (std::size_t b = 0; b < nb; ++b) {
        const double h = hist[a * nb + b];
        pf[a] += h;
        pm[b] += h;
        total += h;
      }
    double mi = 0.0;
    for (std::size_t a = 0; a < nb; ++a)
      for (std::size_t b = 0; b < nb; ++b) {
        const double h = hist[a * nb + b];
        if (h <= 0) continue;
        mi += (h / total) * std::log2(h * total / (pf[a] * pm[b]));
      }
    return mi;
  }

  const ImageVolume &fixed_;
  const ImageVolume &moving_;
  Metric metric_;
  int bins_;
  Binned fbins_, mbins_;
};

// Affine map from fixed voxel index to moving continuous index.
struct IndexAffine {
  Mat3 m;
  Vec3 off;
  Vec3 operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return m * Vec3{double(i), double(j), double(k)} + off;
  }
};

IndexAffine index_affine(const Geometry &fixed, const Geometry &moving, const Transform &t) {
  // p = Df Sf idx + of ; x = Ainv (p - c - t) + c ; q = Sm^-1 Dm^T (x - om)
  Mat3 sf, sm_inv;
  for (int a = 0; a < 3; ++a) {
    sf(a, a) = fixed.spacing[static_cast<std::size_t>(a)];
    sm_inv(a, a) = 1.0 / moving.spacing[static_cast<std::size_t>(a)];
  }
  const Mat3 ainv = inverse(t.linear);
  const Mat3 to_m = sm_inv * moving.direction.transposed();
  IndexAffine out;
  out.m = to_m * (ainv * (fixed.direction * sf));
  out.off = to_m * (ainv * (fixed.origin - t.center - t.translation) + t.center - moving.origin);
  return out;
}

std::optional<double> evaluate(const MetricEvaluator &ev, const ImageVolume &fixed, const ImageVolume &moving,
                               const Transform &t) {
  if (t.kind == TransformKind::Deformable) {
    const Geometry &fg = fixed.geometry;
    return ev.evaluate([&](std::size_t i, std::size_t j, std::size_t k) {
      return moving.geometry.physical_to_index(t.inverse_map(fg.index_to_physical({double(i), double(j), double(k)})));
    });
  }
  return ev.evaluate(index_affine(fixed.geometry, moving.geometry, t));
}

ImageVolume gaussian_smooth(const ImageVolume &v, double sigma_vox) {
  const long r = static_cast<long>(std::ceil(4.0 * sigma_vox));
  std::vector<double> h(static_cast<std::size_t>(2 * r + 1));
  double s = 0;
  for (long i = -r; i <= r; ++i) s += h[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * double(i * i) / (sigma_vox * sigma_vox));
  for (double &x : h) x /= s;
  return ops::convolve_separable(v, h, h, h, ops::Boundary::Mirror);
}

ImageVolume downsample(const ImageVolume &v) {
  const ImageVolume s = gaussian_smooth(v, 1.0);
  Geometry g = v.geometry;
  for (std::size_t a = 0; a < 3; ++a) {
    g.dims[a] = (v.geometry.dims[a] + 1) / 2;
    g.spacing[a] *= 2.0;
  }
  ImageVolume out(g);
  for (std::size_t k = 0; k < g.dims[2]; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) out.at(i, j, k) = s.at(2 * i, 2 * j, 2 * k);
  return out;
}

std::vector<ImageVolume> pyramid(const ImageVolume &v, int levels) {
  std::vector<ImageVolume> out{v};
  for (int l = 1; l < levels; ++l) {
    const auto &last = out.back().geometry.dims;
    if (std::min({last[0], last[1], last[2]}) < 8) break;
    out.push_back(downsample(out.back()));
  }
  return out;
}

Vec3 intensity_centroid(const ImageVolume &v) {
  const double lo = *std::min_element(v.voxels.begin(), v.voxels.end());
  Vec3 acc{0, 0, 0};
  double total = 0;
  for (std::size_t k = 0; k < v.geometry.dims[2]; ++k)
    for (std::size_t j = 0; j < v.geometry.dims[1]; ++j)
      for (std::size_t i = 0; i < v.geometry.dims[0]; ++i) {
        const double w = v.at(i, j, k) - lo;
        if (w <= 0) continue;
        acc = acc + w * Vec3{double(i), double(j), double(k)};
        total += w;
      }
  if (total <= 0) return v.geometry.index_to_physical({0.5 * double(v.geometry.dims[0] - 1), 0.5 * double(v.geometry.dims[1] - 1),
                                                       0.5 * double(v.geometry.dims[2] - 1)});
  return v.geometry.index_to_physical((1.0 / total) * acc);
}

Vec3 grid_center(const Geometry &g) {
  return g.index_to_physical({0.5 * double(g.dims[0] - 1), 0.5 * double(g.dims[1] - 1), 0.5 * double(g.dims[2] - 1)});
}

double bounding_radius(const Geometry &g) {
  double r2 = 0;
  for (std::size_t a = 0; a < 3; ++a) {
    const double half = 0.5 * double(g.dims[a]) * g.spacing[a];
    r2 += half * half;
  }
  return std::sqrt(r2);
}

// Sign so that "smaller is better" for every metric.
double objective(Metric m, double value) { return m == Metric::Msd ? value : -value; }

Transform params_to_transform(TransformKind kind, const std::vector<double> &p, double radius, const Vec3 &c) {
  if (kind == TransformKind::Rigid)
    return Transform::rigid({p[0] / radius, p[1] / radius, p[2] / radius}, {p[3], p[4], p[5]}, c);
  Mat3 a;
  for (std::size_t i = 0; i < 9; ++i) a.m[i] += p[i] / radius;
  Transform t;
  t.kind = TransformKind::Affine;
  t.linear = a;
  t.translation = {p[9], p[10], p[11]};
  t.center = c;
  return t;
}

RegistrationResult register_linear(const ImageVolume &fixed, const ImageVolume &moving, TransformKind kind,
                                   const RegistrationConfig &cfg) {
  const auto fp = pyramid(fixed, cfg.pyramid_levels);
  const auto mp = pyramid(moving, cfg.pyramid_levels);
  const std::size_t levels = std::min(fp.size(), mp.size());
  const Vec3 c = grid_center(fixed.geometry);
  const double radius = bounding_radius(fixed.geometry);

  const std::size_t np = kind == TransformKind::Rigid ? 6 : 12;
  std::vector<double> x(np, 0.0);
  const Vec3 t0 = intensity_centroid(fixed) - intensity_centroid(moving);
  const std::size_t toff = kind == TransformKind::Rigid ? 3 : 9;
  for (std::size_t a = 0; a < 3; ++a) x[toff + a] = t0[a];

  int total_iterations = 0;
  for (std::size_t l = levels; l-- > 0;) {
    const ImageVolume &f = fp[l];
    const ImageVolume &m = mp[l];
    const MetricEvaluator ev(f, m, cfg.metric, cfg.mi_bins);
    // Penalise parameter sets without overlap rather than aborting the search.
    auto cost = [&](const std::vector<double> &p) {
      const auto v = evaluate(ev, f, m, params_to_transform(kind, p, radius, c));
      return v ? objective(cfg.metric, *v) : 1e300;
    };
    const double sp = *std::min_element(f.geometry.spacing.begin(), f.geometry.spacing.end());
    const std::vector<double> step(np, 2.0 * sp);
    const auto res = nelder_mead(cost, x, step, cfg.max_iterations, cfg.convergence_tol * 100.0 * sp);
    x = res.x;
    total_iterations += res.iterations;
  }

  RegistrationResult out;
  out.transform = params_to_transform(kind, x, radius, c);
  out.iterations = total_iterations;
  return out;
}

Transform demons(const ImageVolume &fixed, const ImageVolume &moving, const RegistrationConfig &cfg) {
  const auto fp = pyramid(fixed, cfg.pyramid_levels);
  const auto mp = pyramid(moving, cfg.pyramid_levels);
  const std::size_t levels = std::min(fp.size(), mp.size());
  Transform field;
  for (std::size_t l = levels; l-- > 0;) {
    const ImageVolume &f = fp[l];
    const ImageVolume &m = mp[l];
    const Geometry &g = f.geometry;
    Transform next = Transform::identity_field(g);
    if (!field.field.empty()) {
      for (std::size_t k = 0; k < g.dims[2]; ++k)
        for (std::size_t j = 0; j < g.dims[1]; ++j)
          for (std::size_t i = 0; i < g.dims[0]; ++i) {
            const Vec3 p = g.index_to_physical({double(i), double(j), double(k)});
            const Vec3 d = field.inverse_map(p) - p;
            for (std::size_t a = 0; a < 3; ++a) next.field[3 * g.index(i, j, k) + a] = d[a];
          }
    }
    field = std::move(next);

    // index-space gradient of the fixed image (central differences)
    std::vector<Vec3> grad(g.voxel_count());
    for (std::size_t k = 0; k < g.dims[2]; ++k)
      for (std::size_t j = 0; j < g.dims[1]; ++j)
        for (std::size_t i = 0; i < g.dims[0]; ++i) {
          const std::size_t idx[3] = {i, j, k};
          Vec3 gr{};
          for (std::size_t a = 0; a < 3; ++a) {
            std::size_t lo[3] = {i, j, k}, hi[3] = {i, j, k};
            lo[a] = idx[a] > 0 ? idx[a] - 1 : 0;
            hi[a] = std::min(idx[a] + 1, g.dims[a] - 1);
            const double span = double(hi[a] - lo[a]);
            gr[a] = span > 0 ? (f.at(hi[0], hi[1], hi[2]) - f.at(lo[0], lo[1], lo[2])) / span : 0.0;
          }
          grad[g.index(i, j, k)] = gr;
        }

    for (int it = 0; it < cfg.demons_iterations; ++it) {
      check_cancelled();
      ImageVolume ux(g), uy(g), uz(g);
      for (std::size_t k = 0; k < g.dims[2]; ++k)
        for (std::size_t j = 0; j < g.dims[1]; ++j)
          for (std::size_t i = 0; i < g.dims[0]; ++i) {
            const std::size_t idx = g.index(i, j, k);
            const Vec3 p = g.index_to_physical({double(i), double(j), double(k)});
            const Vec3 q = p + Vec3{field.field[3 * idx], field.field[3 * idx + 1], field.field[3 * idx + 2]};
            Vec3 qi = m.geometry.physical_to_index(q);
            for (std::size_t a = 0; a < 3; ++a) qi[a] = std::clamp(qi[a], 0.0, double(m.geometry.dims[a] - 1));
            const double diff = ops::sample(m, qi, ops::Interpolation::Trilinear) - f.voxels[idx];
            const Vec3 &gr = grad[idx];
            const double denom = dot(gr, gr) + diff * diff;
            if (denom < 1e-12) continue;
            // u = (m - f) grad f / (|grad f|^2 + (m - f)^2), in voxels
            const Vec3 u_vox = (diff / denom) * gr;
            const Vec3 u_mm = g.direction * Vec3{u_vox[0] * g.spacing[0], u_vox[1] * g.spacing[1], u_vox[2] * g.spacing[2]};
            ux.voxels[idx] = u_mm[0];
            uy.voxels[idx] = u_mm[1];
            uz.voxels[idx] = u_mm[2];
          }
      ux = gaussian_smooth(ux, 1.0);
      uy = gaussian_smooth(uy, 1.0);
      uz = gaussian_smooth(uz, 1.0);
      for (std::size_t idx = 0; idx < g.voxel_count(); ++idx) {
        field.field[3 * idx] -= ux.voxels[idx];
        field.field[3 * idx + 1] -= uy.voxels[idx];
        field.field[3 * idx + 2] -= uz.voxels[idx];
      }
    }
  }
  return field;
}

} // namespace

double metric_value(const ImageVolume &fixed, const ImageVolume &moving, const Transform &t, Metric metric,
                    int mi_bins) {
  const MetricEvaluator ev(fixed, moving, metric, mi_bins);
  const auto v = evaluate(ev, fixed, moving, t);
  if (!v) fail("NoOverlap", "moving image does not overlap the fixed grid");
  return *v;
}

RegistrationResult register_images(const ImageVolume &fixed, const ImageVolume &moving, TransformKind kind,
                                   const RegistrationConfig &cfg) {
  fixed.geometry.validate();
  moving.geometry.validate();
  if (cfg.pyramid_levels < 1) fail("ParamSchemaViolation", "pyramid_levels must be at least 1");
  if (cfg.mi_bins < 8) fail("ParamSchemaViolation", "mi_bins must be at least 8");
  const Transform identity = Transform::rigid({0, 0, 0}, {0, 0, 0}, grid_center(fixed.geometry));
  const double initial = metric_value(fixed, moving, identity, cfg.metric, cfg.mi_bins);

  RegistrationResult out;
  if (kind == TransformKind::Deformable) {
    out.transform = demons(fixed, moving, cfg);
    out.iterations = cfg.demons_iterations;
  } else {
    out = register_linear(fixed, moving, kind, cfg);
  }
  out.initial_metric = initial;
  out.final_metric = metric_value(fixed, moving, out.transform, cfg.metric, cfg.mi_bins);
  if (objective(cfg.metric, out.final_metric) > objective(cfg.metric, initial))
    fail("DidNotImprove", "registration ended with a worse metric than the identity transform");
  return out;
}

} // namespace voxflow::reg
