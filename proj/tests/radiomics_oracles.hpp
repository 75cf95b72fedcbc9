#pragma once

// Brute-force texture matrices and feature definitions. Everything here works
// on a plain list of (coordinate, level) pairs with O(n^2) neighbour scans,
// sharing no code with the library's box-grid implementation.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "voxflow/core/image.hpp"
#include "voxflow/core/rng.hpp"

namespace voxflow::oracle {

struct Vox {
  long x, y, z;
  int level;
};

struct RandomRoi {
  std::vector<Index3> coords;
  std::vector<int> levels;
  int ng = 1;
};

// Random ROI inside a box of at most 6^3 with up to 6 gray levels; keeps at
// least two face-adjacent voxels so every matrix is non-empty.
inline RandomRoi random_roi(std::uint64_t seed) {
  Rng rng(seed);
  RandomRoi r;
  const std::size_t nx = 1 + rng.index(6), ny = 1 + rng.index(6), nz = 2 + rng.index(5);
  r.ng = 1 + int(rng.index(6));
  const double keep = rng.uniform(0.3, 1.0);
  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i)
        if ((i == 0 && j == 0 && k < 2) || rng.uniform() < keep) {
          r.coords.push_back({i + 3, j + 1, k + 2});
          r.levels.push_back(1 + int(rng.index(std::size_t(r.ng))));
        }
  return r;
}

inline std::vector<Vox> voxels(const RandomRoi &r) {
  std::vector<Vox> v;
  for (std::size_t n = 0; n < r.coords.size(); ++n)
    v.push_back({long(r.coords[n][0]), long(r.coords[n][1]), long(r.coords[n][2]), r.levels[n]});
  return v;
}

inline long cheb(const Vox &a, const Vox &b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

using Mat = std::vector<std::vector<double>>;

// Every ordered neighbour pair counted once equals the symmetrised merge.
inline Mat glcm(const std::vector<Vox> &v, int ng) {
  Mat m(std::size_t(ng), std::vector<double>(std::size_t(ng), 0.0));
  for (const auto &a : v)
    for (const auto &b : v)
      if (cheb(a, b) == 1) m[std::size_t(a.level - 1)][std::size_t(b.level - 1)] += 1;
  return m;
}

// Runs per direction: group voxels that are collinear along d, consecutive
// and share a level, using a union-find over the voxel list.
inline Mat glrlm(const std::vector<Vox> &v, int ng) {
  std::map<std::size_t, std::map<std::size_t, double>> counts;
  std::size_t longest = 1;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!(dz > 0 || (dz == 0 && (dy > 0 || (dy == 0 && dx > 0))))) continue;
        std::vector<std::size_t> parent(v.size());
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](std::size_t a) {
          while (parent[a] != a) a = parent[a] = parent[parent[a]];
          return a;
        };
        for (std::size_t a = 0; a < v.size(); ++a)
          for (std::size_t b = 0; b < v.size(); ++b)
            if (v[b].x - v[a].x == dx && v[b].y - v[a].y == dy && v[b].z - v[a].z == dz && v[a].level == v[b].level)
              parent[find(a)] = find(b);
        std::map<std::size_t, std::size_t> size;
        for (std::size_t a = 0; a < v.size(); ++a) ++size[find(a)];
        for (const auto &[root, len] : size) {
          counts[std::size_t(v[root].level - 1)][len - 1] += 1;
          longest = std::max(longest, len);
        }
      }
  Mat m(std::size_t(ng), std::vector<double>(longest, 0.0));
  for (const auto &[l, row] : counts)
    for (const auto &[len, c] : row) m[l][len] = c;
  return m;
}

inline Mat glszm(const std::vector<Vox> &v, int ng) {
  std::vector<std::size_t> parent(v.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t b = a + 1; b < v.size(); ++b)
      if (cheb(v[a], v[b]) == 1 && v[a].level == v[b].level) parent[find(a)] = find(b);
  std::map<std::size_t, std::size_t> size;
  for (std::size_t a = 0; a < v.size(); ++a) ++size[find(a)];
  std::size_t largest = 1;
  for (const auto &[root, s] : size) largest = std::max(largest, s);
  Mat m(std::size_t(ng), std::vector<double>(largest, 0.0));
  for (const auto &[root, s] : size) m[std::size_t(v[root].level - 1)][s - 1] += 1;
  return m;
}

struct NgtdmOracle {
  std::vector<double> n, s;
};

inline NgtdmOracle ngtdm(const std::vector<Vox> &v, int ng) {
  NgtdmOracle o{std::vector<double>(std::size_t(ng), 0.0), std::vector<double>(std::size_t(ng), 0.0)};
  for (const auto &a : v) {
    std::vector<double> nb;
    for (const auto &b : v)
      if (cheb(a, b) == 1) nb.push_back(b.level);
    if (nb.empty()) continue;
    const double mean = std::accumulate(nb.begin(), nb.end(), 0.0) / double(nb.size());
    o.n[std::size_t(a.level - 1)] += 1;
    o.s[std::size_t(a.level - 1)] += std::abs(a.level - mean);
  }
  return o;
}

inline double sum(const Mat &m) {
  double s = 0;
  for (const auto &r : m)
    for (double x : r) s += x;
  return s;
}

// Feature definitions written directly from the textbook formulas.
inline std::map<std::string, double> glcm_features(const Mat &c) {
  const double n = sum(c);
  const std::size_t ng = c.size();
  auto p = [&](std::size_t i, std::size_t j) { return c[i][j] / n; };
  std::map<std::string, double> f;
  double mu = 0;
  for (std::size_t i = 0; i < ng; ++i)
    for (std::size_t j = 0; j < ng; ++j) mu += double(i + 1) * p(i, j);
  double jmax = 0, var = 0, ent = 0, asm_ = 0, con = 0, dis = 0, id = 0, idm = 0, cor = 0;
  for (std::size_t i = 0; i < ng; ++i)
    for (std::size_t j = 0; j < ng; ++j) {
      const double q = p(i, j), a = double(i + 1), b = double(j + 1);
      jmax = std::max(jmax, q);
      var += std::pow(a - mu, 2) * q;
      if (q > 0) ent -= q * std::log2(q);
      asm_ += q * q;
      con += std::pow(a - b, 2) * q;
      dis += std::abs(a - b) * q;
      id += q / (1 + std::abs(a - b));
      idm += q / (1 + std::pow(a - b, 2));
      cor += (a - mu) * (b - mu) * q;
    }
  f["glcm_joint_max"] = jmax;
  f["glcm_joint_average"] = mu;
  f["glcm_joint_variance"] = var;
  f["glcm_joint_entropy"] = ent;
  f["glcm_asm"] = asm_;
  f["glcm_contrast"] = con;
  f["glcm_dissimilarity"] = dis;
  f["glcm_inverse_diff"] = id;
  f["glcm_inverse_diff_moment"] = idm;
  f["glcm_correlation"] = var > 0 ? cor / var : NAN;
  for (int kind = 0; kind < 2; ++kind) {
    // kind 0: |i - j| distribution, kind 1: i + j distribution
    std::map<long, double> dist;
    for (std::size_t i = 0; i < ng; ++i)
      for (std::size_t j = 0; j < ng; ++j)
        dist[kind ? long(i + j + 2) : std::labs(long(i) - long(j))] += p(i, j);
    double avg = 0, e = 0, v = 0;
    for (const auto &[k, q] : dist) avg += double(k) * q;
    for (const auto &[k, q] : dist) {
      v += std::pow(double(k) - avg, 2) * q;
      if (q > 0) e -= q * std::log2(q);
    }
    const std::string pre = kind ? "glcm_sum_" : "glcm_diff_";
    f[pre + "average"] = avg;
    f[pre + "variance"] = v;
    f[pre + "entropy"] = e;
  }
  return f;
}

inline std::map<std::string, double> size_features(const Mat &m, double nv, const std::string &pre,
                                                   const std::vector<std::string> &names) {
  const double ns = sum(m);
  std::vector<double> f(16, 0.0);
  double mi = 0, mj = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) {
      const double r = m[i][j], a = double(i + 1), b = double(j + 1);
      f[0] += r / std::pow(b, 2) / ns;
      f[1] += r * std::pow(b, 2) / ns;
      f[2] += r / std::pow(a, 2) / ns;
      f[3] += r * std::pow(a, 2) / ns;
      f[4] += r / std::pow(a * b, 2) / ns;
      f[5] += r * std::pow(a / b, 2) / ns;
      f[6] += r * std::pow(b / a, 2) / ns;
      f[7] += r * std::pow(a * b, 2) / ns;
      mi += a * r / ns;
      mj += b * r / ns;
      if (r > 0) f[15] -= (r / ns) * std::log2(r / ns);
    }
  for (std::size_t i = 0; i < m.size(); ++i) {
    double rs = 0;
    for (double r : m[i]) rs += r;
    f[8] += rs * rs / ns;
  }
  for (std::size_t j = 0; j < m[0].size(); ++j) {
    double cs = 0;
    for (std::size_t i = 0; i < m.size(); ++i) cs += m[i][j];
    f[10] += cs * cs / ns;
  }
  f[9] = f[8] / ns;
  f[11] = f[10] / ns;
  f[12] = ns / nv;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) {
      f[13] += std::pow(double(i + 1) - mi, 2) * m[i][j] / ns;
      f[14] += std::pow(double(j + 1) - mj, 2) * m[i][j] / ns;
    }
  std::map<std::string, double> out;
  for (std::size_t t = 0; t < 16; ++t) out[pre + names[t]] = f[t];
  return out;
}

inline std::map<std::string, double> glrlm_features(const Mat &m, std::size_t n) {
  return size_features(m, 13.0 * double(n), "glrlm_",
                       {"sre", "lre", "lgre", "hgre", "srlge", "srhge", "lrlge", "lrhge", "glnu", "glnu_norm", "rlnu",
                        "rlnu_norm", "run_percentage", "gl_variance", "rl_variance", "run_entropy"});
}

inline std::map<std::string, double> glszm_features(const Mat &m, std::size_t n) {
  return size_features(m, double(n), "glszm_",
                       {"sze", "lze", "lgze", "hgze", "szlge", "szhge", "lzlge", "lzhge", "glnu", "glnu_norm", "zsnu",
                        "zsnu_norm", "zone_percentage", "gl_variance", "zs_variance", "zone_entropy"});
}

inline std::map<std::string, double> ngtdm_features(const NgtdmOracle &o) {
  const double nvc = std::accumulate(o.n.begin(), o.n.end(), 0.0);
  const double ssum = std::accumulate(o.s.begin(), o.s.end(), 0.0);
  std::vector<std::pair<double, std::size_t>> present; // (p_i, index)
  for (std::size_t i = 0; i < o.n.size(); ++i)
    if (o.n[i] > 0) present.push_back({o.n[i] / nvc, i});
  double ps = 0;
  for (const auto &[p, i] : present) ps += p * o.s[i];
  std::map<std::string, double> f;
  f["ngtdm_coarseness"] = ps > 1e-6 ? 1 / ps : 1e6;
  double c = 0, bden = 0, cx = 0, st = 0;
  for (const auto &[pa, a] : present)
    for (const auto &[pb, b] : present) {
      const double ia = double(a + 1), ib = double(b + 1);
      c += pa * pb * std::pow(ia - ib, 2);
      bden += std::abs(ia * pa - ib * pb);
      cx += std::abs(ia - ib) * (pa * o.s[a] + pb * o.s[b]) / (pa + pb);
      st += (pa + pb) * std::pow(ia - ib, 2);
    }
  const double g = double(present.size());
  f["ngtdm_contrast"] = g > 1 ? c / (g * (g - 1)) * ssum / nvc : 0;
  f["ngtdm_busyness"] = bden > 0 ? ps / bden : 0;
  f["ngtdm_complexity"] = cx / nvc;
  f["ngtdm_strength"] = ssum > 0 ? st / ssum : 0;
  return f;
}

// Relative comparison used for derived features: |a - b| <= tol * max(1, |b|).
inline bool close(double a, double b, double tol) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

} // namespace voxflow::oracle
