#include <algorithm>
#include <cmath>
#include <limits>

#include "voxflow/core/error.hpp"
#include "voxflow/radiomics/features.hpp"

namespace voxflow::radiomics {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

double total(const linalg::Dense &m) {
  double s = 0;
  for (double v : m.data) s += v;
  return s;
}

double plog2p(double p) { return p > 0 ? p * std::log2(p) : 0.0; }

} // namespace

const std::vector<std::array<int, 3>> &unique_directions() {
  // one of each +/- pair: the 13 offsets lexicographically greater than zero
  static const std::vector<std::array<int, 3>> dirs = [] {
    std::vector<std::array<int, 3>> out;
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di)
          if (dk > 0 || (dk == 0 && (dj > 0 || (dj == 0 && di > 0)))) out.push_back({di, dj, dk});
    return out;
  }();
  return dirs;
}

linalg::Dense glcm_matrix(const DiscretizedRoi &d) {
  const auto ng = static_cast<std::size_t>(d.ng);
  linalg::Dense m(ng, ng, 0.0);
  for (const auto &dir : unique_directions())
    for (const auto &c : d.coords) {
      const long i = long(c[0]), j = long(c[1]), k = long(c[2]);
      const int a = d.at(i, j, k), b = d.at(i + dir[0], j + dir[1], k + dir[2]);
      if (!b) continue;
      m(std::size_t(a - 1), std::size_t(b - 1)) += 1;
      m(std::size_t(b - 1), std::size_t(a - 1)) += 1;
    }
  return m;
}

linalg::Dense glrlm_matrix(const DiscretizedRoi &d) {
  const auto ng = static_cast<std::size_t>(d.ng);
  const std::size_t max_len = std::max({d.dims[0], d.dims[1], d.dims[2]});
  linalg::Dense m(ng, max_len, 0.0);
  std::size_t longest = 1;
  for (const auto &dir : unique_directions())
    for (const auto &c : d.coords) {
      const long i = long(c[0]), j = long(c[1]), k = long(c[2]);
      const int level = d.at(i, j, k);
      if (d.at(i - dir[0], j - dir[1], k - dir[2]) == level) continue; // not a run start
      std::size_t len = 1;
      while (d.at(i + long(len) * dir[0], j + long(len) * dir[1], k + long(len) * dir[2]) == level) ++len;
      m(std::size_t(level - 1), len - 1) += 1;
      longest = std::max(longest, len);
    }
  linalg::Dense out(ng, longest, 0.0);
  for (std::size_t r = 0; r < ng; ++r)
    for (std::size_t q = 0; q < longest; ++q) out(r, q) = m(r, q);
  return out;
}

linalg::Dense glszm_matrix(const DiscretizedRoi &d) {
  const auto ng = static_cast<std::size_t>(d.ng);
  std::vector<char> seen(d.grid.size(), 0);
  std::vector<std::pair<int, std::size_t>> zones;
  std::vector<Index3> stack;
  std::size_t largest = 1;
  auto flat = [&](const Index3 &c) { return c[0] + d.dims[0] * (c[1] + d.dims[1] * c[2]); };
  for (const auto &start : d.coords) {
    if (seen[flat(start)]) continue;
    const int level = d.grid[flat(start)];
    std::size_t size = 0;
    stack.assign(1, start);
    seen[flat(start)] = 1;
    while (!stack.empty()) {
      const Index3 c = stack.back();
      stack.pop_back();
      ++size;
      for (int dk = -1; dk <= 1; ++dk)
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            const long i = long(c[0]) + di, j = long(c[1]) + dj, k = long(c[2]) + dk;
            if (d.at(i, j, k) != level) continue;
            const Index3 n{std::size_t(i), std::size_t(j), std::size_t(k)};
            if (seen[flat(n)]) continue;
            seen[flat(n)] = 1;
            stack.push_back(n);
          }
    }
    zones.emplace_back(level, size);
    largest = std::max(largest, size);
  }
  linalg::Dense m(ng, largest, 0.0);
  for (const auto &[level, size] : zones) m(std::size_t(level - 1), size - 1) += 1;
  return m;
}

Ngtdm ngtdm_matrix(const DiscretizedRoi &d) {
  Ngtdm out;
  out.n.assign(std::size_t(d.ng), 0.0);
  out.s.assign(std::size_t(d.ng), 0.0);
  for (const auto &c : d.coords) {
    const long i = long(c[0]), j = long(c[1]), k = long(c[2]);
    const int level = d.at(i, j, k);
    double sum = 0;
    int count = 0;
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (!di && !dj && !dk) continue;
          const int n = d.at(i + di, j + dj, k + dk);
          if (n) sum += n, ++count;
        }
    if (!count) continue;
    out.n[std::size_t(level - 1)] += 1;
    out.s[std::size_t(level - 1)] += std::abs(double(level) - sum / count);
  }
  return out;
}

FeatureVector glcm_features(const linalg::Dense &counts) {
  const double n = total(counts);
  if (!(n > 0)) fail("NoValidPairs", "ROI has no neighbouring voxel pairs");
  const std::size_t ng = counts.rows;
  std::vector<double> pdiff(ng, 0.0), psum(2 * ng + 1, 0.0), pi(ng, 0.0);
  double jmax = 0, mu = 0, entropy = 0, asm_ = 0, contrast = 0, dissim = 0, invdiff = 0, idm = 0, sij = 0;
  for (std::size_t a = 0; a < ng; ++a)
    for (std::size_t b = 0; b < ng; ++b) {
      const double p = counts(a, b) / n;
      const double i = double(a + 1), j = double(b + 1), diff = std::abs(i - j);
      jmax = std::max(jmax, p);
      mu += i * p;
      entropy -= plog2p(p);
      asm_ += p * p;
      contrast += diff * diff * p;
      dissim += diff * p;
      invdiff += p / (1 + diff);
      idm += p / (1 + diff * diff);
      sij += i * j * p;
      pdiff[std::size_t(diff)] += p;
      psum[a + b + 2] += p;
      pi[a] += p;
    }
  double var = 0;
  for (std::size_t a = 0; a < ng; ++a) var += (double(a + 1) - mu) * (double(a + 1) - mu) * pi[a];
  double davg = 0, dent = 0;
  for (std::size_t k = 0; k < ng; ++k) davg += double(k) * pdiff[k], dent -= plog2p(pdiff[k]);
  double dvar = 0;
  for (std::size_t k = 0; k < ng; ++k) dvar += (double(k) - davg) * (double(k) - davg) * pdiff[k];
  double savg = 0, sent = 0;
  for (std::size_t k = 2; k <= 2 * ng; ++k) savg += double(k) * psum[k], sent -= plog2p(psum[k]);
  double svar = 0;
  for (std::size_t k = 2; k <= 2 * ng; ++k) svar += (double(k) - savg) * (double(k) - savg) * psum[k];
  // symmetric matrix: both marginals share mean mu and variance var
  const double corr = var > 0 ? (sij - mu * mu) / var : kMissing;
  return {{"glcm_joint_max", jmax},         {"glcm_joint_average", mu},     {"glcm_joint_variance", var},
          {"glcm_joint_entropy", entropy},  {"glcm_diff_average", davg},    {"glcm_diff_variance", dvar},
          {"glcm_diff_entropy", dent},      {"glcm_sum_average", savg},     {"glcm_sum_variance", svar},
          {"glcm_sum_entropy", sent},       {"glcm_asm", asm_},             {"glcm_contrast", contrast},
          {"glcm_dissimilarity", dissim},   {"glcm_inverse_diff", invdiff}, {"glcm_inverse_diff_moment", idm},
          {"glcm_correlation", corr}};
}

namespace {

// Shared by GLRLM (runs) and GLSZM (zones): rows are gray levels, columns
// run length / zone size. `denominator` is the voxel count used for the
// percentage feature.
FeatureVector size_matrix_features(const linalg::Dense &m, double denominator, const std::string &prefix,
                                   const char *const names[16]) {
  const double ns = total(m);
  const std::size_t ng = m.rows, nj = m.cols;
  std::vector<double> row(ng, 0.0), col(nj, 0.0);
  double f[16] = {};
  double mu_i = 0, mu_j = 0;
  for (std::size_t a = 0; a < ng; ++a)
    for (std::size_t b = 0; b < nj; ++b) {
      const double r = m(a, b);
      if (r == 0) continue;
      const double i = double(a + 1), j = double(b + 1);
      f[0] += r / (j * j);
      f[1] += r * j * j;
      f[2] += r / (i * i);
      f[3] += r * i * i;
      f[4] += r / (i * i * j * j);
      f[5] += r * i * i / (j * j);
      f[6] += r * j * j / (i * i);
      f[7] += r * i * i * j * j;
      row[a] += r;
      col[b] += r;
      const double p = r / ns;
      mu_i += i * p;
      mu_j += j * p;
      f[15] -= plog2p(p);
    }
  for (int t = 0; t < 8; ++t) f[t] /= ns;
  for (double r : row) f[8] += r * r;
  for (double c : col) f[10] += c * c;
  f[9] = f[8] / (ns * ns);
  f[8] /= ns;
  f[11] = f[10] / (ns * ns);
  f[10] /= ns;
  f[12] = ns / denominator;
  for (std::size_t a = 0; a < ng; ++a)
    for (std::size_t b = 0; b < nj; ++b) {
      const double p = m(a, b) / ns;
      f[13] += (double(a + 1) - mu_i) * (double(a + 1) - mu_i) * p;
      f[14] += (double(b + 1) - mu_j) * (double(b + 1) - mu_j) * p;
    }
  FeatureVector out;
  for (int t = 0; t < 16; ++t) out.emplace_back(prefix + names[t], f[t]);
  return out;
}

} // namespace

FeatureVector glrlm_features(const linalg::Dense &counts, std::size_t roi_voxels) {
  static const char *const names[16] = {"sre", "lre", "lgre", "hgre", "srlge", "srhge", "lrlge", "lrhge",
                                        "glnu", "glnu_norm", "rlnu", "rlnu_norm", "run_percentage",
                                        "gl_variance", "rl_variance", "run_entropy"};
  if (!(total(counts) > 0)) fail("EmptyRoi", "ROI has no runs");
  // merged over 13 directions, so every voxel is counted once per direction
  return size_matrix_features(counts, double(roi_voxels) * double(unique_directions().size()), "glrlm_", names);
}

FeatureVector glszm_features(const linalg::Dense &counts, std::size_t roi_voxels) {
  static const char *const names[16] = {"sze", "lze", "lgze", "hgze", "szlge", "szhge", "lzlge", "lzhge",
                                        "glnu", "glnu_norm", "zsnu", "zsnu_norm", "zone_percentage",
                                        "gl_variance", "zs_variance", "zone_entropy"};
  if (!(total(counts) > 0)) fail("EmptyRoi", "ROI has no zones");
  return size_matrix_features(counts, double(roi_voxels), "glszm_", names);
}

FeatureVector ngtdm_features(const Ngtdm &m) {
  const std::size_t ng = m.n.size();
  double nvc = 0, ssum = 0;
  for (std::size_t a = 0; a < ng; ++a) nvc += m.n[a], ssum += m.s[a];
  if (!(nvc > 0)) {
    // no voxel has a neighbour inside the ROI
    return {{"ngtdm_coarseness", 1e6}, {"ngtdm_contrast", 0.0}, {"ngtdm_busyness", 0.0},
            {"ngtdm_complexity", 0.0}, {"ngtdm_strength", 0.0}};
  }
  std::vector<double> p(ng);
  std::size_t ngp = 0;
  double ps = 0;
  for (std::size_t a = 0; a < ng; ++a) {
    p[a] = m.n[a] / nvc;
    ngp += p[a] > 0;
    ps += p[a] * m.s[a];
  }
  const double coarseness = 1.0 / std::max(ps, 1e-6);
  double c1 = 0, bden = 0, complexity = 0, snum = 0;
  for (std::size_t a = 0; a < ng; ++a) {
    if (p[a] <= 0) continue;
    for (std::size_t b = 0; b < ng; ++b) {
      if (p[b] <= 0) continue;
      const double i = double(a + 1), j = double(b + 1);
      c1 += p[a] * p[b] * (i - j) * (i - j);
      bden += std::abs(i * p[a] - j * p[b]);
      complexity += std::abs(i - j) * (p[a] * m.s[a] + p[b] * m.s[b]) / (p[a] + p[b]);
      snum += (p[a] + p[b]) * (i - j) * (i - j);
    }
  }
  const double contrast = ngp > 1 ? c1 / (double(ngp) * double(ngp - 1)) * ssum / nvc : 0.0;
  const double busyness = bden > 0 ? ps / bden : 0.0;
  const double strength = ssum > 0 ? snum / ssum : 0.0;
  return {{"ngtdm_coarseness", coarseness}, {"ngtdm_contrast", contrast}, {"ngtdm_busyness", busyness},
          {"ngtdm_complexity", complexity / nvc}, {"ngtdm_strength", strength}};
}

FeatureVector glcm_features(const DiscretizedRoi &d) { return glcm_features(glcm_matrix(d)); }
FeatureVector glrlm_features(const DiscretizedRoi &d) { return glrlm_features(glrlm_matrix(d), d.coords.size()); }
FeatureVector glszm_features(const DiscretizedRoi &d) { return glszm_features(glszm_matrix(d), d.coords.size()); }
FeatureVector ngtdm_features(const DiscretizedRoi &d) { return ngtdm_features(ngtdm_matrix(d)); }

} // namespace voxflow::radiomics
