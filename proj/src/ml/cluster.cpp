#include "voxflow/ml/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "voxflow/core/cancel.hpp"
#include "voxflow/core/error.hpp"
#include "voxflow/core/rng.hpp"

namespace voxflow::ml {

ClusterAlgo cluster_algo_from_string(const std::string &s) {
  if (s == "kmeans") return ClusterAlgo::KMeans;
  if (s == "kmedoids") return ClusterAlgo::KMedoids;
  if (s == "gmm") return ClusterAlgo::Gmm;
  if (s == "agglomerative") return ClusterAlgo::Agglomerative;
  if (s == "kmodes") fail("AlgorithmUnavailable", "'kmodes' is listed in the catalog but not implemented");
  fail("UnknownAlgorithm", "clustering algorithm '" + s + "'");
}

const char *to_string(ClusterAlgo a) {
  switch (a) {
  case ClusterAlgo::KMeans: return "kmeans";
  case ClusterAlgo::KMedoids: return "kmedoids";
  case ClusterAlgo::Gmm: return "gmm";
  case ClusterAlgo::Agglomerative: return "agglomerative";
  }
  return "?";
}

namespace {

double sq_dist(const double *a, const double *b, std::size_t p) {
  double s = 0;
  for (std::size_t c = 0; c < p; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return s;
}

// Nearest centre, ties to the lower index.
std::size_t nearest(const Matrix &x, std::size_t r, const Matrix &centers, double &d) {
  std::size_t best = 0;
  d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.rows; ++c) {
    const double e = sq_dist(x.row(r), centers.row(c), x.cols);
    if (e < d) d = e, best = c;
  }
  return best;
}

Matrix cluster_means(const Matrix &x, const std::vector<int> &labels, std::size_t k) {
  Matrix m(k, x.cols);
  std::vector<double> n(k, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const auto l = std::size_t(labels[r]);
    n[l] += 1;
    for (std::size_t c = 0; c < x.cols; ++c) m(l, c) += x(r, c);
  }
  for (std::size_t l = 0; l < k; ++l)
    for (std::size_t c = 0; c < x.cols; ++c) m(l, c) = n[l] > 0 ? m(l, c) / n[l] : 0.0;
  return m;
}

double inertia_of(const Matrix &x, const std::vector<int> &labels, const Matrix &centers) {
  double s = 0;
  for (std::size_t r = 0; r < x.rows; ++r) s += sq_dist(x.row(r), centers.row(std::size_t(labels[r])), x.cols);
  return s;
}

// Renumbers labels by first appearance and permutes centre rows to match.
void relabel(ClusterResult &res, std::size_t k) {
  std::vector<int> map(k, -1);
  int next = 0;
  for (int &l : res.labels) {
    if (map[std::size_t(l)] < 0) map[std::size_t(l)] = next++;
    l = map[std::size_t(l)];
  }
  for (auto &m : map)
    if (m < 0) m = next++;
  if (res.centers.rows == k) {
    Matrix c(k, res.centers.cols);
    for (std::size_t i = 0; i < k; ++i)
      std::copy_n(res.centers.row(i), c.cols, c.v.begin() + long(std::size_t(map[i]) * c.cols));
    res.centers = c;
  }
}

ClusterResult kmeans(const Matrix &x, std::size_t k, Rng &rng) {
  const std::size_t n = x.rows, p = x.cols;
  ClusterResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < 10; ++restart) {
    Matrix centers(k, p);
    // k-means++
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::size_t pick = rng.index(n);
    for (std::size_t c = 0; c < k; ++c) {
      if (c > 0) {
        double total = 0;
        for (double v : d2) total += v;
        if (total > 0) {
          const double u = rng.uniform() * total;
          double acc = 0;
          pick = n - 1;
          for (std::size_t i = 0; i < n; ++i) {
            acc += d2[i];
            if (acc > u) {
              pick = i;
              break;
            }
          }
        } else {
          pick = rng.index(n);
        }
      }
      std::copy_n(x.row(pick), p, centers.v.begin() + long(c * p));
      for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(x.row(i), centers.row(c), p));
    }

    ClusterResult res;
    res.labels.assign(n, 0);
    std::vector<double> dist(n);
    for (int iter = 0; iter < 300; ++iter) {
      check_cancelled();
      double inertia = 0;
      for (std::size_t r = 0; r < n; ++r) {
        res.labels[r] = int(nearest(x, r, centers, dist[r]));
        inertia += dist[r];
      }
      res.inertia_history.push_back(inertia);
      Matrix next = cluster_means(x, res.labels, k);
      std::vector<std::size_t> size(k, 0);
      for (int l : res.labels) ++size[std::size_t(l)];
      for (std::size_t c = 0; c < k; ++c) {
        if (size[c]) continue;
        // empty cluster: move it to the point farthest from its centre
        const std::size_t far = std::size_t(std::max_element(dist.begin(), dist.end()) - dist.begin());
        std::copy_n(x.row(far), p, next.v.begin() + long(c * p));
        dist[far] = 0;
      }
      double shift = 0;
      for (std::size_t c = 0; c < k; ++c) shift = std::max(shift, std::sqrt(sq_dist(centers.row(c), next.row(c), p)));
      centers = next;
      if (shift < 1e-6) break;
    }
    for (std::size_t r = 0; r < n; ++r) res.labels[r] = int(nearest(x, r, centers, dist[r]));
    res.centers = centers;
    res.inertia = inertia_of(x, res.labels, centers);
    if (res.inertia < best.inertia) best = std::move(res);
  }
  return best;
}

ClusterResult kmedoids(const Matrix &x, std::size_t k) {
  const std::size_t n = x.rows;
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::sqrt(sq_dist(x.row(i), x.row(j), x.cols));
  auto cost = [&](const std::vector<std::size_t> &med) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double m = std::numeric_limits<double>::infinity();
      for (auto q : med) m = std::min(m, d[i * n + q]);
      s += m;
    }
    return s;
  };
  // BUILD: greedily add the medoid that lowers the total cost most
  std::vector<std::size_t> med;
  std::vector<bool> is_med(n, false);
  for (std::size_t c = 0; c < k; ++c) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t o = 0; o < n; ++o) {
      if (is_med[o]) continue;
      med.push_back(o);
      const double s = cost(med);
      med.pop_back();
      if (s < best) best = s, arg = o;
    }
    med.push_back(arg);
    is_med[arg] = true;
  }
  // SWAP: apply the best improving swap until none remains
  double current = cost(med);
  for (;;) {
    check_cancelled();
    double best = current - 1e-12;
    std::size_t bi = 0, bo = 0;
    bool found = false;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t o = 0; o < n; ++o) {
        if (is_med[o]) continue;
        auto trial = med;
        trial[i] = o;
        const double s = cost(trial);
        if (s < best) best = s, bi = i, bo = o, found = true;
      }
    if (!found) break;
    is_med[med[bi]] = false;
    is_med[bo] = true;
    med[bi] = bo;
    current = best;
  }
  ClusterResult res;
  res.centers = x.take_rows(med);
  res.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t arg = 0;
    for (std::size_t c = 1; c < k; ++c)
      if (d[r * n + med[c]] < d[r * n + med[arg]]) arg = c;
    res.labels[r] = int(arg);
  }
  res.inertia = inertia_of(x, res.labels, res.centers);
  return res;
}

ClusterResult gmm(const Matrix &x, std::size_t k, Rng &rng) {
  const std::size_t n = x.rows, p = x.cols;
  const ClusterResult init = kmeans(x, k, rng);
  Matrix mean = init.centers, var(k, p, 0.0);
  std::vector<double> weight(k, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto l = std::size_t(init.labels[r]);
    weight[l] += 1;
    for (std::size_t c = 0; c < p; ++c) var(l, c) += (x(r, c) - mean(l, c)) * (x(r, c) - mean(l, c));
  }
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t c = 0; c < p; ++c) var(l, c) = std::max(weight[l] > 0 ? var(l, c) / weight[l] : 0.0, 1e-6);
    weight[l] /= double(n);
  }

  Matrix resp(n, k);
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 100; ++iter) {
    check_cancelled();
    double ll = 0;
    for (std::size_t r = 0; r < n; ++r) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < k; ++l) {
        double lp = weight[l] > 0 ? std::log(weight[l]) : -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < p; ++c) {
          const double e = x(r, c) - mean(l, c);
          lp -= 0.5 * (std::log(2 * M_PI * var(l, c)) + e * e / var(l, c));
        }
        resp(r, l) = lp;
        mx = std::max(mx, lp);
      }
      double s = 0;
      for (std::size_t l = 0; l < k; ++l) s += resp(r, l) = std::exp(resp(r, l) - mx);
      for (std::size_t l = 0; l < k; ++l) resp(r, l) /= s;
      ll += mx + std::log(s);
    }
    for (std::size_t l = 0; l < k; ++l) {
      double nk = 0;
      for (std::size_t r = 0; r < n; ++r) nk += resp(r, l);
      if (nk < 1e-300) continue; // keep a starved component where it was
      weight[l] = nk / double(n);
      for (std::size_t c = 0; c < p; ++c) {
        double m = 0;
        for (std::size_t r = 0; r < n; ++r) m += resp(r, l) * x(r, c);
        m /= nk;
        double v = 0;
        for (std::size_t r = 0; r < n; ++r) v += resp(r, l) * (x(r, c) - m) * (x(r, c) - m);
        mean(l, c) = m;
        var(l, c) = std::max(v / nk, 1e-6);
      }
    }
    if (std::abs(ll - prev) < 1e-6) break;
    prev = ll;
  }
  ClusterResult res;
  res.centers = mean;
  res.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t arg = 0;
    for (std::size_t l = 1; l < k; ++l)
      if (resp(r, l) > resp(r, arg)) arg = l;
    res.labels[r] = int(arg);
  }
  res.inertia = inertia_of(x, res.labels, res.centers);
  return res;
}

ClusterResult agglomerative(const Matrix &x, std::size_t k) {
  const std::size_t n = x.rows;
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::sqrt(sq_dist(x.row(i), x.row(j), x.cols));
  std::vector<std::size_t> size(n, 1), owner(n);
  std::vector<bool> alive(n, true);
  for (std::size_t i = 0; i < n; ++i) owner[i] = i;
  for (std::size_t clusters = n; clusters > k; --clusters) {
    check_cancelled();
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j)
        if (alive[j] && d[i * n + j] < best) best = d[i * n + j], bi = i, bj = j;
    }
    // merge bj into bi (the smaller id), average linkage update
    for (std::size_t m = 0; m < n; ++m) {
      if (!alive[m] || m == bi || m == bj) continue;
      const double v = (double(size[bi]) * d[bi * n + m] + double(size[bj]) * d[bj * n + m]) / double(size[bi] + size[bj]);
      d[bi * n + m] = d[m * n + bi] = v;
    }
    size[bi] += size[bj];
    alive[bj] = false;
    for (auto &o : owner)
      if (o == bj) o = bi;
  }
  std::vector<int> id(n, -1);
  int next = 0;
  ClusterResult res;
  res.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (id[owner[r]] < 0) id[owner[r]] = next++;
    res.labels[r] = id[owner[r]];
  }
  res.centers = cluster_means(x, res.labels, k);
  res.inertia = inertia_of(x, res.labels, res.centers);
  return res;
}

} // namespace

ClusterResult cluster(const Matrix &x, ClusterAlgo algo, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k > x.rows) fail("KTooLarge", "k must lie in [1, n]");
  for (double v : x.v)
    if (!std::isfinite(v)) fail("MissingValues", "clustering input contains missing values");
  Rng rng(seed);
  ClusterResult res;
  switch (algo) {
  case ClusterAlgo::KMeans: res = kmeans(x, k, rng); break;
  case ClusterAlgo::KMedoids: res = kmedoids(x, k); break;
  case ClusterAlgo::Gmm: res = gmm(x, k, rng); break;
  case ClusterAlgo::Agglomerative: res = agglomerative(x, k); break;
  }
  relabel(res, k);
  res.centers.names = x.names;
  return res;
}

} // namespace voxflow::ml
