#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "oracles.hpp"

#include "test_util.hpp"
#include "voxflow/core/cancel.hpp"
#include "voxflow/core/digest.hpp"
#include "voxflow/core/image.hpp"
#include "voxflow/core/linalg.hpp"
#include "voxflow/core/polygon.hpp"
#include "voxflow/core/rng.hpp"
#include "voxflow/core/table.hpp"

using namespace voxflow;

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256("").hex(), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256("abc").hex(), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Sha256 h;
  h.update("a").update("bc");
  EXPECT_EQ(h.finish(), sha256("abc"));
}

TEST(Digest, HexRoundTripAndLow64) {
  const Digest d = sha256("abc");
  EXPECT_EQ(Digest::from_hex(d.hex()), d);
  EXPECT_TRUE(is_hex_digest(d.hex()));
  EXPECT_FALSE(is_hex_digest("abc"));
  EXPECT_ERROR_KIND(Digest::from_hex("zz"), "MalformedDigest");
  // last 16 hex digits of the big-endian digest
  EXPECT_EQ(d.low64(), 0xb410ff61f20015adULL);
}

TEST(Rng, Mt19937ReferenceAndRanges) {
  // 10000th output of the default-seeded mt19937_64 is fixed by the standard.
  Rng ref(5489u);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = ref.next_u64();
  EXPECT_EQ(x, 9981545732273789042ULL);

  Rng r(42);
  double lo = 1, hi = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    ASSERT_LT(r.index(7), 7u);
  }
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);
}

TEST(Rng, NormalMoments) {
  Rng r(7);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsPermutationAndSeeded) {
  std::vector<int> a(50), b;
  for (int i = 0; i < 50; ++i) a[static_cast<std::size_t>(i)] = i;
  b = a;
  Rng r1(3), r2(3);
  r1.shuffle(a);
  r2.shuffle(b);
  EXPECT_EQ(a, b);
  std::set<int> s(a.begin(), a.end());
  EXPECT_EQ(s.size(), 50u);
}

TEST(Geometry, IndexPhysicalRoundTrip) {
  Geometry g;
  g.dims = {4, 5, 6};
  g.spacing = {0.5, 2.0, 3.0};
  g.origin = {10, -20, 5};
  const double c = std::cos(0.3), s = std::sin(0.3);
  g.direction.m = {c, -s, 0, s, c, 0, 0, 0, 1};
  g.validate();
  const Vec3 ijk{1.5, 2.0, 3.25};
  const Vec3 p = g.index_to_physical(ijk);
  const Vec3 back = g.physical_to_index(p);
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(back[a], ijk[a], 1e-12);
  EXPECT_EQ(g.index_to_physical({0, 0, 0}), g.origin);
}

TEST(Geometry, ValidateRejectsBadDirection) {
  Geometry g;
  g.direction.m = {1, 0, 0, 0, 2, 0, 0, 0, 1};
  EXPECT_ERROR_KIND(g.validate(), "InvalidGeometry");
  Geometry h;
  h.spacing = {1, 0, 1};
  EXPECT_ERROR_KIND(h.validate(), "InvalidGeometry");
}

TEST(Mat3, InverseAndDet) {
  Mat3 a;
  a.m = {2, 1, 0, 0, 3, 1, 1, 0, 4};
  const Mat3 p = a * inverse(a);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(p(r, c), r == c ? 1.0 : 0.0, 1e-14);
  EXPECT_DOUBLE_EQ(det(a), 25.0);
  Mat3 z;
  z.m = {1, 2, 3, 2, 4, 6, 0, 0, 1};
  EXPECT_ERROR_KIND(inverse(z), "SingularTransform");
}

TEST(Linalg, SymmetricEigenMatchesEigenOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 6);
    linalg::Dense a(n, n);
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const double v = rng.uniform(-1, 1);
        a(i, j) = a(j, i) = v;
        e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        e(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
    const auto ours = linalg::symmetric_eigen(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(e);
    for (std::size_t k = 0; k < n; ++k) {
      // Eigen returns ascending values
      EXPECT_NEAR(ours.values[k], oracle.eigenvalues()(static_cast<Eigen::Index>(n - 1 - k)), 1e-12);
      // A v = lambda v
      for (std::size_t i = 0; i < n; ++i) {
        double av = 0;
        for (std::size_t j = 0; j < n; ++j) av += a(i, j) * ours.vectors(j, k);
        EXPECT_NEAR(av, ours.values[k] * ours.vectors(i, k), 1e-12);
      }
    }
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q) {
        double d = 0;
        for (std::size_t i = 0; i < n; ++i) d += ours.vectors(i, p) * ours.vectors(i, q);
        EXPECT_NEAR(d, p == q ? 1.0 : 0.0, 1e-12);
      }
  }
}

TEST(Linalg, CholeskySolveAndSingular) {
  linalg::Dense a(3, 3);
  a.data = {4, 2, 0, 2, 5, 1, 0, 1, 3};
  const std::vector<double> b{2, 1, 4};
  const auto x = linalg::cholesky_solve(a, b);
  Eigen::Matrix3d e;
  e << 4, 2, 0, 2, 5, 1, 0, 1, 3;
  const Eigen::Vector3d ex = e.llt().solve(Eigen::Vector3d(2, 1, 4));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(x[static_cast<std::size_t>(i)], ex(i), 1e-14);

  linalg::Dense s(2, 2);
  s.data = {1, 1, 1, 1};
  EXPECT_ERROR_KIND(linalg::cholesky_solve(s, {1, 1}), "SingularDesign");
}

using oracle::pnpoly;

TEST(Polygon, RectangleCenters) {
  const Polygon2 rect{{0.5, 0.5}, {3.5, 0.5}, {3.5, 3.5}, {0.5, 3.5}};
  std::set<std::pair<std::size_t, std::size_t>> got;
  even_odd_fill({rect}, 8, 8, [&](std::size_t x, std::size_t y) { got.insert({x, y}); });
  EXPECT_EQ(got.size(), 9u);
  for (std::size_t x = 1; x <= 3; ++x)
    for (std::size_t y = 1; y <= 3; ++y) EXPECT_TRUE(got.count({x, y}));
}

TEST(Polygon, RandomPolygonsMatchOracle) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Polygon2> polys(1 + rng.index(3));
    for (auto &p : polys) {
      p.resize(3 + rng.index(6));
      for (auto &v : p) {
        // mix of integer and fractional vertices to exercise on-grid cases
        v = trial % 2 ? Point2{double(rng.index(17)), double(rng.index(17))}
                      : Point2{rng.uniform(-2, 18), rng.uniform(-2, 18)};
      }
    }
    std::vector<int> got(16 * 16, 0);
    even_odd_fill(polys, 16, 16, [&](std::size_t x, std::size_t y) { got[y * 16 + x] = 1; });
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 0; x < 16; ++x) {
        bool inside = false;
        for (const auto &p : polys) inside ^= pnpoly(p, double(x), double(y));
        ASSERT_EQ(got[y * 16 + x], inside ? 1 : 0) << "trial " << trial << " at " << x << "," << y;
      }
  }
}

TEST(Polygon, DistinctVertices) {
  EXPECT_EQ(distinct_vertex_count({{0, 0}, {1, 1}, {0, 0}}), 2u);
}

TEST(Table, FormatNumberShortest) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(1e21), "1e+21");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Table, ValidateAndLookup) {
  Table t;
  t.columns = {{"id", ColumnKind::Text}, {"x", ColumnKind::Numeric}};
  t.rows = {{Cell{std::string("a")}, Cell{1.0}}, {Cell{std::string("b")}, Cell{}}};
  t.validate();
  const auto x = t.numeric_column("x");
  EXPECT_EQ(x[0], 1.0);
  EXPECT_TRUE(std::isnan(x[1]));
  EXPECT_ERROR_KIND(t.column_index("nope"), "KeyMissing");
  t.rows.push_back({Cell{std::string("c")}});
  EXPECT_ERROR_KIND(t.validate(), "RaggedRow");
}

TEST(Cancel, ScopedFlagObserved) {
  auto flag = std::make_shared<CancelFlag>();
  {
    ScopedCancelFlag scope(flag);
    EXPECT_NO_THROW(check_cancelled());
    flag->request();
    EXPECT_THROW(check_cancelled(), Cancelled);
  }
  EXPECT_NO_THROW(check_cancelled());
}
