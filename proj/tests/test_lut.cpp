#include <cmath>
#include <random>

#include "doctest.h"
#include "itmlut/error.hpp"
#include "itmlut/lut.hpp"
#include "oracles.hpp"

using namespace itm;

namespace {

std::array<std::vector<double>, 3> axes_of(const VertexGrid& g) {
  std::array<std::vector<double>, 3> a;
  for (int c = 0; c < 3; ++c) a[c].assign(g.axis(c).begin(), g.axis(c).end());
  return a;
}

std::vector<float> to_vector(const LutContent& l) { return {l.data().begin(), l.data().end()}; }

}  // namespace

TEST_CASE("uniform vertices") {
  CHECK(uniform_vertices(2) == std::vector<double>{0.0, 1.0});
  const auto v = uniform_vertices(17);
  CHECK(v[8] == 0.5);
  CHECK(v[4] == 0.25);
  CHECK_THROWS_AS(uniform_vertices(1), Error);
}

TEST_CASE("vertex grid invariants are enforced") {
  CHECK_THROWS_AS(VertexGrid({0.0, 1.0}, {0.0, 1.0}, {0.0, 0.5}), Error);
  CHECK_THROWS_AS(VertexGrid({0.0, 0.5, 0.5, 1.0}, {0.0, 0.2, 0.6, 1.0}, {0.0, 0.2, 0.6, 1.0}), Error);
  CHECK_THROWS_AS(VertexGrid({0.0}, {0.0}, {0.0}), Error);
  CHECK_THROWS_AS(VertexGrid({0.0, 1.0}, {0.0, 0.5, 1.0}, {0.0, 1.0}), Error);
  CHECK_NOTHROW(VertexGrid({0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}));
}

TEST_CASE("vertex law examples") {
  const auto b = redistribute_vertices(BranchId::Bright, 5, 0.75);
  CHECK(b[1] == doctest::Approx(0.5).epsilon(1e-14));
  const auto m = redistribute_vertices(BranchId::Middle, 5, 0.1);
  CHECK(m[0] == 0.0);
  CHECK(m[4] == 1.0);
  // mpmath: (3*pi/4 - cos(3*pi/4) + 1) / (3*pi + 2)
  CHECK(m[1] == doctest::Approx(0.355656913887651).epsilon(1e-13));
  CHECK(redistribute_vertices(BranchId::Middle, 5, 0.9) == m);
  const auto d = redistribute_vertices(BranchId::Dark, 5, 0.5);
  CHECK(d[2] == doctest::Approx(std::pow(0.5, 1.8)).epsilon(1e-14));
}

TEST_CASE("vertex grids take each axis from its own channel mean") {
  const VertexGrid g = gen_vertices(BranchId::Bright, 9, {0.1, 0.5, 0.9});
  for (int c = 0; c < 3; ++c) {
    const auto ref = oracle::vertex_law(BranchId::Bright, 9, c == 0 ? 0.1 : (c == 1 ? 0.5 : 0.9));
    for (std::size_t k = 0; k < 9; ++k) CHECK(g.axis(c)[k] == doctest::Approx(ref[k]).epsilon(1e-14));
  }
}

TEST_CASE("vertex laws hold for every size and many means") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 2; n <= 65; ++n)
    for (int trial = 0; trial < 40; ++trial) {
      const double mean = trial == 0 ? 0.0 : (trial == 1 ? 1.0 : u(rng));
      for (BranchId b : kBranches) {
        const auto v = redistribute_vertices(b, n, mean);
        REQUIRE(v.front() == 0.0);
        REQUIRE(v.back() == 1.0);
        for (std::size_t k = 1; k < n; ++k) REQUIRE(v[k] > v[k - 1]);
      }
    }
}

TEST_CASE("branch densities concentrate where intended") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n : {5u, 17u, 33u})
    for (int trial = 0; trial < 200; ++trial) {
      const double mean = u(rng);
      auto above = [](const std::vector<double>& v) {
        return std::count_if(v.begin(), v.end(), [](double x) { return x > 0.5; });
      };
      auto below = [](const std::vector<double>& v) {
        return std::count_if(v.begin(), v.end(), [](double x) { return x < 0.5; });
      };
      const auto b = redistribute_vertices(BranchId::Bright, n, mean);
      const auto d = redistribute_vertices(BranchId::Dark, n, mean);
      CHECK(2 * above(b) > static_cast<long>(n));
      CHECK(2 * below(d) > static_cast<long>(n));
      const auto m = redistribute_vertices(BranchId::Middle, n, mean);
      std::size_t k_min = 1;
      for (std::size_t k = 1; k < n; ++k)
        if (m[k] - m[k - 1] < m[k_min] - m[k_min - 1]) k_min = k;
      const double centre = 0.5 * (m[k_min] + m[k_min - 1]);
      if (n > 2) {
        CHECK(centre >= 0.4);
        CHECK(centre <= 0.6);
      }
    }
}

TEST_CASE("identity LUT on a uniform grid reproduces its input") {
  const Lut3D lut(LutContent::identity(17), VertexGrid::uniform(17));
  const Rgb y = lookup(lut, {0.3, 0.6, 0.9});
  CHECK(y[0] == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(y[1] == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(y[2] == doctest::Approx(0.9).epsilon(1e-6));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Rgb x{u(rng), u(rng), u(rng)};
    const Rgb out = lookup(lut, x);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(out[c] - x[c]) <= 1e-6);
  }
}

TEST_CASE("lookup matches the naive interpolator on non-uniform grids") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t n : {2u, 3u, 9u, 17u}) {
    const LutContent content = oracle::random_lut(n, rng);
    const VertexGrid grid = oracle::random_grid(n, rng);
    const Lut3D lut(content, grid);
    const auto axes = axes_of(grid);
    const auto data = to_vector(content);
    for (int i = 0; i < 5000; ++i) {
      const Rgb q{u(rng), u(rng), u(rng)};
      const Rgb a = lookup(lut, q);
      const auto b = oracle::trilinear(data, n, axes, q);
      for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(a[c] - b[c]));
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("lookup at lattice vertices returns stored content") {
  std::mt19937_64 rng(3);
  const std::size_t n = 9;
  const LutContent content = oracle::random_lut(n, rng);
  const VertexGrid grid = gen_vertices(BranchId::Dark, n, {0.2, 0.4, 0.8});
  const Lut3D lut(content, grid);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t g = 0; g < n; ++g)
      for (std::size_t r = 0; r < n; ++r) {
        const Rgb y = lookup(lut, {grid.axis(0)[r], grid.axis(1)[g], grid.axis(2)[b]});
        for (int c = 0; c < 3; ++c) REQUIRE(std::abs(y[c] - content.at(r, g, b)[c]) <= 1e-6);
      }
}

TEST_CASE("lookup clamps out-of-range queries and counts them") {
  const Lut3D lut(LutContent::identity(5), VertexGrid::uniform(5));
  reset_clamp_count();
  const Rgb y = lookup(lut, {-0.5, 1.5, 0.5});
  CHECK(y[0] == 0.0);
  CHECK(y[1] == doctest::Approx(1.0));
  CHECK(clamp_count() == 2);
}

TEST_CASE("lookup is monotone along rays of a monotone LUT") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 9;
  // Cumulative positive steps along each axis build a monotone lattice.
  LutContent content = LutContent::filled(n, 0.0f);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t g = 0; g < n; ++g) {
      float acc = 0.0f;
      for (std::size_t r = 0; r < n; ++r) {
        float* e = content.at(r, g, b);
        e[0] = acc += static_cast<float>(u(rng));
        e[1] = static_cast<float>(g + 0.1 * r);
        e[2] = static_cast<float>(b * b);
      }
    }
  REQUIRE(reg_monotonicity(content) == 0.0);
  const Lut3D lut(content, oracle::random_grid(n, rng));
  for (int ray = 0; ray < 50; ++ray) {
    const int axis = ray % 3;
    Rgb q{u(rng), u(rng), u(rng)};
    double prev = -1e30;
    for (int s = 0; s <= 200; ++s) {
      q[axis] = s / 200.0;
      const double v = lookup(lut, q)[axis];
      CHECK(v >= prev - 1e-9);
      prev = v;
    }
  }
}

TEST_CASE("merge examples") {
  std::mt19937_64 rng(7);
  std::vector<LutContent> basis;
  for (int i = 0; i < 5; ++i) basis.push_back(oracle::random_lut(5, rng));
  CHECK(merge_luts(basis, std::vector<double>{1, 0, 0, 0, 0}) == basis[0]);

  std::vector<LutContent> same(5, basis[2]);
  CHECK(merge_luts(same, std::vector<double>{0.5, 0.5, 0, 0, 0}) == basis[2]);

  const std::vector<double> w{0.3, -0.7, 1.1, 0.05, 2.0};
  const LutContent m = merge_luts(basis, w);
  for (std::size_t e : {0u, 17u, 200u, 374u}) {
    double ref = 0;
    for (int i = 0; i < 5; ++i) ref += w[i] * basis[i].data()[e];
    CHECK(m.data()[e] == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("merge is linear in the weights") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<LutContent> basis;
    for (int i = 0; i < 5; ++i) basis.push_back(oracle::random_lut(5, rng));
    std::vector<double> w1(5), w2(5), mix(5);
    const double a = g(rng), b = g(rng);
    for (int i = 0; i < 5; ++i) {
      w1[i] = g(rng);
      w2[i] = g(rng);
      mix[i] = a * w1[i] + b * w2[i];
    }
    const LutContent m = merge_luts(basis, mix), m1 = merge_luts(basis, w1), m2 = merge_luts(basis, w2);
    for (std::size_t e = 0; e < m.data().size(); ++e)
      REQUIRE(std::abs(m.data()[e] - (a * m1.data()[e] + b * m2.data()[e])) <= 1e-5 * (1 + std::abs(a) + std::abs(b)));
  }
}

TEST_CASE("merge rejects mismatched inputs") {
  std::vector<LutContent> basis(5, LutContent::identity(3));
  CHECK_THROWS_AS(merge_luts(basis, std::vector<double>{1, 0, 0}), Error);
  basis[3] = LutContent::identity(4);
  CHECK_THROWS_AS(merge_luts(basis, std::vector<double>{1, 0, 0, 0, 0}), Error);
}

TEST_CASE("LUT content shape checks") {
  CHECK_THROWS_AS(LutContent(3, std::vector<float>(10)), Error);
  CHECK_THROWS_AS(Lut3D(LutContent::identity(3), VertexGrid::uniform(4)), Error);
  const LutContent id = LutContent::identity(5);
  const float* e = id.at(1, 2, 3);
  CHECK(e[0] == 0.25f);
  CHECK(e[1] == 0.5f);
  CHECK(e[2] == 0.75f);
}

TEST_CASE("smoothness regulariser") {
  CHECK(reg_smoothness(LutContent::filled(6, 0.4f)) == 0.0);
  // n = 2 identity: each axis has 4 pairs with a unit step in one channel.
  CHECK(reg_smoothness(LutContent::identity(2)) == doctest::Approx(12.0));
  std::mt19937_64 rng(9);
  const LutContent l = oracle::random_lut(4, rng);
  std::vector<float> twice(l.data().begin(), l.data().end());
  for (float& v : twice) v *= 2.0f;
  CHECK(reg_smoothness(LutContent(4, twice)) == doctest::Approx(4.0 * reg_smoothness(l)).epsilon(1e-9));
}

TEST_CASE("monotonicity regulariser") {
  CHECK(reg_monotonicity(LutContent::identity(9)) == 0.0);
  const LutContent id = LutContent::identity(4);
  std::vector<float> neg(id.data().begin(), id.data().end());
  for (float& v : neg) v = -v;
  CHECK(reg_monotonicity(LutContent(4, neg)) > 0.0);
}

TEST_CASE("regularisers match brute force") {
  std::mt19937_64 rng(10);
  for (std::size_t n : {2u, 3u, 6u}) {
    const LutContent l = oracle::random_lut(n, rng);
    double smooth = 0, mono = 0;
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t g = 0; g < n; ++g)
        for (std::size_t r = 0; r < n; ++r)
          for (int axis = 0; axis < 3; ++axis) {
            std::size_t r2 = r, g2 = g, b2 = b;
            if (axis == 0) ++r2;
            if (axis == 1) ++g2;
            if (axis == 2) ++b2;
            if (r2 >= n || g2 >= n || b2 >= n) continue;
            for (int c = 0; c < 3; ++c) {
              const double d = static_cast<double>(l.at(r2, g2, b2)[c]) - l.at(r, g, b)[c];
              smooth += d * d;
              if (c == axis) mono += std::max(0.0, -d);
            }
          }
    CHECK(reg_smoothness(l) == doctest::Approx(smooth).epsilon(1e-9));
    CHECK(reg_monotonicity(l) == doctest::Approx(mono).epsilon(1e-9));
  }
}
