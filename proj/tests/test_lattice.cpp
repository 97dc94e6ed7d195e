#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "wanova/lattice.hpp"

using namespace wanova;

TEST_CASE("korobov construction") {
  auto v = GeneratingVector::korobov(3, 8, 3);
  CHECK(v.z == std::vector<std::uint64_t>{1, 3, 1});  // 3^2 = 9 = 1 mod 8
  auto ones = GeneratingVector::korobov(1, 16, 4);
  CHECK(ones.z == std::vector<std::uint64_t>{1, 1, 1, 1});
  CHECK_THROWS_AS(GeneratingVector::korobov(2, 8, 2), InvalidVector);
}

TEST_CASE("vector validation") {
  GeneratingVector bad;
  bad.n = 8;
  bad.z = {1, 2};  // gcd(2,8) != 1
  CHECK_THROWS_AS(bad.validate(), InvalidVector);
  bad.z = {0};
  CHECK_THROWS_AS(bad.validate(), InvalidVector);
  bad.z = {9};
  CHECK_THROWS_AS(bad.validate(), InvalidVector);
}

TEST_CASE("vector file round trip") {
  const char* path = "test_vector_file.txt";
  {
    std::ofstream out(path);
    out << "N=16\nz=1,7,5\n";
  }
  auto v = GeneratingVector::load(path);
  CHECK(v.n == 16);
  CHECK(v.z == std::vector<std::uint64_t>{1, 7, 5});
  std::remove(path);

  {
    std::ofstream out(path);
    out << "garbage\n";
  }
  CHECK_THROWS_AS(GeneratingVector::load(path), ParseError);
  std::remove(path);
  CHECK_THROWS_AS(GeneratingVector::load("no_such_file.txt"), ParseError);
}

TEST_CASE("lattice point formula") {
  GeneratingVector v;
  v.n = 4;
  v.z = {1};
  double zero = 0.0;
  auto pts = lattice_points(v, {&zero, 1});
  REQUIRE(pts.size() == 4);
  CHECK(pts[0][0] == 0.0);
  CHECK(pts[1][0] == 0.25);
  CHECK(pts[2][0] == 0.5);
  CHECK(pts[3][0] == 0.75);

  GeneratingVector v2;
  v2.n = 8;
  v2.z = {1, 3};
  std::vector<double> no_shift{0.0, 0.0};
  auto pts2 = lattice_points(v2, no_shift);
  for (std::uint64_t i = 0; i < 8; ++i) {
    CHECK(pts2[i][0] == double(i) / 8.0);
    CHECK(pts2[i][1] == double((3 * i) % 8) / 8.0);
  }

  // a shift moves every point by the same amount mod 1
  std::vector<double> half{0.5, 0.5};
  auto shifted = lattice_points(v2, half);
  for (std::uint64_t i = 0; i < 8; ++i)
    for (int j = 0; j < 2; ++j) {
      double expect = pts2[i][static_cast<size_t>(j)] + 0.5;
      if (expect >= 1.0) expect -= 1.0;
      CHECK(shifted[i][static_cast<size_t>(j)] == expect);
    }
}

TEST_CASE("lattice shifts by lattice points permute the point set") {
  GeneratingVector v;
  v.n = 16;
  v.z = {1, 7};
  std::vector<double> zero{0.0, 0.0};
  auto base = lattice_points(v, zero);
  // shift by the 5th lattice point
  auto delta = base[5];
  auto shifted = lattice_points(v, delta);
  auto key = [](const std::vector<double>& p) { return p[0] * 16.0 * 100.0 + p[1] * 16.0; };
  std::vector<double> a, b;
  for (const auto& p : base) a.push_back(key(p));
  for (const auto& p : shifted) b.push_back(key(p));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
}

TEST_CASE("qmc estimates") {
  auto v = GeneratingVector::korobov(97, 256, 3);

  auto run1 = qmc_estimate([](std::span<const double>) { return 1.0; }, v, 8, 7);
  CHECK(run1.mean == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(run1.rms_error == 0.0);

  auto runx = qmc_estimate([](std::span<const double> x) { return x[0]; }, v, 16, 7);
  CHECK(std::abs(runx.mean) <= std::max(4.0 * runx.rms_error, 1e-3));

  auto v4 = GeneratingVector::korobov(409, 1024, 4);
  auto runq = qmc_estimate(
      [](std::span<const double> x) {
        double s = 0.0;
        for (double xi : x) s += xi * xi;
        return s;
      },
      v4, 16, 11);
  CHECK(std::abs(runq.mean - 4.0) <= 4.0 * runq.rms_error);

  // cross-check with the Monte Carlo baseline
  auto runmc = mc_estimate(
      [](std::span<const double> x) {
        double s = 0.0;
        for (double xi : x) s += xi * xi;
        return s;
      },
      4, 4096, 16, 11);
  CHECK(std::abs(runmc.mean - 4.0) <= 4.0 * runmc.rms_error);
  CHECK(runq.rms_error < runmc.rms_error);  // smooth integrand favours qmc
}

TEST_CASE("estimates are reproducible bit for bit") {
  auto v = GeneratingVector::korobov(97, 512, 2);
  auto f = [](std::span<const double> x) { return std::exp(0.3 * x[0]) + x[1]; };
  auto a = qmc_estimate(f, v, 8, 1234);
  auto b = qmc_estimate(f, v, 8, 1234);
  CHECK(a.mean == b.mean);
  CHECK(a.rms_error == b.rms_error);
  for (int s = 0; s < 8; ++s) CHECK(a.shift_means[static_cast<size_t>(s)] == b.shift_means[static_cast<size_t>(s)]);
  auto c = qmc_estimate(f, v, 8, 4321);
  CHECK(a.mean != c.mean);

  auto m1 = mc_estimate(f, 2, 1000, 4, 99);
  auto m2 = mc_estimate(f, 2, 1000, 4, 99);
  CHECK(m1.mean == m2.mean);
}

TEST_CASE("non-finite integrand values are reported") {
  auto v = GeneratingVector::korobov(5, 16, 1);
  CHECK_THROWS_AS(qmc_estimate([](std::span<const double>) { return std::nan(""); }, v, 2, 1),
                  NonFiniteSample);
}

TEST_CASE("korobov search returns an admissible multiplier") {
  std::uint64_t a = korobov_search(256, 4, 7, 32);
  CHECK(a >= 1);
  CHECK(a < 256);
  CHECK(a % 2 == 1);
  CHECK_NOTHROW(GeneratingVector::korobov(a, 256, 4));
}
