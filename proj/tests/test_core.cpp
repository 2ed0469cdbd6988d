#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "lseforge/matrix.hpp"
#include "lseforge/numeric.hpp"
#include "lseforge/rng.hpp"

using lseforge::DenseMatrix;
using lseforge::DenseMatrixD;
using lseforge::SplitMix64;

namespace {

// First 16 outputs for three seeds, frozen from an independent
// implementation of the same published mixing constants.
const std::uint64_t kStreamSeed0[16] = {
    0xe220a8397b1dcdafULL, 0x6e789e6aa1b965f4ULL, 0x06c45d188009454fULL, 0xf88bb8a8724c81ecULL,
    0x1b39896a51a8749bULL, 0x53cb9f0c747ea2eaULL, 0x2c829abe1f4532e1ULL, 0xc584133ac916ab3cULL,
    0x3ee5789041c98ac3ULL, 0xf3b8488c368cb0a6ULL, 0x657eecdd3cb13d09ULL, 0xc2d326e0055bdef6ULL,
    0x8621a03fe0bbdb7bULL, 0x8e1f7555983aa92fULL, 0xb54e0f1600cc4d19ULL, 0x84bb3f97971d80abULL};

const std::uint64_t kStreamSeed42[16] = {
    0xbdd732262feb6e95ULL, 0x28efe333b266f103ULL, 0x47526757130f9f52ULL, 0x581ce1ff0e4ae394ULL,
    0x09bc585a244823f2ULL, 0xde4431fa3c80db06ULL, 0x37e9671c45376d5dULL, 0xccf635ee9e9e2fa4ULL,
    0x5705b8770b3d7dd5ULL, 0x9e54d738297f77aeULL, 0x3474724a775b19bfULL, 0x7e348a0e451650beULL,
    0x836ded897f3e46e6ULL, 0x851f977347ed6db7ULL, 0xaa47e31c02e78edcULL, 0x341452c54d7c33f2ULL};

const std::uint64_t kStreamSeedDeadbeef[16] = {
    0x4adfb90f68c9eb9bULL, 0xde586a3141a10922ULL, 0x021fbc2f8e1cfc1dULL, 0x7466ce737be16790ULL,
    0x3bfa8764f685bd1cULL, 0xab203e503cb55b3fULL, 0x5a2fdc2bf68cedb3ULL, 0xb30a4ccf430b1b5aULL,
    0x0a90415039bd5985ULL, 0x26ae50847745eb7eULL, 0xe239ed306d9b1929ULL, 0xfb7d9a8d444d41bcULL,
    0x1bb52e523960d559ULL, 0xcf8631b40292b5d5ULL, 0xf6186c41b838b122ULL, 0x432497ffb78c1173ULL};

void expect_stream(std::uint64_t seed, const std::uint64_t (&want)[16]) {
  SplitMix64 rng(seed);
  for (int i = 0; i < 16; ++i) {
    CHECK(rng.next() == want[i]);
  }
}

}  // namespace

TEST_CASE("rng produces the reference output streams") {
  expect_stream(0x0, kStreamSeed0);
  expect_stream(0x2a, kStreamSeed42);
  expect_stream(0xdeadbeefULL, kStreamSeedDeadbeef);
}

TEST_CASE("rng uniform lies in [0,1) and matches the top-53-bit construction") {
  SplitMix64 rng(7);
  SplitMix64 ref(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    const double want = static_cast<double>(ref.next() >> 11) * 0x1.0p-53;
    CHECK(u == want);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("rng bounded draws stay in range and cover small supports") {
  SplitMix64 rng(123);
  std::vector<int> seen(5, 0);
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t v = rng.bounded(5);
    REQUIRE(v < 5);
    ++seen[static_cast<std::size_t>(v)];
  }
  for (int c : seen) CHECK(c > 0);
  CHECK_THROWS(rng.bounded(0));
}

TEST_CASE("rng derived substreams depend on the construction seed, not on consumption") {
  SplitMix64 a(99);
  SplitMix64 b(99);
  (void)b.next();
  (void)b.next();
  (void)b.uniform();
  // However much of the parent stream was consumed, derived(i) is the same.
  for (std::uint64_t i = 0; i < 8; ++i) {
    SplitMix64 da = a.derived(i);
    SplitMix64 db = b.derived(i);
    CHECK(da.next() == db.next());
  }
  // Distinct indices give distinct streams, and none equals the parent.
  SplitMix64 d0 = a.derived(0);
  SplitMix64 d1 = a.derived(1);
  SplitMix64 parent(99);
  const std::uint64_t x0 = d0.next();
  CHECK(x0 != d1.next());
  CHECK(x0 != parent.next());
}

TEST_CASE("matmul matches an index-naive triple loop on random instances") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.bounded(6);
    const std::size_t k = 1 + rng.bounded(6);
    const std::size_t m = 1 + rng.bounded(6);
    DenseMatrix a(n, k);
    DenseMatrix b(k, m);
    for (auto& x : a.data()) x = static_cast<float>(2.0 * rng.uniform() - 1.0);
    for (auto& x : b.data()) x = static_cast<float>(2.0 * rng.uniform() - 1.0);

    const DenseMatrixD got = lseforge::matmul_block(a, b);
    REQUIRE(got.rows() == n);
    REQUIRE(got.cols() == m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (std::size_t kk = 0; kk < k; ++kk) {
          acc += static_cast<double>(a(i, kk)) * static_cast<double>(b(kk, j));
        }
        CHECK(got(i, j) == doctest::Approx(acc).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("matmul hand cases") {
  const DenseMatrix eye = DenseMatrix::FromRows({{1, 0}, {0, 1}});
  const DenseMatrix col = DenseMatrix::FromRows({{3}, {4}});
  const DenseMatrixD r1 = lseforge::matmul_block(eye, col);
  CHECK(r1(0, 0) == 3.0);
  CHECK(r1(1, 0) == 4.0);

  const DenseMatrix row = DenseMatrix::FromRows({{1, 2}});
  const DenseMatrixD r2 = lseforge::matmul_block(row, col);
  REQUIRE(r2.rows() == 1);
  REQUIRE(r2.cols() == 1);
  CHECK(r2(0, 0) == 11.0);

  CHECK_THROWS_AS(lseforge::matmul_block(col, eye), std::invalid_argument);
}

TEST_CASE("logsumexp hand values and overflow safety") {
  const std::vector<double> two_zeros{0.0, 0.0};
  CHECK(lseforge::logsumexp_row(two_zeros) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  const std::vector<double> big{1000.0, 1000.0};
  CHECK(lseforge::logsumexp_row(big) ==
        doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
  CHECK(std::isfinite(lseforge::logsumexp_row(big)));

  const std::vector<double> empty;
  CHECK_THROWS(lseforge::logsumexp_row(empty));
}

TEST_CASE("logsumexp is permutation invariant and shift covariant") {
  SplitMix64 rng(5);
  std::vector<double> xs(17);
  for (auto& x : xs) x = 20.0 * (rng.uniform() - 0.5);
  const double base = lseforge::logsumexp_row(xs);

  std::vector<double> rev(xs.rbegin(), xs.rend());
  CHECK(lseforge::logsumexp_row(rev) == doctest::Approx(base).epsilon(1e-12));

  std::vector<double> shifted = xs;
  for (auto& x : shifted) x += 123.5;
  CHECK(lseforge::logsumexp_row(shifted) == doctest::Approx(base + 123.5).epsilon(1e-12));
}

TEST_CASE("online lse matches the two-pass form and handles the first element") {
  lseforge::OnlineLse acc;
  CHECK(acc.max_log == -std::numeric_limits<double>::infinity());
  acc.update(0.0);
  CHECK(acc.max_log == 0.0);
  CHECK(acc.sum == 1.0);
  CHECK(acc.value() == doctest::Approx(0.0).epsilon(1e-15));

  SplitMix64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t len = 1 + rng.bounded(40);
    std::vector<double> xs(len);
    for (auto& x : xs) x = 60.0 * (rng.uniform() - 0.5);
    lseforge::OnlineLse online;
    for (double x : xs) online.update(x);
    CHECK(online.value() ==
          doctest::Approx(lseforge::logsumexp_row(xs)).epsilon(1e-12));
  }
}

TEST_CASE("matrix views and checked access") {
  DenseMatrix m(2, 3);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(i);
  CHECK(m.at(1, 2) == 5.0f);
  CHECK_THROWS_AS(m.at(2, 0), std::out_of_range);
  CHECK_THROWS_AS(m.at(0, 3), std::out_of_range);

  const auto view = lseforge::MatView<float>::Of(m);
  const auto blk = view.block(0, 2, 1, 2);
  CHECK(blk.rows == 2);
  CHECK(blk.cols == 2);
  CHECK(blk.row_ptr(1)[0] == 4.0f);
  CHECK_THROWS(view.block(1, 1, 2, 3));
}
