#include <hpda/field.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

using namespace hpda;

namespace {

// Row-space size by enumerating every combination; rank = log_q(size).
std::size_t brute_rank(const std::vector<FVec>& rows, const FieldCtx& f) {
  std::set<FVec> span;
  std::size_t combos = 1;
  for (std::size_t i = 0; i < rows.size(); ++i) combos *= f.q();
  for (std::size_t c = 0; c < combos; ++c) {
    FVec acc(rows.front().size());
    std::size_t x = c;
    for (const auto& r : rows) {
      f.axpy(acc, static_cast<Elem>(x % f.q()), r);
      x /= f.q();
    }
    span.insert(acc);
  }
  std::size_t rank = 0;
  for (std::size_t s = 1; s < span.size(); s *= f.q()) ++rank;
  return rank;
}

}  // namespace

TEST(Field, RejectsNonPrimeOrders) {
  EXPECT_THROW(FieldCtx(1), PreconditionError);
  EXPECT_THROW(FieldCtx(4), PreconditionError);
  EXPECT_THROW(FieldCtx(9), PreconditionError);
  EXPECT_NO_THROW(FieldCtx(2));
  EXPECT_NO_THROW(FieldCtx(2147483647u - 0));
}

TEST(Field, ScalarExamples) {
  EXPECT_EQ(FieldCtx(3).add(2, 2), 1u);
  EXPECT_EQ(FieldCtx(2).inv(1), 1u);
  EXPECT_EQ(FieldCtx(5).inv(2), 3u);
  EXPECT_THROW(FieldCtx(5).inv(0), PreconditionError);
}

TEST(Field, InverseMatchesBruteForceScan) {
  for (std::uint32_t q : {2u, 3u, 5u, 7u, 11u, 13u}) {
    FieldCtx f(q);
    for (Elem a = 1; a < q; ++a) {
      Elem scan = 0;
      for (Elem b = 1; b < q; ++b)
        if ((a * b) % q == 1) scan = b;
      EXPECT_EQ(f.inv(a), scan) << "q=" << q << " a=" << a;
    }
  }
}

TEST(Field, AxiomsHoldExhaustively) {
  for (std::uint32_t q : {2u, 3u, 5u, 7u}) {
    FieldCtx f(q);
    for (Elem a = 0; a < q; ++a) {
      EXPECT_EQ(f.add(a, f.neg(a)), 0u);
      EXPECT_EQ(f.sub(a, a), 0u);
      for (Elem b = 0; b < q; ++b) {
        EXPECT_EQ(f.add(a, b), f.add(b, a));
        EXPECT_EQ(f.mul(a, b), f.mul(b, a));
        for (Elem c = 0; c < q; ++c) {
          EXPECT_EQ(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
          EXPECT_EQ(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
          EXPECT_EQ(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        }
      }
    }
  }
}

TEST(Field, VectorOpsCheckDimensions) {
  FieldCtx f(3);
  FVec a{1, 2}, b{2, 2, 0};
  EXPECT_THROW(f.add(a, b), PreconditionError);
  EXPECT_EQ(f.add(a, FVec{2, 2}), (FVec{0, 1}));
  EXPECT_EQ(f.sub(FVec{0, 1}, FVec{1, 2}), (FVec{2, 2}));
  EXPECT_EQ(f.scale(2, FVec{1, 2}), (FVec{2, 1}));
}

TEST(MatrixRank, Examples) {
  FieldCtx f2(2);
  EXPECT_EQ(matrix_rank({FVec{1, 0}, FVec{0, 1}}, f2), 2u);
  EXPECT_EQ(matrix_rank({FVec{1, 1, 0}, FVec{1, 1, 0}}, f2), 1u);
  EXPECT_THROW(matrix_rank(std::vector<FVec>{}, f2), PreconditionError);
  EXPECT_THROW(matrix_rank({FVec{1}, FVec{1, 0}}, f2), PreconditionError);
}

TEST(MatrixRank, ExampleDemandMatrixHasFullRank) {
  // Users demand W1+W2, W3+W4, W5+W6, W7+W8 out of 24 files.
  FieldCtx f(2);
  std::vector<FVec> D;
  for (std::size_t u = 0; u < 4; ++u) {
    FVec d(24);
    d[2 * u] = d[2 * u + 1] = 1;
    D.push_back(d);
  }
  EXPECT_EQ(matrix_rank(D, f), 4u);
}

TEST(MatrixRank, AgreesWithRowSpaceEnumeration) {
  Rng rng(7);
  for (std::uint32_t q : {2u, 3u}) {
    FieldCtx f(q);
    for (int trial = 0; trial < 300; ++trial) {
      std::size_t rows = 1 + rng.below(3), cols = 1 + rng.below(3);
      std::vector<FVec> m;
      for (std::size_t r = 0; r < rows; ++r) m.push_back(random_vec(f, cols, rng));
      EXPECT_EQ(matrix_rank(m, f), brute_rank(m, f));
    }
  }
}

TEST(SampleWithSum, ForcedAndEnumeratedCases) {
  FieldCtx f2(2), f3(3);
  Rng rng(1);
  EXPECT_EQ(sample_vec_with_sum(f2, 1, 0, rng), FVec{0});
  for (int i = 0; i < 50; ++i) {
    FVec v = sample_vec_with_sum(f3, 2, 2, rng);
    EXPECT_EQ(f3.sum(v), 2u);
  }
  EXPECT_THROW(sample_vec_with_sum(f2, 0, 0, rng), PreconditionError);
}

TEST(SampleWithSum, EmpiricalFrequencyWithinThreeSigma) {
  FieldCtx f(2);
  const int trials = 10000;
  int ones_first = 0;
  for (int seed = 0; seed < trials; ++seed) {
    Rng rng(seed);
    FVec v = sample_vec_with_sum(f, 2, 1, rng);
    ASSERT_EQ(f.sum(v), 1u);
    ones_first += v[0] == 1;
  }
  const double sigma = std::sqrt(trials * 0.25);
  EXPECT_LT(std::abs(ones_first - trials / 2.0), 3 * sigma);
}

TEST(SampleWithSum, UniformOverAffineSubspace) {
  FieldCtx f(3);
  std::map<FVec, int> counts;
  Rng rng(99);
  const int trials = 9000;
  for (int i = 0; i < trials; ++i) ++counts[sample_vec_with_sum(f, 3, 1, rng)];
  EXPECT_EQ(counts.size(), 9u);
  for (const auto& [v, c] : counts) {
    EXPECT_EQ(f.sum(v), 1u);
    EXPECT_LT(std::abs(c - 1000), 3 * std::sqrt(1000 * 8.0 / 9));
  }
}

TEST(Rng, ReplaysAndSplits) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
  Rng c = Rng(42).split(1), d = Rng(42).split(2);
  EXPECT_NE(c.next(), d.next());
  EXPECT_EQ(Rng(42).split(5).next(), Rng(42).split(5).next());
}
