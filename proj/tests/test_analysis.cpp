#include <hpda/analysis.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace hpda;

namespace {

SystemParams example_system() { return {2, 2, 4, 8, 24}; }

// Straight double-precision transcription of the two baseline load formulas.
double rc_d(double mu, double K) { return K * (1 - mu) / (1 + K * mu); }

double baseline_r1_d(bool knmd, double a, double b, double K1, double K2, double m1, double m2) {
  double r = 0;
  if (a > 0) {
    double mu1 = m1 / a, mu2 = b * m2 / a;
    if (mu1 > 1 + 1e-12 || mu2 > 1 + 1e-12) return NAN;
    r += a * (knmd ? K2 * rc_d(mu1, K1) : rc_d(mu1, K1) * rc_d(mu2, K2));
  }
  if (a < 1) {
    double mu = (1 - b) * m2 / (1 - a);
    if (mu > 1 + 1e-12) return NAN;
    r += (1 - a) * rc_d(mu, K1 * K2);
  }
  return r;
}

}  // namespace

TEST(Rc, Examples) {
  EXPECT_EQ(rc(0, 5), 5);
  EXPECT_EQ(rc(1, 5), 0);
  EXPECT_EQ(rc(Rational(1, 2), 4), Rational(2, 3));
  EXPECT_THROW(rc(Rational(3, 2), 4), PreconditionError);
}

TEST(Rc, ModelsAgreeOnLattice) {
  for (std::size_t K = 1; K <= 12; ++K)
    for (std::size_t t = 0; t <= K; ++t)
      EXPECT_EQ(rc(Rational(t, K), K), rc(Rational(t, K), K, RcModel::MemorySharing));
  // Off the lattice, sharing lies on the chord and above the closed form.
  EXPECT_EQ(rc(Rational(1, 8), 4, RcModel::MemorySharing), Rational(11, 4));
  EXPECT_GT(rc(Rational(1, 8), 4, RcModel::MemorySharing), rc(Rational(1, 8), 4));
}

TEST(Baselines, CollapseAtFullSplit) {
  SystemParams p = example_system();
  SplitParams full{1, 1};
  LoadPair k = knmd_loads(p, full);
  LoadPair w = wwcy_loads(p, full);
  EXPECT_EQ(k.R1, 2 * rc(Rational(1, 6), 2));
  EXPECT_EQ(k.R2, rc(Rational(1, 3), 2));
  EXPECT_EQ(w.R1, rc(Rational(1, 6), 2) * rc(Rational(1, 3), 2));
  EXPECT_EQ(w.R2, k.R2);
}

TEST(Baselines, InfeasibleSplitsRejected) {
  SystemParams p = example_system();
  EXPECT_THROW(knmd_loads(p, {Rational(1, 10), 1}), InfeasibleSplit);
  EXPECT_THROW(wwcy_loads(p, {Rational(1, 10), 1}), InfeasibleSplit);
}

TEST(Baselines, SecondLayerOptimalWhenSplitsMatch) {
  SystemParams p{2, 2, 12, 12, 24};  // M2/N = 1/2 on the K2 lattice
  for (int i = 1; i <= 9; ++i) {
    Rational a(i, 10);
    try {
      EXPECT_EQ(knmd_loads(p, {a, a}).R2, rc(Rational(1, 2), 2));
    } catch (const InfeasibleSplit&) {
    }
  }
}

TEST(Baselines, KnmdFirstLayerNeverBelowWwcy) {
  SystemParams p = example_system();
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) {
      SplitParams s{Rational(i, 20), Rational(j, 20)};
      try {
        EXPECT_GE(knmd_loads(p, s).R1, wwcy_loads(p, s).R1);
      } catch (const InfeasibleSplit&) {
      }
    }
}

TEST(OptimizeBaseline, MatchesFloatingPointGridSearch) {
  SystemParams p = example_system();
  for (Baseline b : {Baseline::KNMD, Baseline::WWCY}) {
    BaselineOptimum opt = optimize_baseline(b, p, Objective::R1, 201);
    double best = INFINITY;
    for (int i = 0; i <= 200; ++i)
      for (int j = 0; j <= 200; ++j) {
        double v = baseline_r1_d(b == Baseline::KNMD, i / 200.0, j / 200.0, 2, 2, 1 / 6.0, 1 / 3.0);
        if (!std::isnan(v)) best = std::min(best, v);
      }
    EXPECT_NEAR(to_double(opt.loads.R1), best, 1e-9) << to_string(b);
  }
}

TEST(OptimizeBaseline, FrozenOptimaForExampleSystem) {
  // Frozen from the floating-point oracle above: alpha = 6/25, beta = 0.
  SystemParams p = example_system();
  BaselineOptimum k = optimize_baseline(Baseline::KNMD, p, Objective::R1);
  BaselineOptimum w = optimize_baseline(Baseline::WWCY, p, Objective::R1);
  EXPECT_EQ(k.split.alpha, Rational(6, 25));
  EXPECT_EQ(k.split.beta, 0);
  EXPECT_NEAR(to_double(k.loads.R1), 0.7424, 1e-4);
  EXPECT_EQ(w.loads.R1, k.loads.R1);
  EXPECT_GT(k.loads.R1, Rational(2, 3));
}

TEST(OptimizeBaseline, DegenerateFullMirrorMemory) {
  SystemParams p{2, 2, 24, 8, 24};
  BaselineOptimum k = optimize_baseline(Baseline::KNMD, p, Objective::R1, 101);
  EXPECT_EQ(k.loads.R1, 0);
  EXPECT_THROW(optimize_baseline(Baseline::KNMD, p, Objective::R1, 50), PreconditionError);
}

TEST(OptimizeBaseline, ParetoFrontierIsMonotone) {
  BaselineOptimum k = optimize_baseline(Baseline::WWCY, example_system(), Objective::R1, 101,
                                        RcModel::ClosedForm, true);
  ASSERT_FALSE(k.pareto.empty());
  for (std::size_t i = 1; i < k.pareto.size(); ++i) {
    EXPECT_GE(k.pareto[i].second.R1, k.pareto[i - 1].second.R1);
    EXPECT_LT(k.pareto[i].second.R2, k.pareto[i - 1].second.R2);
  }
}

TEST(Thm2, ExampleValues) {
  PerfRecord sp = thm2_perf(2, 2, 2, 24, Mode::SecurePrivate);
  EXPECT_EQ(sp.m1_ratio, Rational(13, 72));
  EXPECT_EQ(sp.m2_ratio, Rational(26, 72));
  EXPECT_EQ(sp.R1, Rational(2, 3));
  EXPECT_EQ(sp.R2, 1);
  EXPECT_EQ(sp.F, 6);
  PerfRecord plain = thm2_perf(2, 2, 2, 24, Mode::Plain);
  EXPECT_EQ(plain.m1_ratio, Rational(1, 6));
  EXPECT_EQ(plain.m2_ratio, Rational(1, 3));
  PerfRecord full = thm2_perf(2, 3, 6, 10, Mode::Plain);
  EXPECT_EQ(full.R1, 0);
  EXPECT_EQ(full.R2, 3);
  EXPECT_THROW(thm2_perf(2, 3, 2, 10, Mode::Plain), PreconditionError);
}

TEST(Thm2, RatiosUseProductIdentity) {
  for (std::size_t K2 = 1; K2 <= 5; ++K2)
    for (std::size_t K1 = 1; K1 <= 6; ++K1)
      for (std::size_t t = K2; t <= K1 * K2; ++t) {
        Rational prod = 1;
        for (std::size_t i = 0; i < K2; ++i) prod *= Rational(t - i, K1 * K2 - i);
        EXPECT_EQ(thm2_perf(K1, K2, t, 100, Mode::Plain).m1_ratio, prod);
      }
}

TEST(Thm2, OptimalAndFirstLayerMonotone) {
  for (auto [K1, K2] : {std::pair<std::size_t, std::size_t>{2, 2}, {4, 3}, {40, 20}}) {
    Rational prev = -1;
    for (std::size_t t = K2; t <= K1 * K2; ++t) {
      PerfRecord r = thm2_perf(K1, K2, t, 10000, Mode::Plain);
      EXPECT_EQ(r.R1, lower_bound_r1(K1, K2, t));
      if (prev >= 0) {
        EXPECT_LE(r.R1, prev);
      }
      prev = r.R1;
    }
  }
}

TEST(Thm2, SecondLayerRisesTowardK2) {
  // Star rows promoted to the mirrors turn into mirror-originated labels, so
  // the second-layer load grows again as t approaches K1*K2.
  EXPECT_EQ(thm2_perf(2, 2, 2, 10, Mode::Plain).R2, 1);
  EXPECT_EQ(thm2_perf(2, 2, 3, 10, Mode::Plain).R2, Rational(5, 4));
  EXPECT_EQ(thm2_perf(2, 2, 4, 10, Mode::Plain).R2, 2);
  EXPECT_EQ(thm2_perf(40, 20, 800, 10, Mode::Plain).R2, 20);
}

TEST(Thm2, SecurePrivateGapVanishes) {
  Rational prev = 1;
  for (int N : {10, 100, 1000, 10000}) {
    PerfRecord sp = thm2_perf(3, 2, 3, N, Mode::SecurePrivate);
    PerfRecord plain = thm2_perf(3, 2, 3, N, Mode::Plain);
    Rational gap = sp.m1_ratio - plain.m1_ratio + sp.m2_ratio - plain.m2_ratio;
    EXPECT_GT(gap, 0);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
}

TEST(Thm3, ExampleValues) {
  PerfRecord r = thm3_perf({2, 2, 1, 1}, {3, 3, 1, 3}, 24, Mode::Plain);
  EXPECT_EQ(r.R1, Rational(1, 2));
  EXPECT_EQ(r.R2, 1);
  EXPECT_EQ(r.F, 6);
  PerfRecord m = thm3_perf(mn_pda(2, 1).params(), mn_pda(2, 1).params(), 4, Mode::Plain);
  EXPECT_EQ(m.R1, Rational(1, 4));
  EXPECT_EQ(m.R2, Rational(1, 2));
  EXPECT_EQ(thm3_perf({2, 1, 1, 0}, {3, 3, 1, 3}, 4, Mode::Plain).R1, 0);
  PerfRecord sp = thm3_perf({2, 2, 1, 1}, {3, 3, 1, 3}, 24, Mode::SecurePrivate);
  EXPECT_EQ(sp.m1_ratio, Rational(1, 2) + Rational(3, 6 * 24));
  EXPECT_EQ(sp.m2_ratio, Rational(1, 3) + Rational(2, 3 * 24));
}

TEST(Thm3, MnPairsMatchWwcyAtFullSplit) {
  for (std::size_t K1 = 1; K1 <= 5; ++K1)
    for (std::size_t t1 = 1; t1 <= K1; ++t1)
      for (std::size_t K2 = 1; K2 <= 5; ++K2)
        for (std::size_t t2 = 1; t2 <= K2; ++t2) {
          PerfRecord r = thm3_perf(mn_pda(K1, t1).params(), mn_pda(K2, t2).params(), 50, Mode::Plain);
          SystemParams p{K1, K2, Rational(50 * t1, K1), Rational(50 * t2, K2), 50};
          LoadPair w = wwcy_loads(p, {1, 1});
          EXPECT_EQ(r.R1, w.R1);
          EXPECT_EQ(r.R2, w.R2);
        }
}

TEST(LowerBound, Examples) {
  EXPECT_EQ(lower_bound_r1(2, 2, 2), Rational(2, 3));
  EXPECT_EQ(lower_bound_r1(2, 2, 4), 0);
  EXPECT_THROW(lower_bound_r1(2, 2, 5), PreconditionError);
}

TEST(Families, PartitionHullAtForty) {
  auto fam = partition_family(40);
  std::vector<std::string> labels;
  for (const auto& p : fam) labels.push_back(p.label);
  EXPECT_EQ(labels, (std::vector<std::string>{"trivial:0", "partition:20,1", "partition:10,3", "partition:8,4",
                                              "partition:5,7", "partition:4,9", "partition:2,19", "trivial:1"}));
  for (std::size_t qp : {2, 4, 5, 8, 10, 20}) {
    auto pp = partition_pda_params(qp, 40 / qp - 1);
    EXPECT_EQ(pp.K, 40u);
  }
}

TEST(Families, SharingInterpolates) {
  auto fam = mn_family(4);
  SharedPoint s = share(fam, Rational(3, 8));
  EXPECT_EQ(s.load, (Rational(3, 2) + Rational(2, 3)) / 2);
  EXPECT_EQ(s.parts.size(), 2u);
  EXPECT_EQ(share(fam, Rational(1, 2)).parts.size(), 1u);
}

TEST(Sweep, SchemeOrderingsSmall) {
  auto ts = fig5_points(4, 3, {Rational(1, 5), Rational(1, 2)});
  auto rows = sweep_compare(4, 3, 1000, ts);
  EXPECT_EQ(rows.size(), 10u);
  std::string csv = to_csv(rows, 4, 3, 1000);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "scheme,mode,K1,K2,N,t_or_params,m1_ratio,m2_ratio,F_or_log10F,R1,R2");
  EXPECT_NE(csv.find("\"mn:4,"), std::string::npos);
}

TEST(Sweep, LargeFIsReportedAsLog) {
  EXPECT_EQ(format_F(BigInt(123456)), "123456");
  EXPECT_EQ(format_F(binom(800, 400)).rfind("log10:", 0), 0u);
}
