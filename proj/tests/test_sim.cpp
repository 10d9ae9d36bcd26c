#include <hpda/sim.hpp>

#include <gtest/gtest.h>

using namespace hpda;

namespace {

DemandMatrix pair_sum_demand() {
  DemandMatrix D;
  for (std::size_t u = 0; u < 4; ++u) {
    FVec d(24);
    d[2 * u] = d[2 * u + 1] = 1;
    D.rows.push_back(d);
  }
  return D;
}

Transcript session(const Hpda& h, std::size_t N, std::size_t B, std::uint32_t q, Mode mode, Delivery del,
                   std::uint64_t seed, std::optional<DemandMatrix> D = std::nullopt) {
  Rng rng(seed);
  SchemeInstance inst = SchemeInstance::make(h, N, B, q, mode, del);
  Library lib = random_library(inst, rng);
  Randomness rand = draw_randomness(inst, rng);
  DemandMatrix dm = D ? *D : random_full_rank_demand(inst.K1(), inst.K2(), N, inst.field, rng);
  return run_session(inst, lib, rand, dm);
}

}  // namespace

TEST(Session, TwoByTwoGroupingPlain) {
  Transcript t = session(grouping_hpda({2, 2, 2}), 24, 6, 2, Mode::Plain, Delivery::MirrorAssisted, 1,
                         pair_sum_demand());
  EXPECT_EQ(t.layer1.size(), 4u);
  EXPECT_EQ(t.layer2[0].size(), 6u);
  auto [r1, r2] = measure_loads(t);
  EXPECT_EQ(r1, Rational(2, 3));
  EXPECT_EQ(r2, 1);
  EXPECT_TRUE(t.all_decoded());
}

TEST(Session, TwoByTwoGroupingSecurePrivate) {
  Transcript t = session(grouping_hpda({2, 2, 2}), 24, 6, 3, Mode::SecurePrivate, Delivery::MirrorAssisted,
                         1, pair_sum_demand());
  auto [r1, r2] = measure_loads(t);
  EXPECT_EQ(r1, Rational(2, 3));
  EXPECT_EQ(r2, 1);
  std::size_t meta = 0;
  for (const auto& e : t.layer1) meta += e.kind == SignalKind::Metadata;
  EXPECT_EQ(meta, 4u);
  EXPECT_EQ(t.memory.m1_ratio, Rational(13, 72));
  EXPECT_TRUE(t.all_decoded());
}

TEST(Session, FullCacheAndHybridLoads) {
  Transcript full = session(grouping_hpda({2, 2, 4}), 4, 1, 2, Mode::Plain, Delivery::MirrorAssisted, 2);
  EXPECT_EQ(measure_loads(full).first, 0);
  EXPECT_TRUE(full.all_decoded());
  Transcript hyb = session(hybrid_hpda(mn_pda(2, 1), mn_pda(3, 1)), 6, 6, 5, Mode::Plain,
                           Delivery::MirrorAssisted, 3);
  auto [r1, r2] = measure_loads(hyb);
  EXPECT_EQ(r1, Rational(1, 2));
  EXPECT_EQ(r2, 1);
}

TEST(Session, BlindDeliveryLoads) {
  Transcript t = session(grouping_hpda({2, 2, 2}), 24, 6, 2, Mode::SecurePrivate, Delivery::MirrorBlind, 4);
  auto [r1, r2] = measure_loads(t);
  EXPECT_EQ(r1, Rational(8, 6));
  EXPECT_EQ(r2, 1);
  EXPECT_TRUE(t.all_decoded());
}

TEST(MeasureLoads, EmptyLayerOne) {
  Transcript t;
  t.F = 2;
  t.packet_len = 1;
  t.layer2.push_back({{"a", 1, SignalKind::Payload}, {"q", 5, SignalKind::Metadata}});
  auto [r1, r2] = measure_loads(t);
  EXPECT_EQ(r1, 0);
  EXPECT_EQ(r2, Rational(1, 2));
}

TEST(Transcript, DeterministicAndLogged) {
  Hpda h = hybrid_hpda(mn_pda(2, 1), mn_pda(2, 1));
  Transcript a = session(h, 4, 8, 3, Mode::SecurePrivate, Delivery::MirrorAssisted, 11);
  Transcript b = session(h, 4, 8, 3, Mode::SecurePrivate, Delivery::MirrorAssisted, 11);
  Transcript c = session(h, 4, 8, 3, Mode::SecurePrivate, Delivery::MirrorAssisted, 12);
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_NE(a.digest(), c.digest());
  std::string log = a.to_log();
  EXPECT_NE(log.find("LAYER 1 SIGNAL Q(1,1) LEN 4 KIND metadata\n"), std::string::npos);
  EXPECT_NE(log.find("LAYER 1 SIGNAL X1 LEN 2 KIND payload\n"), std::string::npos);
  EXPECT_NE(log.find("LAYER 2 SIGNAL M2.X3 LEN 2 KIND payload\n"), std::string::npos);
}

TEST(Demand, FullRankByConstruction) {
  FieldCtx f2(2);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    auto D = random_full_rank_demand(2, 2, 24, f2, rng);
    EXPECT_EQ(matrix_rank(D.rows, f2), 4u);
    auto sq = random_full_rank_demand(1, 2, 2, f2, rng);
    EXPECT_EQ(matrix_rank(sq.rows, f2), 2u);
  }
  Rng rng(0);
  EXPECT_THROW(random_full_rank_demand(2, 2, 3, f2, rng), PreconditionError);
}

TEST(Demand, UniformMatricesAreUsuallyFullRank) {
  FieldCtx f2(2);
  int full = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    std::vector<FVec> m;
    for (int u = 0; u < 4; ++u) m.push_back(random_vec(f2, 8, rng));
    full += matrix_rank(m, f2) == 4;
  }
  EXPECT_GT(full, 900);
}

TEST(FormulaVsSim, GroupingExample) {
  Rng rng(21);
  auto rep = formula_vs_sim(grouping_hpda({2, 2, 2}), thm2_perf(2, 2, 2, 24, Mode::Plain), 24, 2, Mode::Plain,
                            Delivery::MirrorAssisted, rng);
  EXPECT_TRUE(rep.all_match()) << rep.to_text();
  auto sp = formula_vs_sim(grouping_hpda({2, 2, 2}), thm2_perf(2, 2, 2, 24, Mode::SecurePrivate), 24, 3,
                           Mode::SecurePrivate, Delivery::MirrorAssisted, rng);
  EXPECT_TRUE(sp.all_match()) << sp.to_text();
}

TEST(FormulaVsSim, HybridExampleAndFullCache) {
  Rng rng(22);
  auto rep = formula_vs_sim(hybrid_hpda(mn_pda(2, 1), mn_pda(3, 1)),
                            thm3_perf(mn_pda(2, 1).params(), mn_pda(3, 1).params(), 24, Mode::Plain), 24, 2,
                            Mode::Plain, Delivery::MirrorAssisted, rng);
  EXPECT_TRUE(rep.all_match()) << rep.to_text();
  auto full = formula_vs_sim(grouping_hpda({2, 2, 4}), thm2_perf(2, 2, 4, 4, Mode::SecurePrivate), 4, 5,
                             Mode::SecurePrivate, Delivery::MirrorAssisted, rng);
  EXPECT_TRUE(full.all_match()) << full.to_text();
}

TEST(FormulaVsSim, DetectsWrongClaims) {
  Rng rng(23);
  PerfRecord wrong = thm2_perf(2, 2, 2, 24, Mode::Plain);
  wrong.R2 = 2;
  EXPECT_FALSE(formula_vs_sim(grouping_hpda({2, 2, 2}), wrong, 24, 2, Mode::Plain, Delivery::MirrorAssisted, rng)
                   .all_match());
}

TEST(Audit, SecurityOneFixedDemand) {
  AuditSpec s;
  s.hpda = hybrid_hpda(mn_pda(2, 1), mn_pda(2, 1));
  s.fixed_demand = DemandMatrix{{FVec{1, 0}, FVec{0, 1}, FVec{1, 0}, FVec{0, 1}}};
  s.target = AuditTarget::SecurityI;
  AuditReport sp = mi_audit(s);
  EXPECT_TRUE(sp.exactly_zero) << sp.to_text();
  EXPECT_EQ(sp.mi_text(), "0/1");
  s.mode = Mode::Plain;
  AuditReport plain = mi_audit(s);
  EXPECT_FALSE(plain.exactly_zero);
  EXPECT_GT(plain.mi, 0);
}

TEST(Audit, PrivacyTwoFixedDemandIsTriviallyZero) {
  AuditSpec s;
  s.hpda = hybrid_hpda(mn_pda(2, 1), mn_pda(2, 1));
  s.fixed_demand = DemandMatrix{{FVec{1, 0}, FVec{0, 1}, FVec{1, 0}, FVec{0, 1}}};
  s.target = AuditTarget::PrivacyII;
  s.T1 = {0};
  s.T2 = {0};
  EXPECT_TRUE(mi_audit(s).exactly_zero);
}

TEST(Audit, BudgetAndArguments) {
  AuditSpec s;
  s.hpda = hybrid_hpda(mn_pda(2, 1), mn_pda(2, 1));
  s.budget = 1000;
  EXPECT_THROW(mi_audit(s), PreconditionError);
  s.budget = 1ull << 26;
  s.T1 = {5};
  s.target = AuditTarget::PrivacyI;
  EXPECT_THROW(mi_audit(s), PreconditionError);
  AuditSpec plain;
  plain.hpda = s.hpda;
  plain.mode = Mode::Plain;
  EXPECT_EQ(audit_cost(plain), 4096u);
}

TEST(Audit, WorkersAgree) {
  AuditSpec s;
  s.hpda = hybrid_hpda(mn_pda(2, 1), mn_pda(2, 1));
  s.mode = Mode::Plain;
  s.target = AuditTarget::SecurityII;
  s.workers = 1;
  AuditReport a = mi_audit(s);
  s.workers = 3;
  AuditReport b = mi_audit(s);
  EXPECT_EQ(a.joint_values, b.joint_values);
  EXPECT_EQ(a.mi_text(), b.mi_text());
  EXPECT_EQ(a.mi, b.mi);
}

TEST(Properties, RandomSessionsDecodeAndMatchClosedForms) {
  Rng meta(77);
  for (int i = 0; i < 24; ++i) {
    Rng rng = meta.split(i);
    Hpda h;
    if (i % 2 == 0) {
      std::size_t K1 = 1 + rng.below(3), K2 = 1 + rng.below(3);
      std::size_t t = K2 + rng.below(K1 * K2 - K2 + 1);
      h = grouping_hpda({K1, K2, t});
    } else {
      std::size_t K1 = 1 + rng.below(3), K2 = 1 + rng.below(3);
      h = hybrid_hpda(mn_pda(K1, 1 + rng.below(K1)), mn_pda(K2, 1 + rng.below(K2)));
    }
    const std::uint32_t qs[] = {2, 3, 5};
    Mode mode = i % 4 < 2 ? Mode::Plain : Mode::SecurePrivate;
    Delivery del = (i / 4) % 2 ? Delivery::MirrorBlind : Delivery::MirrorAssisted;
    std::size_t N = h.params.K1 * h.params.K2 + rng.below(3);
    auto rep = formula_vs_sim(h, std::nullopt, N, qs[i % 3], mode, del, rng);
    EXPECT_TRUE(rep.all_match()) << to_text(h) << rep.to_text();
  }
}
