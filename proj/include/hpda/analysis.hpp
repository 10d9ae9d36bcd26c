#pragma once

#include <hpda/error.hpp>
#include <hpda/mode.hpp>
#include <hpda/pda.hpp>
#include <hpda/rational.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace hpda {

// Load of the single-layer MN scheme at memory ratio mu.
// ClosedForm evaluates K(1-mu)/(1+K mu) at every mu; MemorySharing
// interpolates linearly between the lattice points mu = t/K.
enum class RcModel { ClosedForm, MemorySharing };

inline Rational rc(const Rational& mu, std::size_t K, RcModel model = RcModel::ClosedForm) {
  require(mu >= 0 && mu <= 1, "rc needs a memory ratio in [0,1]");
  require(K >= 1, "rc needs K >= 1");
  auto lattice = [K](std::size_t t) { return Rational(K - t, t + 1); };
  if (model == RcModel::ClosedForm) return Rational(K) * (1 - mu) / (1 + K * mu);
  Rational x = mu * K;
  BigInt lo_big = boost::multiprecision::numerator(x) / boost::multiprecision::denominator(x);
  auto lo = static_cast<std::size_t>(lo_big);
  if (lo >= K) return 0;
  Rational frac = x - lo;
  return lattice(lo) + frac * (lattice(lo + 1) - lattice(lo));
}

struct SystemParams {
  std::size_t K1 = 0, K2 = 0;
  Rational M1, M2, N;
};

struct SplitParams {
  Rational alpha, beta;
};

enum class Baseline { KNMD, WWCY };

inline const char* to_string(Baseline b) { return b == Baseline::KNMD ? "knmd" : "wwcy"; }

struct LoadPair {
  Rational R1, R2;
};

class InfeasibleSplit : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

namespace detail {

inline Rational ratio_arg(const Rational& mem, const Rational& share, const Rational& N) {
  Rational r = mem / (share * N);
  if (r < 0 || r > 1) throw InfeasibleSplit("induced memory ratio outside [0,1]");
  return r;
}

inline LoadPair baseline_loads(Baseline which, const SystemParams& p, const SplitParams& s,
                               RcModel model) {
  require(p.N > 0 && p.M1 >= 0 && p.M2 >= 0 && p.M1 <= p.N && p.M2 <= p.N,
          "memories must lie in [0, N]");
  const Rational& a = s.alpha;
  const Rational& b = s.beta;
  require(a >= 0 && a <= 1 && b >= 0 && b <= 1, "alpha and beta must lie in [0,1]");
  const std::size_t K = p.K1 * p.K2;
  LoadPair out{0, 0};
  if (a > 0) {
    Rational mu1 = ratio_arg(p.M1, a, p.N);
    Rational mu2 = ratio_arg(b * p.M2, a, p.N);
    Rational r2 = rc(mu2, p.K2, model);
    Rational r1 = which == Baseline::KNMD ? Rational(p.K2) * rc(mu1, p.K1, model)
                                          : rc(mu1, p.K1, model) * r2;
    out.R1 += a * r1;
    out.R2 += a * r2;
  }
  if (a < 1) {
    Rational mu = ratio_arg((1 - b) * p.M2, 1 - a, p.N);
    out.R1 += (1 - a) * rc(mu, K, model);
    out.R2 += (1 - a) * rc(mu, p.K2, model);
  }
  return out;
}

}  // namespace detail

inline LoadPair knmd_loads(const SystemParams& p, const SplitParams& s,
                           RcModel model = RcModel::ClosedForm) {
  return detail::baseline_loads(Baseline::KNMD, p, s, model);
}

inline LoadPair wwcy_loads(const SystemParams& p, const SplitParams& s,
                           RcModel model = RcModel::ClosedForm) {
  return detail::baseline_loads(Baseline::WWCY, p, s, model);
}

enum class Objective { R1, R2 };

struct BaselineOptimum {
  SplitParams split;
  LoadPair loads;
  std::size_t feasible_points = 0;
  std::vector<std::pair<SplitParams, LoadPair>> pareto;  // filled on request
};

// Grid search over alpha, beta in {0, 1/(n-1), ..., 1}. Ties keep the
// smaller alpha, then the smaller beta.
inline BaselineOptimum optimize_baseline(Baseline which, const SystemParams& p, Objective obj,
                                         std::size_t grid = 201, RcModel model = RcModel::ClosedForm,
                                         bool want_pareto = false) {
  require(grid >= 100, "grid resolution must be at least 100 points per axis");
  BaselineOptimum best;
  bool found = false;
  std::vector<std::pair<SplitParams, LoadPair>> all;
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      SplitParams s{Rational(i, grid - 1), Rational(j, grid - 1)};
      LoadPair lp;
      try {
        lp = detail::baseline_loads(which, p, s, model);
      } catch (const InfeasibleSplit&) {
        continue;
      }
      ++best.feasible_points;
      const Rational& v = obj == Objective::R1 ? lp.R1 : lp.R2;
      const Rational& cur = obj == Objective::R1 ? best.loads.R1 : best.loads.R2;
      if (!found || v < cur) {
        best.split = s;
        best.loads = lp;
        found = true;
      }
      if (want_pareto) all.emplace_back(s, lp);
    }
  }
  if (!found) throw InfeasibleSplit("no feasible (alpha, beta) on the grid");
  if (want_pareto) {
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
      if (x.second.R1 != y.second.R1) return x.second.R1 < y.second.R1;
      return x.second.R2 < y.second.R2;
    });
    for (const auto& e : all)
      if (best.pareto.empty() || e.second.R2 < best.pareto.back().second.R2) best.pareto.push_back(e);
  }
  return best;
}

struct PerfRecord {
  std::string scheme;
  Mode mode = Mode::Plain;
  std::string params;  // t, or the constituent PDA parameters
  Rational m1_ratio, m2_ratio;
  BigInt F;
  Rational R1, R2;

  double log10F() const { return log10_big(F); }
};

inline Rational lower_bound_r1(std::size_t K1, std::size_t K2, std::size_t t) {
  const std::size_t K = K1 * K2;
  require(t <= K, "lower bound needs t <= K1*K2");
  return Rational(K - t, t + 1);
}

inline PerfRecord thm2_perf(std::size_t K1, std::size_t K2, std::size_t t, const Rational& N,
                            Mode mode) {
  const std::size_t K = K1 * K2;
  require(K1 >= 1 && K2 >= 1 && K2 <= t && t <= K, "grouping needs K2 <= t <= K1*K2");
  require(N > 0, "N must be positive");
  const BigInt F = binom(K, t);
  const BigInt Z1 = binom(K - K2, t - K2);
  const BigInt Z2 = binom(K - 1, t - 1) - Z1;
  PerfRecord r;
  r.scheme = "thm2";
  r.mode = mode;
  r.params = "t=" + std::to_string(t);
  r.F = F;
  r.m1_ratio = Rational(Z1, F);
  r.m2_ratio = Rational(t, K) - Rational(Z1, F);
  if (mode == Mode::SecurePrivate) {
    r.m1_ratio += Rational(BigInt(K2) * Z1, F) / N;
    r.m2_ratio += Rational(F - Z2, F) / N;
  }
  r.R1 = Rational(K - t, t + 1);
  r.R2 = r.R1 - Rational(binom(K - K2, t + 1), F) + Rational(BigInt(K2) * Z1, F);
  return r;
}

inline PerfRecord thm3_perf(const PdaParams& b, const PdaParams& c, const Rational& N, Mode mode) {
  require(b.F >= 1 && c.F >= 1 && b.Z <= b.F && c.Z <= c.F, "invalid PDA parameters");
  require(N > 0, "N must be positive");
  PerfRecord r;
  r.scheme = "thm3";
  r.mode = mode;
  std::ostringstream os;
  os << "B=(" << b.K << "," << b.F << "," << b.Z << "," << b.S << ") C=(" << c.K << "," << c.F << ","
     << c.Z << "," << c.S << ")";
  r.params = os.str();
  const BigInt F = BigInt(b.F) * c.F;
  r.F = F;
  r.m1_ratio = Rational(b.Z, b.F);
  r.m2_ratio = Rational(c.Z, c.F);
  if (mode == Mode::SecurePrivate) {
    r.m1_ratio += Rational(BigInt(b.Z) * c.S, F) / N;
    r.m2_ratio += Rational(c.F - c.Z, c.F) / N;
  }
  r.R1 = Rational(BigInt(b.S) * c.S, F);
  r.R2 = Rational(c.S, c.F);
  return r;
}

// A single-layer operating point available to memory sharing.
struct LatticePoint {
  Rational ratio, load;
  BigInt F;
  std::string label;
};

inline std::vector<LatticePoint> mn_family(std::size_t K) {
  std::vector<LatticePoint> out;
  for (std::size_t t = 0; t <= K; ++t)
    out.push_back({Rational(t, K), Rational(K - t, t + 1), binom(K, t),
                   "mn:" + std::to_string(K) + "," + std::to_string(t)});
  return out;
}

namespace detail {

inline std::vector<LatticePoint> lower_hull(std::vector<LatticePoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    if (a.ratio != b.ratio) return a.ratio < b.ratio;
    if (a.load != b.load) return a.load < b.load;
    return a.F < b.F;
  });
  std::vector<LatticePoint> hull;
  for (auto& p : pts) {
    if (!hull.empty() && hull.back().ratio == p.ratio) continue;
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      // drop b if it lies on or above segment a-p
      if ((b.load - a.load) * (p.ratio - a.ratio) >= (p.load - a.load) * (b.ratio - a.ratio))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(std::move(p));
  }
  return hull;
}

}  // namespace detail

// Partition family on K users: every (qp, m) with (m+1) qp = K, plus the
// trivial no-cache and full-cache arrays. Lower convex hull only.
inline std::vector<LatticePoint> partition_family(std::size_t K) {
  std::vector<LatticePoint> pts;
  pts.push_back({0, Rational(K), 1, "trivial:0"});
  pts.push_back({1, 0, 1, "trivial:1"});
  for (std::size_t qp = 2; qp <= K; ++qp) {
    if (K % qp != 0 || K / qp < 2) continue;
    const std::size_t m = K / qp - 1;
    BigInt F = 1;
    for (std::size_t i = 0; i < m; ++i) F *= qp;
    pts.push_back({Rational(1, qp), Rational(qp - 1), F,
                   "partition:" + std::to_string(qp) + "," + std::to_string(m)});
  }
  return detail::lower_hull(std::move(pts));
}

struct SharedPoint {
  Rational load;
  std::vector<std::pair<LatticePoint, Rational>> parts;  // point, weight
};

inline SharedPoint share(const std::vector<LatticePoint>& family, const Rational& ratio) {
  require(!family.empty(), "empty family");
  require(ratio >= family.front().ratio && ratio <= family.back().ratio,
          "memory ratio outside the family's range");
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (family[i].ratio == ratio) return {family[i].load, {{family[i], 1}}};
    if (family[i].ratio > ratio) {
      const auto& lo = family[i - 1];
      const auto& hi = family[i];
      Rational w = (hi.ratio - ratio) / (hi.ratio - lo.ratio);
      return {w * lo.load + (1 - w) * hi.load, {{lo, w}, {hi, 1 - w}}};
    }
  }
  throw PreconditionError("memory ratio outside the family's range");
}

// Two-layer memory sharing of outer x inner operating points.
inline PerfRecord two_layer_shared(const std::string& scheme, const std::vector<LatticePoint>& outer,
                                   const std::vector<LatticePoint>& inner, const Rational& m1,
                                   const Rational& m2) {
  SharedPoint a = share(outer, m1);
  SharedPoint b = share(inner, m2);
  PerfRecord r;
  r.scheme = scheme;
  r.mode = Mode::Plain;
  r.m1_ratio = m1;
  r.m2_ratio = m2;
  r.R1 = a.load * b.load;
  r.R2 = b.load;
  r.F = 0;
  std::string labels;
  for (const auto& [pa, wa] : a.parts) {
    for (const auto& [pb, wb] : b.parts) {
      r.F += pa.F * pb.F;
      labels += (labels.empty() ? "" : "+") + pa.label + "x" + pb.label;
    }
  }
  r.params = labels;
  return r;
}

// Grouping parameter whose plain mirror memory ratio is nearest each target.
inline std::vector<std::size_t> fig5_points(std::size_t K1, std::size_t K2,
                                            const std::vector<Rational>& targets) {
  std::vector<std::size_t> ts;
  const std::size_t K = K1 * K2;
  std::vector<Rational> ratios;
  for (std::size_t t = K2; t <= K; ++t) ratios.push_back(Rational(binom(K - K2, t - K2), binom(K, t)));
  for (const auto& target : targets) {
    std::size_t best = K2;
    Rational gap = -1;
    for (std::size_t t = K2; t <= K; ++t) {
      Rational d = ratios[t - K2] - target;
      if (d < 0) d = -d;
      if (gap < 0 || d < gap) {
        gap = d;
        best = t;
      }
    }
    ts.push_back(best);
  }
  return ts;
}

// One row per scheme per grouping parameter t. Baselines and the hybrid
// schemes are evaluated at the grouping scheme's plain memory ratios.
inline std::vector<PerfRecord> sweep_compare(std::size_t K1, std::size_t K2, const Rational& N,
                                             const std::vector<std::size_t>& ts) {
  std::vector<PerfRecord> rows;
  const auto mn1 = mn_family(K1), mn2 = mn_family(K2);
  const auto pt1 = partition_family(K1), pt2 = partition_family(K2);
  for (std::size_t t : ts) {
    PerfRecord g = thm2_perf(K1, K2, t, N, Mode::Plain);
    const Rational m1 = g.m1_ratio, m2 = g.m2_ratio;
    rows.push_back(g);

    PerfRecord w = two_layer_shared("wwcy", mn1, mn2, m1, m2);
    w.R1 = rc(m1, K1) * rc(m2, K2);
    w.R2 = rc(m2, K2);
    rows.push_back(w);

    PerfRecord k = w;
    k.scheme = "knmd";
    k.R1 = Rational(K2) * rc(m1, K1);
    rows.push_back(k);

    rows.push_back(two_layer_shared("scheme1", pt1, mn2, m1, m2));
    rows.push_back(two_layer_shared("scheme2", pt1, pt2, m1, m2));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const PerfRecord& a, const PerfRecord& b) {
    if (a.scheme != b.scheme) return a.scheme < b.scheme;
    return a.m1_ratio < b.m1_ratio;
  });
  return rows;
}

inline std::string format_decimal(const Rational& r, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, to_double(r));
  return buf;
}

inline std::string format_F(const BigInt& F) {
  std::string s = F.str();
  if (s.size() <= 15) return s;
  char buf[64];
  std::snprintf(buf, sizeof buf, "log10:%.6f", log10_big(F));
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string to_csv(const std::vector<PerfRecord>& rows, std::size_t K1, std::size_t K2,
                          const Rational& N) {
  std::ostringstream os;
  os << "scheme,mode,K1,K2,N,t_or_params,m1_ratio,m2_ratio,F_or_log10F,R1,R2\n";
  for (const auto& r : rows) {
    os << r.scheme << ',' << to_string(r.mode) << ',' << K1 << ',' << K2 << ',' << to_short_string(N)
       << ',' << csv_field(r.params) << ',' << format_decimal(r.m1_ratio) << ',' << format_decimal(r.m2_ratio)
       << ',' << format_F(r.F) << ',' << format_decimal(r.R1) << ',' << format_decimal(r.R2) << '\n';
  }
  return os.str();
}

}  // namespace hpda
