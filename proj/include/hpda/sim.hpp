#pragma once

#include <hpda/analysis.hpp>
#include <hpda/error.hpp>
#include <hpda/field.hpp>
#include <hpda/hpda.hpp>
#include <hpda/rational.hpp>
#include <hpda/scheme.hpp>

#include <algorithm>
#include <cstring>
#include <exception>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hpda {

enum class SignalKind { Payload, Metadata };

struct Emission {
  std::string id;
  std::size_t len = 0;  // symbols
  SignalKind kind = SignalKind::Payload;
};

struct UserOutcome {
  bool ok = false;
  std::uint64_t digest = 0;
};

struct Transcript {
  std::size_t F = 0;
  std::size_t packet_len = 0;
  std::vector<Emission> layer1;
  std::vector<std::vector<Emission>> layer2;  // per mirror
  std::vector<UserOutcome> decoded;           // per user k1*K2 + k2
  MemoryUse memory;

  bool all_decoded() const {
    return std::all_of(decoded.begin(), decoded.end(), [](const auto& u) { return u.ok; });
  }

  std::string to_log() const {
    std::ostringstream os;
    auto line = [&os](int layer, const Emission& e) {
      os << "LAYER " << layer << " SIGNAL " << e.id << " LEN " << e.len << " KIND "
         << (e.kind == SignalKind::Payload ? "payload" : "metadata") << '\n';
    };
    for (const auto& e : layer1) line(1, e);
    for (const auto& l : layer2)
      for (const auto& e : l) line(2, e);
    return os.str();
  }

  std::uint64_t digest() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 1099511628211ULL;
      }
    };
    for (char c : to_log()) mix(static_cast<unsigned char>(c));
    for (const auto& u : decoded) {
      mix(u.ok);
      mix(u.digest);
    }
    return h;
  }
};

inline std::uint64_t fnv1a(const std::vector<FVec>& packets) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& p : packets)
    for (Elem e : p)
      for (int i = 0; i < 4; ++i) {
        h ^= (e >> (8 * i)) & 0xff;
        h *= 1099511628211ULL;
      }
  return h;
}

// Everything produced before decoding.
struct SessionState {
  CacheSet caches;
  std::vector<FVec> Q;
  CoefficientView coeffs;
  SignalMap server;
  std::vector<SignalMap> mirror;
};

inline SessionState deliver(const SchemeInstance& inst, const Library& lib, const Randomness& rand,
                         const DemandMatrix& D) {
  require(D.rows.size() == inst.users(), "demand matrix needs one row per user");
  for (const auto& r : D.rows) require(r.size() == inst.N && inst.field.contains(r), "bad demand row");
  SessionState d;
  d.caches = place(inst, lib, rand);
  if (inst.secure()) d.Q = gen_public_vectors(inst, rand, D);
  d.coeffs = signal_coefficients(inst, D, d.Q);
  d.server = server_signals(inst, lib, rand, d.coeffs);
  for (std::size_t k1 = 0; k1 < inst.K1(); ++k1) {
    d.mirror.push_back(mirror_signals(inst, k1, d.caches.mirrors[k1], mirror_view(inst, k1, d.coeffs),
                                      d.server));
  }
  return d;
}

inline std::string user_tag(std::size_t k1, std::size_t k2) {
  return "(" + std::to_string(k1 + 1) + "," + std::to_string(k2 + 1) + ")";
}

inline Transcript run_session(const SchemeInstance& inst, const Library& lib, const Randomness& rand,
                              const DemandMatrix& D) {
  SessionState d = deliver(inst, lib, rand, D);
  Transcript t;
  t.F = inst.F();
  t.packet_len = inst.packet_len();
  t.memory = measure_memory(inst, d.caches);
  std::vector<Emission> meta;
  for (std::size_t k1 = 0; k1 < inst.K1(); ++k1)
    for (std::size_t k2 = 0; k2 < inst.K2(); ++k2)
      if (inst.secure()) meta.push_back({"Q" + user_tag(k1, k2), inst.N, SignalKind::Metadata});
  t.layer1 = meta;
  for (const auto& [s, x] : d.server) t.layer1.push_back({"X" + std::to_string(s), x.size(), SignalKind::Payload});
  for (std::size_t k1 = 0; k1 < inst.K1(); ++k1) {
    std::vector<Emission> l = meta;
    for (const auto& [s, x] : d.mirror[k1])
      l.push_back({"M" + std::to_string(k1 + 1) + ".X" + std::to_string(s), x.size(), SignalKind::Payload});
    t.layer2.push_back(std::move(l));
  }
  for (std::size_t k1 = 0; k1 < inst.K1(); ++k1) {
    for (std::size_t k2 = 0; k2 < inst.K2(); ++k2) {
      const std::size_t u = inst.user(k1, k2);
      CoefficientView view = d.coeffs;
      auto got = decode_user(inst, k1, k2, d.caches.users[u], d.mirror[k1], view, D.rows[u]);
      bool ok = true;
      for (std::size_t j = 0; j < inst.F(); ++j)
        ok = ok && got[j] == lin_comb(inst.field, D.rows[u], lib, j);
      t.decoded.push_back({ok, fnv1a(got)});
    }
  }
  return t;
}

inline std::pair<Rational, Rational> measure_loads(const Transcript& t) {
  require(t.F >= 1 && t.packet_len >= 1, "transcript lacks packet geometry");
  const std::size_t B = t.F * t.packet_len;
  auto payload = [](const std::vector<Emission>& es) {
    std::size_t s = 0;
    for (const auto& e : es)
      if (e.kind == SignalKind::Payload) s += e.len;
    return s;
  };
  Rational r1(payload(t.layer1), B);
  Rational r2 = 0;
  for (const auto& l : t.layer2) r2 = std::max(r2, Rational(payload(l), B));
  return {r1, r2};
}

inline DemandMatrix random_full_rank_demand(std::size_t K1, std::size_t K2, std::size_t N,
                                            const FieldCtx& ctx, Rng& rng) {
  const std::size_t users = K1 * K2;
  require(users >= 1 && N >= users, "full-rank demand needs N >= K1*K2");
  while (true) {
    DemandMatrix D;
    for (std::size_t u = 0; u < users; ++u) D.rows.push_back(random_vec(ctx, N, rng));
    if (matrix_rank(D.rows, ctx) == users) return D;
  }
}

// Closed forms for an arbitrary HPDA, plain or secure-private.
struct SchemeExpectation {
  Rational m1_ratio, m2_ratio, R1, R2;
};

inline SchemeExpectation expected_performance(const Hpda& h, std::size_t N, Mode mode, Delivery delivery) {
  const auto st = hpda_stats(h);
  const auto& p = h.params;
  SchemeExpectation e;
  std::size_t cap = *std::max_element(st.s_m_cap_s_k.begin(), st.s_m_cap_s_k.end());
  e.m1_ratio = Rational(p.Z1, p.F);
  e.m2_ratio = Rational(p.Z2, p.F);
  if (mode == Mode::SecurePrivate) {
    e.m1_ratio += Rational(cap, N * p.F);
    e.m2_ratio += Rational(p.F - p.Z2, N * p.F);
  }
  std::size_t sent = st.union_s_k - (delivery == Delivery::MirrorAssisted ? st.s_m : 0);
  e.R1 = Rational(sent, p.F);
  e.R2 = Rational(*std::max_element(st.s_k.begin(), st.s_k.end()), p.F);
  return e;
}

struct FormulaCheck {
  std::string quantity;
  Rational measured, expected;
  bool ok() const { return measured == expected; }
};

struct FormulaReport {
  std::vector<FormulaCheck> checks;
  bool decoded = false;
  bool all_match() const {
    return decoded && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.ok(); });
  }
  std::string to_text() const {
    std::ostringstream os;
    os << "decode=" << (decoded ? "OK" : "FAIL") << '\n';
    for (const auto& c : checks)
      os << c.quantity << " measured=" << to_string(c.measured) << " expected=" << to_string(c.expected)
         << (c.ok() ? " ok" : " MISMATCH") << '\n';
    return os.str();
  }
};

// Runs one session and compares the measurements with the HPDA closed forms
// and, when given, with a construction-level record (grouping or hybrid).
inline FormulaReport formula_vs_sim(const Hpda& h, const std::optional<PerfRecord>& claim, std::size_t N,
                                    std::uint32_t q, Mode mode, Delivery delivery, Rng& rng,
                                    std::optional<DemandMatrix> demand = std::nullopt) {
  const std::size_t F = h.params.F;
  SchemeInstance inst = SchemeInstance::make(h, N, F, q, mode, delivery);
  Library lib = random_library(inst, rng);
  Randomness rand = draw_randomness(inst, rng);
  DemandMatrix D = demand ? *demand : random_full_rank_demand(inst.K1(), inst.K2(), N, inst.field, rng);
  Transcript t = run_session(inst, lib, rand, D);
  auto [r1, r2] = measure_loads(t);
  SchemeExpectation e = expected_performance(h, N, mode, delivery);
  FormulaReport rep;
  rep.decoded = t.all_decoded();
  rep.checks.push_back({"M1/N", t.memory.m1_ratio, e.m1_ratio});
  rep.checks.push_back({"M2/N", t.memory.m2_ratio, e.m2_ratio});
  rep.checks.push_back({"R1", r1, e.R1});
  rep.checks.push_back({"R2", r2, e.R2});
  if (claim) {
    rep.checks.push_back({"F(construction)", Rational(F), Rational(claim->F)});
    rep.checks.push_back({"M1/N(construction)", t.memory.m1_ratio, claim->m1_ratio});
    rep.checks.push_back({"M2/N(construction)", t.memory.m2_ratio, claim->m2_ratio});
    if (delivery == Delivery::MirrorAssisted) rep.checks.push_back({"R1(construction)", r1, claim->R1});
    rep.checks.push_back({"R2(construction)", r2, claim->R2});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Exhaustive mutual-information audits

enum class AuditTarget { SecurityI, SecurityII, PrivacyI, PrivacyII };

inline const char* to_string(AuditTarget t) {
  switch (t) {
    case AuditTarget::SecurityI: return "security1";
    case AuditTarget::SecurityII: return "security2";
    case AuditTarget::PrivacyI: return "privacy1";
    case AuditTarget::PrivacyII: return "privacy2";
  }
  return "?";
}

struct AuditSpec {
  Hpda hpda;
  std::uint32_t q = 2;
  std::size_t N = 2;
  Mode mode = Mode::SecurePrivate;
  Delivery delivery = Delivery::MirrorAssisted;
  AuditTarget target = AuditTarget::SecurityI;
  std::set<std::size_t> T1;  // 0-based mirrors
  std::set<std::size_t> T2;  // 0-based user positions
  std::optional<std::size_t> link;  // SecurityII: observe one mirror link only
  std::optional<DemandMatrix> fixed_demand;  // else every single-file assignment
  std::uint64_t budget = std::uint64_t{1} << 26;
  unsigned workers = 0;  // 0: hardware concurrency
};

struct AuditReport {
  AuditTarget target = AuditTarget::SecurityI;
  Mode mode = Mode::SecurePrivate;
  std::string demand_model;
  std::uint64_t states = 0;
  std::size_t secret_values = 0, observation_values = 0, joint_values = 0;
  bool exactly_zero = false;
  double mi = 0;  // in units of log q

  // "0/1" when independence holds exactly; otherwise a decimal in log-q units.
  std::string mi_text() const {
    if (exactly_zero) return "0/1";
    std::ostringstream os;
    os.precision(12);
    os << mi;
    return os.str();
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "target=" << to_string(target) << '\n'
       << "mode=" << to_string(mode) << '\n'
       << "demand_model=" << demand_model << '\n'
       << "states=" << states << '\n'
       << "secret_values=" << secret_values << '\n'
       << "observation_values=" << observation_values << '\n'
       << "joint_values=" << joint_values << '\n'
       << "MI=" << mi_text() << '\n';
    return os.str();
  }
};

namespace detail {

struct Histogram {
  std::unordered_map<std::string, std::uint64_t> joint, secret, obs;

  void merge(const Histogram& o) {
    for (const auto& [k, v] : o.joint) joint[k] += v;
    for (const auto& [k, v] : o.secret) secret[k] += v;
    for (const auto& [k, v] : o.obs) obs[k] += v;
  }
};

inline void put(std::string& key, const FVec& v) {
  for (Elem e : v) key.push_back(static_cast<char>(e));
}

inline void put(std::string& key, const SignalMap& m) {
  for (const auto& [s, x] : m) put(key, x);
}

inline void put_column(std::string& key, const std::vector<std::optional<PacketColumn>>& pk) {
  for (const auto& c : pk) {
    key.push_back(c ? 1 : 0);
    if (c)
      for (const auto& p : *c) put(key, p);
  }
}

}  // namespace detail

inline std::uint64_t audit_cost(const AuditSpec& s) {
  const auto& p = s.hpda.params;
  const std::size_t users = p.K1 * p.K2;
  std::size_t q_digits = s.N * p.F;
  if (s.mode == Mode::SecurePrivate) q_digits += union_of(s.hpda.s_k).size() + users * (s.N - 1);
  long double cost = std::pow(static_cast<long double>(s.q), static_cast<long double>(q_digits));
  if (!s.fixed_demand) cost *= std::pow(static_cast<long double>(s.N), static_cast<long double>(users));
  return cost > 1.8e19L ? UINT64_MAX : static_cast<std::uint64_t>(cost);
}

inline AuditReport mi_audit(const AuditSpec& spec) {
  const auto& p = spec.hpda.params;
  const std::size_t users = p.K1 * p.K2;
  const std::size_t F = p.F;
  require(spec.q <= 251, "audits encode symbols in one byte; q must be below 252");
  require(spec.N >= 1, "audits need N >= 1");
  for (std::size_t k1 : spec.T1) require(k1 < p.K1, "T1 names a mirror that does not exist");
  for (std::size_t k2 : spec.T2) require(k2 < p.K2, "T2 names a user position that does not exist");
  if (spec.link) require(*spec.link < p.K1, "link names a mirror that does not exist");
  const std::uint64_t total = audit_cost(spec);
  require(total <= spec.budget, "audit state space " + std::to_string(total) + " exceeds budget " +
                                    std::to_string(spec.budget));

  const SchemeInstance inst =
      SchemeInstance::make(spec.hpda, spec.N, F, spec.q, spec.mode, spec.delivery, false);
  const bool sp = inst.secure();
  const std::vector<Entry> labels = [&] {
    auto u = union_of(spec.hpda.s_k);
    return std::vector<Entry>(u.begin(), u.end());
  }();
  if (spec.fixed_demand) require(spec.fixed_demand->rows.size() == users, "fixed demand has wrong shape");

  auto in_T1 = [&](std::size_t k1) { return spec.T1.count(k1) > 0; };
  auto colluding = [&](std::size_t k1, std::size_t k2) { return in_T1(k1) && spec.T2.count(k2) > 0; };

  auto run_range = [&](std::uint64_t lo, std::uint64_t hi, detail::Histogram& hist) {
    std::string secret, obs, joint;
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      std::uint64_t x = idx;
      auto digit = [&x](std::uint64_t radix) {
        auto d = x % radix;
        x /= radix;
        return static_cast<Elem>(d);
      };
      Library lib{{}, F};
      for (std::size_t n = 0; n < spec.N; ++n) {
        FVec f(F);
        for (std::size_t j = 0; j < F; ++j) f[j] = digit(spec.q);
        lib.files.push_back(std::move(f));
      }
      Randomness rand;
      if (sp) {
        for (Entry s : labels) rand.security[s] = FVec{digit(spec.q)};
        for (std::size_t u = 0; u < users; ++u) {
          FVec pv(spec.N);
          Elem sum = 0;
          for (std::size_t n = 0; n + 1 < spec.N; ++n) {
            pv[n] = digit(spec.q);
            sum = inst.field.add(sum, pv[n]);
          }
          pv[spec.N - 1] = inst.field.sub(spec.q - 1, sum);
          rand.privacy.push_back(std::move(pv));
        }
      }
      DemandMatrix D;
      if (spec.fixed_demand) {
        D = *spec.fixed_demand;
      } else {
        for (std::size_t u = 0; u < users; ++u) {
          FVec d(spec.N);
          d[digit(spec.N)] = 1;
          D.rows.push_back(std::move(d));
        }
      }
      SessionState dl = deliver(inst, lib, rand, D);

      secret.clear();
      obs.clear();
      auto put_Q = [&] {
        for (const auto& qv : dl.Q) detail::put(obs, qv);
      };
      auto put_W = [&](std::string& k) {
        for (const auto& f : lib.files) detail::put(k, f);
      };
      switch (spec.target) {
        case AuditTarget::SecurityI:
          for (const auto& r : D.rows) detail::put(secret, r);
          put_W(secret);
          put_Q();
          detail::put(obs, dl.server);
          break;
        case AuditTarget::SecurityII:
          for (const auto& r : D.rows) detail::put(secret, r);
          put_W(secret);
          put_Q();
          for (std::size_t k1 = 0; k1 < p.K1; ++k1)
            if (!spec.link || *spec.link == k1) detail::put(obs, dl.mirror[k1]);
          break;
        case AuditTarget::PrivacyI:
          for (std::size_t k1 = 0; k1 < p.K1; ++k1)
            for (std::size_t k2 = 0; k2 < p.K2; ++k2)
              detail::put(in_T1(k1) ? obs : secret, D.rows[inst.user(k1, k2)]);
          put_Q();
          detail::put(obs, dl.server);
          for (std::size_t k1 : spec.T1) {
            detail::put_column(obs, dl.caches.mirrors[k1].packets);
            for (const auto& [s, v] : dl.caches.mirrors[k1].keys) detail::put(obs, v);
          }
          put_W(obs);
          break;
        case AuditTarget::PrivacyII:
          for (std::size_t k1 = 0; k1 < p.K1; ++k1)
            for (std::size_t k2 = 0; k2 < p.K2; ++k2)
              detail::put(colluding(k1, k2) ? obs : secret, D.rows[inst.user(k1, k2)]);
          put_Q();
          for (std::size_t k1 : spec.T1) detail::put(obs, dl.mirror[k1]);
          for (std::size_t k1 : spec.T1) {
            for (std::size_t k2 : spec.T2) {
              const auto& uc = dl.caches.users[inst.user(k1, k2)];
              detail::put_column(obs, uc.packets);
              for (const auto& [j, rec] : uc.coded) detail::put(obs, rec.value);
            }
          }
          put_W(obs);
          break;
      }
      joint.clear();
      const auto n = static_cast<std::uint32_t>(secret.size());
      joint.append(reinterpret_cast<const char*>(&n), sizeof n);
      joint += secret;
      joint += obs;
      ++hist.joint[joint];
      ++hist.secret[secret];
      ++hist.obs[obs];
    }
  };

  unsigned workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, total));
  std::vector<detail::Histogram> hists(workers);
  if (workers <= 1) {
    run_range(0, total, hists[0]);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    for (unsigned w = 0; w < workers; ++w) {
      std::uint64_t lo = total * w / workers, hi = total * (w + 1) / workers;
      pool.emplace_back([&, w, lo, hi] {
        try {
          run_range(lo, hi, hists[w]);
        } catch (...) {
          errs[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }
  detail::Histogram h = std::move(hists[0]);
  for (unsigned w = 1; w < workers; ++w) h.merge(hists[w]);

  AuditReport rep;
  rep.target = spec.target;
  rep.mode = spec.mode;
  rep.demand_model = spec.fixed_demand ? "fixed" : "all single-file assignments";
  rep.states = total;
  rep.secret_values = h.secret.size();
  rep.observation_values = h.obs.size();
  rep.joint_values = h.joint.size();
  bool indep = h.joint.size() == h.secret.size() * h.obs.size();
  double mi = 0;
  const double T = static_cast<double>(total);
  std::vector<std::pair<std::string_view, std::uint64_t>> cells(h.joint.begin(), h.joint.end());
  std::sort(cells.begin(), cells.end());
  for (const auto& [k, c] : cells) {
    std::uint32_t n;
    std::memcpy(&n, k.data(), sizeof n);
    const std::uint64_t cx = h.secret.at(std::string(k.substr(sizeof n, n)));
    const std::uint64_t cy = h.obs.at(std::string(k.substr(sizeof n + n)));
    if (static_cast<unsigned __int128>(c) * total != static_cast<unsigned __int128>(cx) * cy) indep = false;
    mi += static_cast<double>(c) / T * std::log(static_cast<double>(c) * T / (static_cast<double>(cx) * cy));
  }
  rep.exactly_zero = indep;
  rep.mi = indep ? 0 : mi / std::log(static_cast<double>(spec.q));
  return rep;
}

}  // namespace hpda
