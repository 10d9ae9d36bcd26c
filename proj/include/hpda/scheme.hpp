#pragma once

#include <hpda/error.hpp>
#include <hpda/field.hpp>
#include <hpda/hpda.hpp>
#include <hpda/mode.hpp>
#include <hpda/rational.hpp>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hpda {

enum class Delivery { MirrorAssisted, MirrorBlind };

inline const char* to_string(Delivery d) {
  return d == Delivery::MirrorAssisted ? "assisted" : "blind";
}

struct CellRef {
  std::size_t k1, j, k2;
};

struct SchemeInstance {
  Hpda hpda;
  std::size_t N = 0;
  std::size_t B = 0;
  FieldCtx field{2};
  Mode mode = Mode::Plain;
  Delivery delivery = Delivery::MirrorAssisted;
  std::map<Entry, std::vector<CellRef>> cells;  // label -> occurrences

  // Validates the HPDA and the divisibility constraint. N >= K1*K2 is the
  // worst-case requirement; tiny audit instances switch it off.
  static SchemeInstance make(Hpda h, std::size_t N, std::size_t B, std::uint32_t q, Mode mode,
                             Delivery delivery, bool need_full_rank = true) {
    require(verify_hpda(h).ok(), "scheme needs a valid HPDA");
    const auto& p = h.params;
    require(N >= 1, "need at least one file");
    require(B >= 1 && B % p.F == 0, "file length B must be a positive multiple of F");
    require(!need_full_rank || N >= p.K1 * p.K2, "N must be at least K1*K2");
    SchemeInstance inst{std::move(h), N, B, FieldCtx(q), mode, delivery, {}};
    for (std::size_t k1 = 0; k1 < inst.hpda.params.K1; ++k1)
      for (std::size_t j = 0; j < inst.hpda.params.F; ++j)
        for (std::size_t k2 = 0; k2 < inst.hpda.params.K2; ++k2)
          if (Entry e = inst.hpda.sub[k1](j, k2); !is_star(e)) inst.cells[e].push_back({k1, j, k2});
    return inst;
  }

  std::size_t K1() const { return hpda.params.K1; }
  std::size_t K2() const { return hpda.params.K2; }
  std::size_t F() const { return hpda.params.F; }
  std::size_t users() const { return K1() * K2(); }
  std::size_t user(std::size_t k1, std::size_t k2) const { return k1 * K2() + k2; }
  std::size_t packet_len() const { return B / F(); }
  bool secure() const { return mode == Mode::SecurePrivate; }
  bool mirror_star(std::size_t j, std::size_t k1) const { return hpda.a0(j, k1) == Mark::Star; }
  bool user_star(std::size_t k1, std::size_t j, std::size_t k2) const {
    return is_star(hpda.sub[k1](j, k2));
  }
};

struct Library {
  std::vector<FVec> files;
  std::size_t F = 1;

  std::size_t packet_len() const { return files.front().size() / F; }

  FVec packet(std::size_t n, std::size_t j) const {
    require(n < files.size() && j < F, "packet index out of range");
    const std::size_t len = packet_len();
    const auto& e = files[n].elems();
    return FVec(std::vector<Elem>(e.begin() + j * len, e.begin() + (j + 1) * len));
  }
};

inline Library random_library(const SchemeInstance& inst, Rng& rng) {
  Library lib{{}, inst.F()};
  for (std::size_t n = 0; n < inst.N; ++n) lib.files.push_back(random_vec(inst.field, inst.B, rng));
  return lib;
}

struct Randomness {
  std::map<Entry, FVec> security;  // V_s
  std::vector<FVec> privacy;       // p per user, sums to q-1
  std::uint64_t seed = 0;
};

inline Randomness draw_randomness(const SchemeInstance& inst, Rng& rng) {
  Randomness r;
  r.seed = rng.seed();
  if (!inst.secure()) return r;
  for (Entry s : union_of(inst.hpda.s_k)) r.security[s] = random_vec(inst.field, inst.packet_len(), rng);
  const Elem target = inst.field.q() - 1;
  for (std::size_t u = 0; u < inst.users(); ++u)
    r.privacy.push_back(sample_vec_with_sum(inst.field, inst.N, target, rng));
  return r;
}

struct DemandMatrix {
  std::vector<FVec> rows;  // indexed by user k1*K2 + k2
};

// Rows are distinct unit vectors e_u.
inline DemandMatrix canonical_demand(std::size_t users, std::size_t N) {
  require(N >= users, "canonical demand needs N >= users");
  DemandMatrix D;
  for (std::size_t u = 0; u < users; ++u) {
    FVec d(N);
    d[u] = 1;
    D.rows.push_back(std::move(d));
  }
  return D;
}

using PacketColumn = std::vector<FVec>;  // packet j of every file

inline FVec lin_comb(const FieldCtx& ctx, const FVec& v, const PacketColumn& column) {
  require(v.size() == column.size(), "coefficient vector length differs from file count");
  FVec acc(column.front().size());
  for (std::size_t n = 0; n < v.size(); ++n) ctx.axpy(acc, v[n], column[n]);
  return acc;
}

inline PacketColumn packet_column(const Library& lib, std::size_t j) {
  PacketColumn col;
  for (std::size_t n = 0; n < lib.files.size(); ++n) col.push_back(lib.packet(n, j));
  return col;
}

// L_{v,j} = sum_n v_n W_{n,j}
inline FVec lin_comb(const FieldCtx& ctx, const FVec& v, const Library& lib, std::size_t j) {
  require(v.size() == lib.files.size(), "coefficient vector length differs from file count");
  return lin_comb(ctx, v, packet_column(lib, j));
}

struct MirrorCache {
  std::vector<std::optional<PacketColumn>> packets;  // by row j
  std::map<Entry, FVec> keys;                        // V_s held by the mirror
};

struct CodedRecord {
  Entry s = 0;
  FVec value;  // V_s + L_{p,j}
};

struct UserCache {
  std::vector<std::optional<PacketColumn>> packets;
  std::map<std::size_t, CodedRecord> coded;  // by row j
};

struct CacheSet {
  std::vector<MirrorCache> mirrors;
  std::vector<UserCache> users;
};

inline CacheSet place(const SchemeInstance& inst, const Library& lib, const Randomness& rand) {
  require(lib.files.size() == inst.N && lib.F == inst.F() && lib.files.front().size() == inst.B,
          "library does not match the instance");
  const auto& h = inst.hpda;
  const std::size_t F = inst.F();
  std::vector<PacketColumn> cols;
  for (std::size_t j = 0; j < F; ++j) cols.push_back(packet_column(lib, j));

  CacheSet cs;
  for (std::size_t k1 = 0; k1 < inst.K1(); ++k1) {
    MirrorCache mc;
    mc.packets.resize(F);
    for (std::size_t j = 0; j < F; ++j)
      if (inst.mirror_star(j, k1)) mc.packets[j] = cols[j];
    if (inst.secure()) {
      for (Entry s : h.s_k[k1])
        if (h.s_m.count(s)) mc.keys[s] = rand.security.at(s);
    }
    cs.mirrors.push_back(std::move(mc));
  }
  for (std::size_t k1 = 0; k1 < inst.K1(); ++k1) {
    for (std::size_t k2 = 0; k2 < inst.K2(); ++k2) {
      UserCache uc;
      uc.packets.resize(F);
      const std::size_t u = inst.user(k1, k2);
      for (std::size_t j = 0; j < F; ++j) {
        Entry e = h.sub[k1](j, k2);
        if (is_star(e)) {
          uc.packets[j] = cols[j];
        } else if (inst.secure()) {
          FVec v = rand.security.at(e);
          inst.field.add_into(v, lin_comb(inst.field, rand.privacy.at(u), cols[j]));
          uc.coded[j] = CodedRecord{e, std::move(v)};
        }
      }
      cs.users.push_back(std::move(uc));
    }
  }
  return cs;
}

struct MemoryUse {
  Rational m1_ratio;  // max over mirrors, in file units over N
  Rational m2_ratio;  // max over users
};

inline MemoryUse measure_memory(const SchemeInstance& inst, const CacheSet& cs) {
  auto column_symbols = [&](const std::vector<std::optional<PacketColumn>>& pk) {
    std::size_t total = 0;
    for (const auto& c : pk)
      if (c)
        for (const auto& p : *c) total += p.size();
    return total;
  };
  std::size_t m1 = 0, m2 = 0;
  for (const auto& mc : cs.mirrors) {
    std::size_t sym = column_symbols(mc.packets);
    for (const auto& [s, v] : mc.keys) sym += v.size();
    m1 = std::max(m1, sym);
  }
  for (const auto& uc : cs.users) {
    std::size_t sym = column_symbols(uc.packets);
    for (const auto& [j, rec] : uc.coded) sym += rec.value.size();
    m2 = std::max(m2, sym);
  }
  const std::size_t denom = inst.N * inst.B;
  return {Rational(m1, denom), Rational(m2, denom)};
}

// q = p + d per user.
inline std::vector<FVec> gen_public_vectors(const SchemeInstance& inst, const Randomness& rand,
                                            const DemandMatrix& D) {
  require(inst.secure(), "public vectors exist only in secure-private mode");
  require(rand.privacy.size() == inst.users(), "missing privacy vectors");
  require(D.rows.size() == inst.users(), "demand matrix needs one row per user");
  std::vector<FVec> Q;
  for (std::size_t u = 0; u < inst.users(); ++u) Q.push_back(inst.field.add(rand.privacy[u], D.rows[u]));
  return Q;
}

// Per-user request coefficients known to a party: q in secure-private mode,
// d in plain mode. Missing entries are unknown to that party.
struct CoefficientView {
  std::vector<std::optional<FVec>> vecs;

  const FVec& at(std::size_t u) const {
    if (u >= vecs.size() || !vecs[u]) {
      throw ProtocolError("request coefficients of user " + std::to_string(u + 1) +
                          " are not in this party's view");
    }
    return *vecs[u];
  }
};

// The coefficients that appear in transmitted signals.
inline CoefficientView signal_coefficients(const SchemeInstance& inst, const DemandMatrix& D,
                                           const std::vector<FVec>& Q) {
  CoefficientView v;
  for (const auto& r : inst.secure() ? Q : D.rows) v.vecs.emplace_back(r);
  return v;
}

// Mirror k1's view. In plain mirror-blind mode the mirror does not learn its
// own users' demands.
inline CoefficientView mirror_view(const SchemeInstance& inst, std::size_t k1,
                                   const CoefficientView& all) {
  CoefficientView v = all;
  if (!inst.secure() && inst.delivery == Delivery::MirrorBlind)
    for (std::size_t k2 = 0; k2 < inst.K2(); ++k2) v.vecs[inst.user(k1, k2)].reset();
  return v;
}

using SignalMap = std::map<Entry, FVec>;

inline FVec server_signal(const SchemeInstance& inst, const std::vector<PacketColumn>& cols,
                          const Randomness& rand, const CoefficientView& coeff, Entry s) {
  auto it = inst.cells.find(s);
  require(it != inst.cells.end(), "unknown signal label " + std::to_string(s));
  FVec x = inst.secure() ? rand.security.at(s) : FVec(inst.packet_len());
  for (const auto& c : it->second)
    inst.field.add_into(x, lin_comb(inst.field, coeff.at(inst.user(c.k1, c.k2)), cols[c.j]));
  return x;
}

inline SignalMap server_signals(const SchemeInstance& inst, const Library& lib,
                                const Randomness& rand, const CoefficientView& coeff) {
  std::vector<PacketColumn> cols;
  for (std::size_t j = 0; j < inst.F(); ++j) cols.push_back(packet_column(lib, j));
  SignalMap out;
  for (const auto& [s, cells] : inst.cells) {
    if (inst.delivery == Delivery::MirrorAssisted && inst.hpda.s_m.count(s)) continue;
    out[s] = server_signal(inst, cols, rand, coeff, s);
  }
  return out;
}

namespace detail {

inline const PacketColumn& cached(const std::vector<std::optional<PacketColumn>>& pk, std::size_t j,
                                  const std::string& who) {
  if (j >= pk.size() || !pk[j]) {
    throw ProtocolError(who + " needs packet row " + std::to_string(j + 1) + " which it does not cache");
  }
  return *pk[j];
}

}  // namespace detail

// Mirror k1 works only from its cache, its coefficient view and the received
// server signals; it has no access to the library.
inline SignalMap mirror_signals(const SchemeInstance& inst, std::size_t k1, const MirrorCache& mc,
                                const CoefficientView& view, const SignalMap& server) {
  const auto& h = inst.hpda;
  const std::string who = "mirror " + std::to_string(k1 + 1);
  SignalMap out;
  for (Entry s : h.s_k[k1]) {
    const auto& cells = inst.cells.at(s);
    if (h.s_m.count(s)) {
      if (inst.delivery == Delivery::MirrorBlind) {
        auto it = server.find(s);
        if (it == server.end()) throw ProtocolError(who + " did not receive signal " + std::to_string(s));
        out[s] = it->second;
        continue;
      }
      FVec x(inst.packet_len());
      if (inst.secure()) {
        auto key = mc.keys.find(s);
        if (key == mc.keys.end()) throw ProtocolError(who + " lacks the key for signal " + std::to_string(s));
        x = key->second;
      }
      for (const auto& c : cells) {
        inst.field.add_into(x, lin_comb(inst.field, view.at(inst.user(c.k1, c.k2)),
                                        detail::cached(mc.packets, c.j, who)));
      }
      out[s] = std::move(x);
      continue;
    }
    auto it = server.find(s);
    if (it == server.end()) throw ProtocolError(who + " did not receive signal " + std::to_string(s));
    FVec x = it->second;
    for (const auto& c : cells) {
      if (c.k1 == k1 || !inst.mirror_star(c.j, k1)) continue;
      inst.field.sub_into(x, lin_comb(inst.field, view.at(inst.user(c.k1, c.k2)),
                                      detail::cached(mc.packets, c.j, who)));
    }
    out[s] = std::move(x);
  }
  return out;
}

// Returns L_{d,j} for every row j.
inline std::vector<FVec> decode_user(const SchemeInstance& inst, std::size_t k1, std::size_t k2,
                                     const UserCache& uc, const SignalMap& mirror_sigs,
                                     const CoefficientView& view, const FVec& demand) {
  const auto& h = inst.hpda;
  const std::string who = "user (" + std::to_string(k1 + 1) + "," + std::to_string(k2 + 1) + ")";
  std::vector<FVec> out;
  for (std::size_t j = 0; j < inst.F(); ++j) {
    Entry s = h.sub[k1](j, k2);
    if (is_star(s)) {
      out.push_back(lin_comb(inst.field, demand, detail::cached(uc.packets, j, who)));
      continue;
    }
    auto it = mirror_sigs.find(s);
    if (it == mirror_sigs.end()) throw ProtocolError(who + " is missing signal " + std::to_string(s));
    FVec x = it->second;
    if (inst.secure()) {
      auto rec = uc.coded.find(j);
      if (rec == uc.coded.end() || rec->second.s != s)
        throw ProtocolError(who + " lacks the coded record for row " + std::to_string(j + 1));
      inst.field.sub_into(x, rec->second.value);
    }
    for (const auto& c : inst.cells.at(s)) {
      if (c.k1 == k1 && c.j == j && c.k2 == k2) continue;
      if (c.k1 != k1 && inst.mirror_star(c.j, k1)) continue;  // removed by the mirror
      x = inst.field.sub(x, lin_comb(inst.field, view.at(inst.user(c.k1, c.k2)),
                                     detail::cached(uc.packets, c.j, who)));
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace hpda
