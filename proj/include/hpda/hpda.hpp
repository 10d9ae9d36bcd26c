#pragma once

#include <hpda/error.hpp>
#include <hpda/grid.hpp>
#include <hpda/pda.hpp>
#include <hpda/rational.hpp>

#include <algorithm>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace hpda {

enum class Mark : std::uint8_t { Null, Star };

using IntSet = std::set<Entry>;

struct HpdaParams {
  std::size_t K1 = 0, K2 = 0, F = 0, Z1 = 0, Z2 = 0;
  friend bool operator==(const HpdaParams&, const HpdaParams&) = default;
};

// Mirror part a0 (F x K1) plus K1 user sub-arrays (F x K2 each).
struct Hpda {
  HpdaParams params;
  Grid<Mark> a0;
  std::vector<Grid<Entry>> sub;
  IntSet s_m;
  std::vector<IntSet> s_k;

  friend bool operator==(const Hpda&, const Hpda&) = default;
};

struct HpdaCheck {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

inline IntSet present_integers(const Grid<Entry>& g) {
  auto v = distinct_integers(g);
  return IntSet(v.begin(), v.end());
}

namespace detail {

inline void check_shape(const Hpda& h) {
  const auto& p = h.params;
  require(h.a0.rows() == p.F && h.a0.cols() == p.K1, "a0 shape does not match F x K1");
  require(h.sub.size() == p.K1, "expected K1 sub-arrays");
  require(h.s_k.size() == p.K1, "expected K1 integer sets");
  for (const auto& g : h.sub)
    require(g.rows() == p.F && g.cols() == p.K2, "sub-array shape does not match F x K2");
}

inline std::string mirror_tag(std::size_t k1) { return "mirror " + std::to_string(k1 + 1); }

}  // namespace detail

inline HpdaCheck verify_hpda(const Hpda& h) {
  detail::check_shape(h);
  const auto& p = h.params;
  HpdaCheck res;
  auto& vs = res.violations;

  for (std::size_t k1 = 0; k1 < p.K1; ++k1) {
    std::size_t z = 0;
    for (std::size_t j = 0; j < p.F; ++j) z += h.a0(j, k1) == Mark::Star;
    if (z != p.Z1) {
      vs.push_back({"B1", {}, {k1},
                    detail::mirror_tag(k1) + " has " + std::to_string(z) + " stars, expected " +
                        std::to_string(p.Z1)});
    }
  }

  for (std::size_t k1 = 0; k1 < p.K1; ++k1) {
    PdaCheck chk = verify_pda(h.sub[k1]);
    for (auto v : chk.violations) {
      v.condition = "B2/" + v.condition;
      v.detail = detail::mirror_tag(k1) + ": " + v.detail;
      vs.push_back(std::move(v));
    }
    if (chk.ok() && chk.params->Z != p.Z2) {
      vs.push_back({"B2", {}, {}, detail::mirror_tag(k1) + " sub-array has Z=" +
                                      std::to_string(chk.params->Z) + ", expected " +
                                      std::to_string(p.Z2)});
    }
    if (present_integers(h.sub[k1]) != h.s_k[k1]) {
      vs.push_back({"Sk", {}, {}, "S" + std::to_string(k1 + 1) +
                                      " differs from the integers present in the sub-array"});
    }
  }

  // occurrences: label -> (k1, row, k2)
  struct Cell {
    std::size_t k1, j, k2;
  };
  std::map<Entry, std::vector<Cell>> where;
  for (std::size_t k1 = 0; k1 < p.K1; ++k1)
    for (std::size_t j = 0; j < p.F; ++j)
      for (std::size_t k2 = 0; k2 < p.K2; ++k2)
        if (Entry e = h.sub[k1](j, k2); !is_star(e) && e > 0) where[e].push_back({k1, j, k2});

  for (Entry s : h.s_m) {
    auto it = where.find(s);
    std::set<std::size_t> mirrors;
    if (it != where.end())
      for (const auto& c : it->second) mirrors.insert(c.k1);
    if (mirrors.size() != 1) {
      vs.push_back({"B3", {}, {}, "label " + std::to_string(s) + " of SM occurs in " +
                                      std::to_string(mirrors.size()) + " sub-arrays"});
    }
    if (it == where.end()) continue;
    for (const auto& c : it->second) {
      if (h.a0(c.j, c.k1) != Mark::Star) {
        vs.push_back({"B3", {c.j}, {c.k1}, detail::mirror_tag(c.k1) + ": label " +
                                               std::to_string(s) + " of SM on a non-star a0 row"});
      }
    }
  }

  for (const auto& [s, cells] : where) {
    for (std::size_t a = 0; a < cells.size(); ++a) {
      for (std::size_t b = 0; b < cells.size(); ++b) {
        const Cell& x = cells[a];
        const Cell& y = cells[b];
        if (x.k1 == y.k1) continue;
        // sub[x.k1] at row y.j, column x.k2
        if (!is_star(h.sub[x.k1](y.j, x.k2)) && h.a0(y.j, x.k1) != Mark::Star) {
          vs.push_back({"B4", {x.j, y.j}, {x.k1},
                        "label " + std::to_string(s) + ": " + detail::mirror_tag(x.k1) +
                            " row " + std::to_string(y.j + 1) + " needs an a0 star"});
        }
      }
    }
  }
  return res;
}

inline void require_valid(const Hpda& h, const std::string& origin) {
  HpdaCheck chk = verify_hpda(h);
  if (!chk.ok()) {
    std::string msg = origin + " produced an invalid HPDA:";
    for (const auto& v : chk.violations) msg += " [" + to_string(v) + "]";
    throw ProtocolError(msg);
  }
}

struct GroupingParams {
  std::size_t K1 = 0, K2 = 0, t = 0;
};

inline Hpda grouping_hpda(const GroupingParams& gp) {
  const std::size_t K1 = gp.K1, K2 = gp.K2, t = gp.t, K = K1 * K2;
  require(K1 >= 1 && K2 >= 1, "grouping needs K1, K2 >= 1");
  require(K2 <= t && t <= K, "grouping needs K2 <= t <= K1*K2");
  Pda B = mn_pda(K, t);
  const std::size_t F = B.params().F;

  Hpda h;
  h.params.K1 = K1;
  h.params.K2 = K2;
  h.params.F = F;
  h.params.Z1 = static_cast<std::size_t>(binom(K - K2, t - K2));
  h.params.Z2 = static_cast<std::size_t>(binom(K - 1, t - 1)) - h.params.Z1;
  h.a0 = Grid<Mark>(F, K1, Mark::Null);

  Entry next = static_cast<Entry>(B.params().S) + 1;
  for (std::size_t k1 = 0; k1 < K1; ++k1) {
    Grid<Entry> g(F, K2, kStar);
    for (std::size_t j = 0; j < F; ++j) {
      bool all_star = true;
      for (std::size_t k2 = 0; k2 < K2; ++k2) {
        g(j, k2) = B(j, k1 * K2 + k2);
        all_star = all_star && is_star(g(j, k2));
      }
      if (!all_star) continue;
      h.a0(j, k1) = Mark::Star;
      for (std::size_t k2 = 0; k2 < K2; ++k2) {
        h.s_m.insert(next);
        g(j, k2) = next++;
      }
    }
    h.s_k.push_back(present_integers(g));
    h.sub.push_back(std::move(g));
  }
  require_valid(h, "grouping");
  return h;
}

namespace detail {

// Relabels integers to 1..S preserving their order.
inline Grid<Entry> canonical_labels(const Grid<Entry>& g) {
  auto ints = distinct_integers(g);
  Grid<Entry> out = g;
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c)
      if (!is_star(g(r, c)))
        out(r, c) = std::lower_bound(ints.begin(), ints.end(), g(r, c)) - ints.begin() + 1;
  return out;
}

}  // namespace detail

// Outer array B drives the mirror layer, inner array C is substituted blockwise.
inline Hpda hybrid_hpda(const Pda& outer, const Pda& inner) {
  const Grid<Entry> b = detail::canonical_labels(outer.grid());
  const Grid<Entry> c = detail::canonical_labels(inner.grid());
  const auto [K1, F1, Z1, S1] = outer.params();
  const auto [K2, F2, Z2, S2] = inner.params();
  const std::size_t F = F1 * F2;

  Hpda h;
  h.params = {K1, K2, F, Z1 * F2, Z2 * F1};
  h.a0 = Grid<Mark>(F, K1, Mark::Null);
  for (std::size_t f1 = 0; f1 < F1; ++f1)
    for (std::size_t k1 = 0; k1 < K1; ++k1)
      if (is_star(b(f1, k1)))
        for (std::size_t f2 = 0; f2 < F2; ++f2) h.a0(f1 * F2 + f2, k1) = Mark::Star;

  for (std::size_t k1 = 0; k1 < K1; ++k1) {
    Grid<Entry> g(F, K2, kStar);
    std::size_t phi = 0;
    for (std::size_t f1 = 0; f1 < F1; ++f1) {
      Entry shift;
      if (is_star(b(f1, k1))) {
        ++phi;
        shift = static_cast<Entry>((k1 * Z1 + phi - 1 + S1) * S2);
      } else {
        shift = (b(f1, k1) - 1) * static_cast<Entry>(S2);
      }
      for (std::size_t f2 = 0; f2 < F2; ++f2)
        for (std::size_t k2 = 0; k2 < K2; ++k2)
          if (!is_star(c(f2, k2))) g(f1 * F2 + f2, k2) = c(f2, k2) + shift;
    }
    h.s_k.push_back(present_integers(g));
    h.sub.push_back(std::move(g));
  }
  for (std::size_t s = S1 * S2 + 1; s <= (S1 + Z1 * K1) * S2; ++s) h.s_m.insert(static_cast<Entry>(s));
  require_valid(h, "hybrid");
  return h;
}

struct HpdaStats {
  std::size_t s_m = 0;
  std::vector<std::size_t> s_k;
  std::vector<std::size_t> s_m_cap_s_k;
  std::size_t union_s_k = 0;
};

inline IntSet union_of(const std::vector<IntSet>& sets) {
  IntSet u;
  for (const auto& s : sets) u.insert(s.begin(), s.end());
  return u;
}

inline HpdaStats hpda_stats(const Hpda& h) {
  HpdaStats st;
  st.s_m = h.s_m.size();
  for (const auto& s : h.s_k) {
    st.s_k.push_back(s.size());
    std::size_t both = 0;
    for (Entry e : s) both += h.s_m.count(e);
    st.s_m_cap_s_k.push_back(both);
  }
  st.union_s_k = union_of(h.s_k).size();
  return st;
}

namespace detail {

inline void write_set(std::ostream& os, const std::string& name, const IntSet& s) {
  os << name << ':';
  for (Entry e : s) os << ' ' << e;
  os << '\n';
}

inline IntSet parse_set(const std::string& line, const std::string& name) {
  auto toks = tokens(line);
  require(!toks.empty() && toks[0] == name + ":", "expected '" + name + ":' line");
  IntSet s;
  for (std::size_t i = 1; i < toks.size(); ++i) s.insert(parse_entry(toks[i]));
  return s;
}

}  // namespace detail

inline std::string to_text(const Hpda& h) {
  const auto& p = h.params;
  std::ostringstream os;
  os << "HPDA " << p.K1 << ' ' << p.K2 << ' ' << p.F << ' ' << p.Z1 << ' ' << p.Z2 << '\n';
  for (std::size_t j = 0; j < p.F; ++j) {
    for (std::size_t k1 = 0; k1 < p.K1; ++k1)
      os << (k1 ? " " : "") << (h.a0(j, k1) == Mark::Star ? '*' : '.');
    os << '\n';
  }
  for (const auto& g : h.sub) {
    os << '\n';
    for (std::size_t j = 0; j < p.F; ++j) {
      for (std::size_t k2 = 0; k2 < p.K2; ++k2) {
        if (k2) os << ' ';
        if (is_star(g(j, k2))) os << '*'; else os << g(j, k2);
      }
      os << '\n';
    }
  }
  os << '\n';
  detail::write_set(os, "SM", h.s_m);
  for (std::size_t k1 = 0; k1 < p.K1; ++k1) detail::write_set(os, "S" + std::to_string(k1 + 1), h.s_k[k1]);
  return os.str();
}

// Parses the HPDA text format. Structure is checked; the array conditions are
// left to verify_hpda so that invalid arrays can still be loaded and reported.
inline Hpda parse_hpda(std::istream& in) {
  using namespace detail;
  std::string line;
  require(next_nonblank(in, line), "missing HPDA header");
  auto head = tokens(line);
  require(head.size() == 6 && head[0] == "HPDA", "expected header 'HPDA K1 K2 F Z1 Z2'");
  Hpda h;
  h.params = {parse_count(head[1]), parse_count(head[2]), parse_count(head[3]),
              parse_count(head[4]), parse_count(head[5])};
  const auto& p = h.params;
  require(p.K1 >= 1 && p.K2 >= 1 && p.F >= 1, "HPDA dimensions must be positive");

  h.a0 = Grid<Mark>(p.F, p.K1, Mark::Null);
  for (std::size_t j = 0; j < p.F; ++j) {
    require(next_nonblank(in, line), "truncated a0 grid");
    auto toks = tokens(line);
    require(toks.size() == p.K1, "a0 row " + std::to_string(j + 1) + " has wrong width");
    for (std::size_t k1 = 0; k1 < p.K1; ++k1) {
      require(toks[k1] == "*" || toks[k1] == ".", "a0 cells must be '*' or '.'");
      h.a0(j, k1) = toks[k1] == "*" ? Mark::Star : Mark::Null;
    }
  }
  for (std::size_t k1 = 0; k1 < p.K1; ++k1) {
    std::vector<std::vector<Entry>> rows;
    for (std::size_t j = 0; j < p.F; ++j) {
      require(next_nonblank(in, line), "truncated sub-array " + std::to_string(k1 + 1));
      std::vector<Entry> row;
      for (const auto& t : tokens(line)) row.push_back(parse_entry(t));
      require(row.size() == p.K2, "sub-array row has wrong width");
      rows.push_back(std::move(row));
    }
    h.sub.push_back(Grid<Entry>::from_rows(rows));
  }
  require(next_nonblank(in, line), "missing SM line");
  h.s_m = parse_set(line, "SM");
  for (std::size_t k1 = 0; k1 < p.K1; ++k1) {
    require(next_nonblank(in, line), "missing S" + std::to_string(k1 + 1) + " line");
    h.s_k.push_back(parse_set(line, "S" + std::to_string(k1 + 1)));
  }
  return h;
}

inline Hpda parse_hpda(const std::string& text) {
  std::istringstream is(text);
  return parse_hpda(is);
}

}  // namespace hpda
