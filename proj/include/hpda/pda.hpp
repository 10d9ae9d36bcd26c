#pragma once

#include <hpda/error.hpp>
#include <hpda/grid.hpp>
#include <hpda/rational.hpp>

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace hpda {

// Cell value: 0 is a star, positive values are integer labels.
using Entry = std::int64_t;
inline constexpr Entry kStar = 0;

inline bool is_star(Entry e) { return e == kStar; }

struct PdaParams {
  std::size_t K = 0, F = 0, Z = 0, S = 0;
  friend bool operator==(const PdaParams&, const PdaParams&) = default;
};

// Coordinates are 0-based; rendering adds 1.
struct Violation {
  std::string condition;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  std::string detail;
};

inline std::string to_string(const Violation& v) {
  std::ostringstream os;
  os << v.condition;
  auto list = [&os](const char* name, const std::vector<std::size_t>& xs) {
    if (xs.empty()) return;
    os << ' ' << name << '=';
    for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i] + 1;
  };
  list("rows", v.rows);
  list("cols", v.cols);
  if (!v.detail.empty()) os << ": " << v.detail;
  return os.str();
}

struct PdaCheck {
  std::optional<PdaParams> params;
  std::vector<Violation> violations;
  bool ok() const { return params.has_value(); }
};

inline std::vector<Entry> distinct_integers(const Grid<Entry>& g) {
  std::vector<Entry> out;
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c)
      if (!is_star(g(r, c))) out.push_back(g(r, c));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline PdaCheck verify_pda(const Grid<Entry>& g) {
  PdaCheck res;
  auto& vs = res.violations;
  if (g.rows() == 0 || g.cols() == 0) {
    vs.push_back({"shape", {}, {}, "empty grid"});
    return res;
  }
  std::map<Entry, std::vector<std::pair<std::size_t, std::size_t>>> where;
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      Entry e = g(r, c);
      if (e < 0) {
        vs.push_back({"alphabet", {r}, {c}, "negative label " + std::to_string(e)});
      } else if (!is_star(e)) {
        where[e].emplace_back(r, c);
      }
    }
  }
  auto stars_in = [&g](std::size_t c) {
    std::size_t z = 0;
    for (std::size_t r = 0; r < g.rows(); ++r) z += is_star(g(r, c));
    return z;
  };
  const std::size_t Z = stars_in(0);
  for (std::size_t c = 1; c < g.cols(); ++c) {
    std::size_t z = stars_in(c);
    if (z != Z) {
      vs.push_back({"C1", {}, {c},
                    std::to_string(z) + " stars, expected " + std::to_string(Z)});
    }
  }
  for (const auto& [s, cells] : where) {
    for (std::size_t a = 0; a < cells.size(); ++a) {
      for (std::size_t b = a + 1; b < cells.size(); ++b) {
        auto [r1, c1] = cells[a];
        auto [r2, c2] = cells[b];
        if (r1 == r2 || c1 == c2) {
          vs.push_back({"C3a", {r1, r2}, {c1, c2},
                        "label " + std::to_string(s) + " repeated in a row or column"});
          continue;
        }
        if (!is_star(g(r1, c2)) || !is_star(g(r2, c1))) {
          vs.push_back({"C3b", {r1, r2}, {c1, c2},
                        "label " + std::to_string(s) + " lacks cross stars"});
        }
      }
    }
  }
  if (vs.empty()) res.params = PdaParams{g.cols(), g.rows(), Z, where.size()};
  return res;
}

class Pda {
 public:
  // Verifies; throws PreconditionError listing the violations.
  static Pda from_grid(Grid<Entry> g) {
    PdaCheck chk = verify_pda(g);
    if (!chk.ok()) {
      std::string msg = "not a PDA:";
      for (const auto& v : chk.violations) msg += " [" + to_string(v) + "]";
      throw PreconditionError(msg);
    }
    return Pda(std::move(g), *chk.params);
  }

  const Grid<Entry>& grid() const { return grid_; }
  const PdaParams& params() const { return params_; }
  Entry operator()(std::size_t r, std::size_t c) const { return grid_(r, c); }

  friend bool operator==(const Pda& a, const Pda& b) { return a.grid_ == b.grid_; }

 private:
  Pda(Grid<Entry> g, PdaParams p) : grid_(std::move(g)), params_(p) {}
  Grid<Entry> grid_;
  PdaParams params_;
};

// Lexicographic ranking of t-subsets of [n] (elements and ranks 1-based).
class SubsetRanker {
 public:
  SubsetRanker(std::size_t n, std::size_t t) : n_(n), t_(t), pascal_(n + 1) {
    require(n <= 64, "subset ranker supports n <= 64");
    require(t <= n, "subset size exceeds ground set");
    for (std::size_t i = 0; i <= n; ++i) {
      pascal_[i].assign(i + 1, 1);
      for (std::size_t j = 1; j < i; ++j) pascal_[i][j] = pascal_[i - 1][j - 1] + pascal_[i - 1][j];
    }
  }

  std::size_t n() const { return n_; }
  std::size_t t() const { return t_; }
  std::uint64_t count() const { return C(n_, t_); }

  std::uint64_t rank(const std::vector<std::size_t>& subset) const {
    require(subset.size() == t_, "subset has wrong size");
    std::uint64_t r = 0;
    std::size_t prev = 0;
    for (std::size_t i = 0; i < t_; ++i) {
      std::size_t s = subset[i];
      require(s > prev && s <= n_, "subset must be strictly increasing within [n]");
      for (std::size_t v = prev + 1; v < s; ++v) r += C(n_ - v, t_ - i - 1);
      prev = s;
    }
    return r + 1;
  }

  std::vector<std::size_t> unrank(std::uint64_t r) const {
    require(r >= 1 && r <= count(), "rank out of range");
    --r;
    std::vector<std::size_t> out;
    std::size_t v = 1;
    for (std::size_t i = 0; i < t_; ++i) {
      while (C(n_ - v, t_ - i - 1) <= r) {
        r -= C(n_ - v, t_ - i - 1);
        ++v;
      }
      out.push_back(v++);
    }
    return out;
  }

  // All t-subsets in lex order.
  std::vector<std::vector<std::size_t>> all() const {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur(t_);
    for (std::size_t i = 0; i < t_; ++i) cur[i] = i + 1;
    while (true) {
      out.push_back(cur);
      std::size_t i = t_;
      while (i > 0 && cur[i - 1] == n_ - t_ + i) --i;
      if (i == 0) break;
      ++cur[i - 1];
      for (std::size_t j = i; j < t_; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
  }

 private:
  std::uint64_t C(std::size_t a, std::size_t b) const { return b > a ? 0 : pascal_[a][b]; }

  std::size_t n_, t_;
  std::vector<std::vector<std::uint64_t>> pascal_;
};

inline Pda mn_pda(std::size_t K, std::size_t t) {
  require(K >= 1 && t >= 1 && t <= K, "mn_pda needs 1 <= t <= K");
  require(binom(K, t) <= 1'000'000, "mn_pda subpacketization too large to materialize");
  SubsetRanker rows(K, t);
  std::optional<SubsetRanker> labels;
  if (t < K) labels.emplace(K, t + 1);
  auto subsets = rows.all();
  Grid<Entry> g(subsets.size(), K, kStar);
  for (std::size_t r = 0; r < subsets.size(); ++r) {
    const auto& T = subsets[r];
    for (std::size_t k = 1; k <= K; ++k) {
      if (std::binary_search(T.begin(), T.end(), k)) continue;
      std::vector<std::size_t> u = T;
      u.insert(std::upper_bound(u.begin(), u.end(), k), k);
      g(r, k - 1) = static_cast<Entry>(labels->rank(u));
    }
  }
  return Pda::from_grid(std::move(g));
}

inline std::pair<Rational, Rational> pda_loads(const Pda& p) {
  const auto& pr = p.params();
  return {Rational(pr.Z, pr.F), Rational(pr.S, pr.F)};
}

// Closed-form parameters of partition_pda(qp, m); tests pin these against the verifier.
inline PdaParams partition_pda_params(std::size_t qp, std::size_t m) {
  require(qp >= 2 && m >= 1, "partition_pda needs qp >= 2, m >= 1");
  std::size_t F = 1;
  for (std::size_t i = 0; i < m; ++i) F *= qp;
  return {(m + 1) * qp, F, F / qp, F * qp - F};
}

// Rows: f in Z_qp^m extended by the coordinate sum. Columns: (i, l) for
// i in [0, m], l in Z_qp. Star where f_i = l; otherwise the label of the
// vector obtained from f by setting coordinate i to l, which is never a
// consistent extension.
inline Pda partition_pda(std::size_t qp, std::size_t m) {
  PdaParams pp = partition_pda_params(qp, m);
  require(pp.F * qp <= (1u << 22), "partition_pda too large to materialize");
  const std::size_t len = m + 1;
  const std::size_t total = pp.F * qp;  // qp^(m+1)
  auto consistent = [&](std::size_t code) {
    std::size_t s = 0, last = 0;
    for (std::size_t i = 0; i < len; ++i) {
      std::size_t digit = code % qp;
      code /= qp;
      if (i == 0) last = digit; else s += digit;
    }
    return s % qp == last;
  };
  std::vector<Entry> label(total, 0);
  Entry next = 1;
  for (std::size_t code = 0; code < total; ++code)
    if (!consistent(code)) label[code] = next++;

  Grid<Entry> g(pp.F, pp.K, kStar);
  std::vector<std::size_t> v(len);
  for (std::size_t row = 0; row < pp.F; ++row) {
    std::size_t x = row, s = 0;
    for (std::size_t i = m; i-- > 0;) {
      v[i] = x % qp;
      x /= qp;
      s += v[i];
    }
    v[m] = s % qp;
    for (std::size_t i = 0; i < len; ++i) {
      for (std::size_t l = 0; l < qp; ++l) {
        if (v[i] == l) continue;
        std::size_t code = 0;
        for (std::size_t a = 0; a < len; ++a) code = code * qp + (a == i ? l : v[a]);
        g(row, i * qp + l) = label[code];
      }
    }
  }
  return Pda::from_grid(std::move(g));
}

inline std::string to_text(const Pda& p) {
  const auto& pr = p.params();
  std::ostringstream os;
  os << "PDA " << pr.K << ' ' << pr.F << ' ' << pr.Z << ' ' << pr.S << '\n';
  for (std::size_t r = 0; r < p.grid().rows(); ++r) {
    for (std::size_t c = 0; c < p.grid().cols(); ++c) {
      if (c) os << ' ';
      Entry e = p(r, c);
      if (is_star(e)) os << '*'; else os << e;
    }
    os << '\n';
  }
  return os.str();
}

namespace detail {

inline constexpr const char* kFormatHeader = "hpda-lab format v1";

inline std::vector<std::string> tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

inline std::size_t parse_count(const std::string& tok) {
  require(!tok.empty() && std::all_of(tok.begin(), tok.end(), ::isdigit),
          "expected a non-negative integer, got '" + tok + "'");
  return std::stoull(tok);
}

inline Entry parse_entry(const std::string& tok) {
  if (tok == "*") return kStar;
  Entry v = static_cast<Entry>(parse_count(tok));
  require(v > 0, "integer labels must be positive");
  return v;
}

// Next line that is not a comment or the format banner; blank lines kept.
inline bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == kFormatHeader || (!line.empty() && line[0] == '#')) continue;
    return true;
  }
  return false;
}

inline bool next_nonblank(std::istream& in, std::string& line) {
  while (next_line(in, line))
    if (!tokens(line).empty()) return true;
  return false;
}

}  // namespace detail

// Parses the PDA text format; the header parameters must match the grid.
inline Pda parse_pda(std::istream& in) {
  std::string line;
  require(detail::next_nonblank(in, line), "missing PDA header");
  auto head = detail::tokens(line);
  require(head.size() == 5 && head[0] == "PDA", "expected header 'PDA K F Z S'");
  PdaParams want{detail::parse_count(head[1]), detail::parse_count(head[2]),
                 detail::parse_count(head[3]), detail::parse_count(head[4])};
  std::vector<std::vector<Entry>> rows;
  while (rows.size() < want.F && detail::next_nonblank(in, line)) {
    std::vector<Entry> row;
    for (const auto& t : detail::tokens(line)) row.push_back(detail::parse_entry(t));
    rows.push_back(std::move(row));
  }
  require(rows.size() == want.F, "PDA grid has fewer rows than declared");
  Pda p = Pda::from_grid(Grid<Entry>::from_rows(rows));
  require(p.params() == want, "PDA header does not match the grid's parameters");
  return p;
}

inline Pda parse_pda(const std::string& text) {
  std::istringstream is(text);
  return parse_pda(is);
}

}  // namespace hpda
