#pragma once

#include <hpda/error.hpp>

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hpda {

using Elem = std::uint32_t;

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

// Vector over GF(q); elements are canonical residues.
class FVec {
 public:
  FVec() = default;
  explicit FVec(std::size_t len) : elems_(len, 0) {}
  explicit FVec(std::vector<Elem> elems) : elems_(std::move(elems)) {}
  FVec(std::initializer_list<Elem> init) : elems_(init) {}

  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  Elem operator[](std::size_t i) const { return elems_[i]; }
  Elem& operator[](std::size_t i) { return elems_[i]; }
  const std::vector<Elem>& elems() const { return elems_; }
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }

  bool is_zero() const {
    for (Elem e : elems_)
      if (e != 0) return false;
    return true;
  }

  friend bool operator==(const FVec&, const FVec&) = default;
  friend auto operator<=>(const FVec&, const FVec&) = default;

 private:
  std::vector<Elem> elems_;
};

class FieldCtx {
 public:
  explicit FieldCtx(std::uint32_t q) : q_(q) {
    require(q >= 2 && q < (1u << 31) && is_prime(q),
            "field order must be a prime below 2^31, got " + std::to_string(q));
  }

  std::uint32_t q() const { return q_; }

  Elem reduce(std::int64_t v) const {
    std::int64_t r = v % static_cast<std::int64_t>(q_);
    return static_cast<Elem>(r < 0 ? r + q_ : r);
  }
  Elem add(Elem a, Elem b) const {
    std::uint64_t s = std::uint64_t{a} + b;
    return static_cast<Elem>(s >= q_ ? s - q_ : s);
  }
  Elem sub(Elem a, Elem b) const { return a >= b ? a - b : a + q_ - b; }
  Elem neg(Elem a) const { return a == 0 ? 0 : q_ - a; }
  Elem mul(Elem a, Elem b) const {
    return static_cast<Elem>((std::uint64_t{a} * b) % q_);
  }
  Elem pow(Elem a, std::uint64_t e) const {
    Elem r = 1;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
  Elem inv(Elem a) const {
    require(a % q_ != 0, "inverse of zero");
    return pow(a, q_ - 2);
  }

  bool contains(const FVec& v) const {
    for (Elem e : v)
      if (e >= q_) return false;
    return true;
  }

  FVec add(const FVec& a, const FVec& b) const {
    check_dims(a, b);
    FVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = add(a[i], b[i]);
    return r;
  }
  FVec sub(const FVec& a, const FVec& b) const {
    check_dims(a, b);
    FVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = sub(a[i], b[i]);
    return r;
  }
  FVec scale(Elem c, const FVec& a) const {
    FVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = mul(c, a[i]);
    return r;
  }
  // acc += c * x
  void axpy(FVec& acc, Elem c, const FVec& x) const {
    check_dims(acc, x);
    if (c == 0) return;
    for (std::size_t i = 0; i < x.size(); ++i) acc[i] = add(acc[i], mul(c, x[i]));
  }
  void add_into(FVec& acc, const FVec& x) const {
    check_dims(acc, x);
    for (std::size_t i = 0; i < x.size(); ++i) acc[i] = add(acc[i], x[i]);
  }
  void sub_into(FVec& acc, const FVec& x) const {
    check_dims(acc, x);
    for (std::size_t i = 0; i < x.size(); ++i) acc[i] = sub(acc[i], x[i]);
  }
  Elem sum(const FVec& a) const {
    Elem s = 0;
    for (Elem e : a) s = add(s, e);
    return s;
  }

  friend bool operator==(const FieldCtx&, const FieldCtx&) = default;

 private:
  static void check_dims(const FVec& a, const FVec& b) {
    require(a.size() == b.size(), "dimension mismatch: " + std::to_string(a.size()) +
                                      " vs " + std::to_string(b.size()));
  }

  std::uint32_t q_;
};

inline std::size_t matrix_rank(std::span<const FVec> rows, const FieldCtx& ctx) {
  require(!rows.empty(), "matrix_rank of empty input");
  const std::size_t cols = rows.front().size();
  std::vector<FVec> m(rows.begin(), rows.end());
  for (const auto& r : m) require(r.size() == cols, "ragged matrix");
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t piv = rank;
    while (piv < m.size() && m[piv][c] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[rank]);
    Elem inv = ctx.inv(m[rank][c]);
    m[rank] = ctx.scale(inv, m[rank]);
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r != rank && m[r][c] != 0) ctx.axpy(m[r], ctx.neg(m[r][c]), m[rank]);
    }
    ++rank;
  }
  return rank;
}

inline std::size_t matrix_rank(const std::vector<FVec>& rows, const FieldCtx& ctx) {
  return matrix_rank(std::span<const FVec>(rows), ctx);
}

// Deterministic generator. mt19937_64's output sequence is fixed by the
// standard, and bounded draws use rejection sampling, so streams replay
// identically across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(mix(seed)) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next() { return eng_(); }

  // Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) {
    require(n > 0, "empty range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  // Independent child stream keyed by `stream`.
  Rng split(std::uint64_t stream) const { return Rng(mix(seed_ ^ mix(stream + 0x51ed27))); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

inline Elem random_elem(const FieldCtx& ctx, Rng& rng) {
  return static_cast<Elem>(rng.below(ctx.q()));
}

inline FVec random_vec(const FieldCtx& ctx, std::size_t len, Rng& rng) {
  FVec v(len);
  for (std::size_t i = 0; i < len; ++i) v[i] = random_elem(ctx, rng);
  return v;
}

// Uniform over {x in GF(q)^len : sum(x) = target}.
inline FVec sample_vec_with_sum(const FieldCtx& ctx, std::size_t len, Elem target, Rng& rng) {
  require(len >= 1, "sample_vec_with_sum needs len >= 1");
  require(target < ctx.q(), "target not a field element");
  FVec v(len);
  Elem s = 0;
  for (std::size_t i = 0; i + 1 < len; ++i) {
    v[i] = random_elem(ctx, rng);
    s = ctx.add(s, v[i]);
  }
  v[len - 1] = ctx.sub(target, s);
  return v;
}

}  // namespace hpda
