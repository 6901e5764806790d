#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace jacsearch {

using u128 = unsigned __int128;

enum class ReductionKind { Mersenne64, Mont64, Mersenne128, Mont128 };

inline const char* reduction_kind_name(ReductionKind k) {
  switch (k) {
    case ReductionKind::Mersenne64: return "mersenne64";
    case ReductionKind::Mont64: return "mont64";
    case ReductionKind::Mersenne128: return "mersenne128";
    case ReductionKind::Mont128: return "mont128";
  }
  return "unknown";
}

// Per-thread operation counters, used by performance-contract tests.
struct OpCounters {
  uint64_t mul = 0;
  uint64_t sqr = 0;
  uint64_t inv = 0;

  void reset() { *this = OpCounters{}; }
};

inline OpCounters& op_counters() {
  thread_local OpCounters counters;
  return counters;
}

class Field;

// Element of F_{p^k}, k <= 3: k residues in the field's internal
// representation. Equality of representations is equality of elements
// (the representation map is a bijection on canonical residues).
struct FieldElement {
  std::array<u128, 3> c{};
  const Field* field = nullptr;

  bool operator==(const FieldElement& o) const {
    return field == o.field && c == o.c;
  }
  bool operator!=(const FieldElement& o) const { return !(*this == o); }
};

namespace detail {

inline u128 u128_from_int(const Int& a) {
  Int hi = a >> 64;
  Int lo = a & Int(0xFFFFFFFFFFFFFFFFul);
  return (u128(mpz_get_ui(hi.get_mpz_t())) << 64) | mpz_get_ui(lo.get_mpz_t());
}

inline Int int_from_u128(u128 v) {
  Int hi{uint64_t(v >> 64)};
  Int lo{uint64_t(v)};
  return (hi << 64) | lo;
}

}  // namespace detail

class Field {
 public:
  // Builds F_{p^k}. For k > 1 a monic irreducible polynomial of degree k may
  // be supplied (coefficients ascending, length k+1); otherwise the first
  // irreducible in the deterministic coefficient-vector order is used.
  explicit Field(const Int& p, int k = 1, std::vector<Int> defining = {})
      : p_(p), k_(k) {
    check(k >= 1 && k <= 3, ErrorKind::UnsupportedDegree,
          "extension degree must be 1, 2, or 3");
    check(p > 2 && mpz_odd_p(p.get_mpz_t()) != 0,
          ErrorKind::CompositeCharacteristic,
          "characteristic must be an odd prime");
    check(bit_length(p) <= 126, ErrorKind::BadInput,
          "characteristic above 126 bits is not supported");
    check(strong_prime_check(p), ErrorKind::CompositeCharacteristic,
          "characteristic must be an odd prime");
    init_backend();
    q_ = p_;
    for (int i = 1; i < k_; ++i) q_ *= p_;
    if (k_ > 1) {
      if (defining.empty()) {
        defining_ = find_defining_poly();
      } else {
        normalize_defining(defining);
        check(is_irreducible_smalldeg(defining), ErrorKind::ReduciblePolynomial,
              "defining polynomial is reducible");
        defining_ = std::move(defining);
      }
      build_red_rows(defining_, red_rows_);
    }
    init_quadratic_context();
  }

  Field(const Field&) = delete;
  Field& operator=(const Field&) = delete;

  const Int& p() const { return p_; }
  int k() const { return k_; }
  const Int& q() const { return q_; }
  ReductionKind reduction_kind() const { return kind_; }
  const std::vector<Int>& defining_poly() const { return defining_; }

  // -- element creation -------------------------------------------------------

  FieldElement zero() const { return element(); }

  FieldElement one() const {
    FieldElement e = element();
    e.c[0] = one_repr_;
    return e;
  }

  FieldElement from_int(const Int& a) const {
    FieldElement e = element();
    Int r = a % p_;
    if (r < 0) r += p_;
    e.c[0] = to_repr(r);
    return e;
  }

  FieldElement from_coords(const std::vector<Int>& coords) const {
    check(int(coords.size()) <= k_, ErrorKind::BadInput,
          "more coordinates than the extension degree");
    FieldElement e = element();
    for (size_t i = 0; i < coords.size(); ++i) {
      Int r = coords[i] % p_;
      if (r < 0) r += p_;
      e.c[i] = to_repr(r);
    }
    return e;
  }

  std::vector<Int> coords(const FieldElement& a) const {
    require_mine(a);
    std::vector<Int> out(k_);
    for (int i = 0; i < k_; ++i) out[i] = detail::int_from_u128(from_repr(a.c[i]));
    return out;
  }

  // The adjoined root x of the defining polynomial (k > 1).
  FieldElement alpha() const {
    check(k_ > 1, ErrorKind::BadInput, "alpha needs an extension field");
    FieldElement e = element();
    e.c[1] = one_repr_;
    return e;
  }

  FieldElement random_element(SplitMix64& rng) const {
    FieldElement e = element();
    for (int i = 0; i < k_; ++i) e.c[i] = to_repr_raw(random_residue(rng));
    return e;
  }

  bool is_zero(const FieldElement& a) const {
    require_mine(a);
    return a.c[0] == 0 && a.c[1] == 0 && a.c[2] == 0;
  }

  bool is_one(const FieldElement& a) const {
    require_mine(a);
    return a.c[0] == one_repr_ && a.c[1] == 0 && a.c[2] == 0;
  }

  // -- arithmetic ---------------------------------------------------------------

  FieldElement add(const FieldElement& a, const FieldElement& b) const {
    require_pair(a, b);
    FieldElement r = element();
    for (int i = 0; i < k_; ++i) r.c[i] = base_add(a.c[i], b.c[i]);
    return r;
  }

  FieldElement sub(const FieldElement& a, const FieldElement& b) const {
    require_pair(a, b);
    FieldElement r = element();
    for (int i = 0; i < k_; ++i) r.c[i] = base_sub(a.c[i], b.c[i]);
    return r;
  }

  FieldElement neg(const FieldElement& a) const {
    require_mine(a);
    FieldElement r = element();
    for (int i = 0; i < k_; ++i) r.c[i] = base_sub(0, a.c[i]);
    return r;
  }

  FieldElement mul(const FieldElement& a, const FieldElement& b) const {
    require_pair(a, b);
    ++op_counters().mul;
    if (k_ == 1) {
      FieldElement r = element();
      r.c[0] = base_mul(a.c[0], b.c[0]);
      return r;
    }
    return ext_mul(a, b);
  }

  FieldElement sqr(const FieldElement& a) const {
    require_mine(a);
    ++op_counters().sqr;
    if (k_ == 1) {
      FieldElement r = element();
      r.c[0] = base_mul(a.c[0], a.c[0]);
      return r;
    }
    return ext_mul(a, a);
  }

  FieldElement inv(const FieldElement& a) const {
    require_mine(a);
    check(!is_zero(a), ErrorKind::DivisionByZero, "inverse of zero");
    ++op_counters().inv;
    if (k_ == 1) {
      FieldElement r = element();
      r.c[0] = base_pow(a.c[0], p_ - 2);
      return r;
    }
    return ext_pow_nocount(a, q_ - 2);
  }

  // Inverts every entry with one inversion and 3(n-1) multiplications.
  std::vector<FieldElement> batch_inv(const std::vector<FieldElement>& v) const {
    for (size_t i = 0; i < v.size(); ++i) {
      check(!is_zero(v[i]), ErrorKind::DivisionByZero,
            "zero at index " + std::to_string(i));
    }
    if (v.empty()) return {};
    std::vector<FieldElement> prefix(v.size());
    prefix[0] = v[0];
    for (size_t i = 1; i < v.size(); ++i) prefix[i] = mul(prefix[i - 1], v[i]);
    FieldElement running = inv(prefix.back());
    std::vector<FieldElement> out(v.size());
    for (size_t i = v.size(); i-- > 1;) {
      out[i] = mul(running, prefix[i - 1]);
      running = mul(running, v[i]);
    }
    out[0] = running;
    return out;
  }

  FieldElement pow(const FieldElement& a, const Int& e) const {
    require_mine(a);
    if (e < 0) return pow(inv(a), -e);
    FieldElement r = one();
    size_t bits = bit_length(e);
    for (size_t b = bits; b-- > 0;) {
      r = sqr(r);
      if (mpz_tstbit(e.get_mpz_t(), b)) r = mul(r, a);
    }
    return r;
  }

  // -- quadratic structure ------------------------------------------------------

  bool is_qr(const FieldElement& a) const {
    require_mine(a);
    check(!is_zero(a), ErrorKind::ZeroInput, "quadratic residue test of zero");
    return is_one(ext_pow_nocount(a, (q_ - 1) / 2));
  }

  // Smallest non-residue in the coordinate order (most significant
  // coordinate first). For k = 2 the base-field block is skipped: every
  // base-field element is a square in a quadratic extension.
  const FieldElement& find_non_residue() const { return non_residue_; }

  // Deterministic square root: the lexicographically smaller of the two
  // roots by canonical coordinate vector. Empty when a is not a square.
  std::optional<FieldElement> sqrt(const FieldElement& a) const {
    require_mine(a);
    if (is_zero(a)) return a;
    if (!is_qr(a)) return std::nullopt;
    FieldElement r = tonelli_shanks(a);
    FieldElement other = neg(r);
    return lex_less(other, r) ? other : r;
  }

  // -- serialization ------------------------------------------------------------

  size_t coord_bytes() const { return (bit_length(p_) + 7) / 8; }

  // Little-endian magnitude per coordinate, fixed width, ascending basis.
  void serialize(const FieldElement& a, std::vector<uint8_t>& out) const {
    require_mine(a);
    size_t w = coord_bytes();
    for (int i = 0; i < k_; ++i) {
      u128 v = from_repr(a.c[i]);
      for (size_t b = 0; b < w; ++b) {
        out.push_back(uint8_t(v & 0xFF));
        v >>= 8;
      }
    }
  }

  std::vector<uint8_t> serialize(const FieldElement& a) const {
    std::vector<uint8_t> out;
    out.reserve(coord_bytes() * k_);
    serialize(a, out);
    return out;
  }

  uint64_t hash(const FieldElement& a, uint64_t salt = 0) const {
    require_mine(a);
    uint64_t h = mix64(salt ^ 0x243F6A8885A308D3ull);
    for (int i = 0; i < k_; ++i) {
      u128 v = from_repr(a.c[i]);
      h = mix64(h ^ uint64_t(v));
      h = mix64(h ^ uint64_t(v >> 64));
    }
    return h;
  }

 private:
  Int p_;
  int k_;
  Int q_;
  ReductionKind kind_ = ReductionKind::Mont64;

  u128 p128_ = 0;
  unsigned mers_e_ = 0;  // p = 2^e - c for the Mersenne kinds
  u128 mers_mask_ = 0;
  uint64_t mers_c_ = 0;
  uint64_t m64_inv_ = 0;   // -p^{-1} mod 2^64 (Mont64)
  u128 m64_r2_ = 0;        // 2^128 mod p
  uint64_t m128_inv_ = 0;  // -p^{-1} mod 2^64, per-limb (Mont128)
  u128 m128_r2_ = 0;       // 2^256 mod p
  u128 one_repr_ = 0;

  std::vector<Int> defining_;                      // monic, ascending, size k+1
  std::array<std::array<u128, 3>, 2> red_rows_{};  // x^{k+j} mod defining

  Int ts_t_;  // odd part of q - 1
  unsigned long ts_s_ = 0;
  FieldElement non_residue_;

  FieldElement element() const {
    FieldElement e;
    e.field = this;
    return e;
  }

  void require_mine(const FieldElement& a) const {
    check(a.field == this, ErrorKind::FieldMismatch,
          "element belongs to a different field");
  }

  void require_pair(const FieldElement& a, const FieldElement& b) const {
    require_mine(a);
    require_mine(b);
  }

  static bool strong_prime_check(const Int& p) {
    if (!is_prime(p)) return false;
    if (p < 7) return true;
    // Construction-time characteristics are user input: extend the base
    // test with probable-prime rounds to 64 total, deterministic bases.
    SplitMix64 rng(0x5ca1ab1e0ddba11ull);
    Int span = p - 3;
    if (span > 0xFFFFFFFFul) span = 0xFFFFFFFFul;
    for (int i = 0; i < 60; ++i) {
      Int base = 2 + Int(rng.next()) % span;
      if (!detail::mr_round(p, base)) return false;
    }
    return true;
  }

  // -- scalar arithmetic in F_p ---------------------------------------------------

  void init_backend() {
    p128_ = detail::u128_from_int(p_);
    size_t bits = bit_length(p_);
    Int c = (Int(1) << bits) - p_;
    bool mersenne_like = bits >= 48 && c > 0 && bit_length(c) <= 32;
    if (bits <= 62) {
      kind_ = mersenne_like ? ReductionKind::Mersenne64 : ReductionKind::Mont64;
    } else {
      kind_ = (mersenne_like && bits <= 94) ? ReductionKind::Mersenne128
                                            : ReductionKind::Mont128;
    }
    switch (kind_) {
      case ReductionKind::Mersenne64:
      case ReductionKind::Mersenne128: {
        mers_e_ = unsigned(bits);
        mers_c_ = to_u64(c);
        mers_mask_ = (u128(1) << mers_e_) - 1;
        break;
      }
      case ReductionKind::Mont64: {
        uint64_t p64 = to_u64(p_);
        uint64_t inv = p64;  // Newton lifting of p^{-1} mod 2^64
        for (int i = 0; i < 5; ++i) inv *= 2 - p64 * inv;
        m64_inv_ = ~inv + 1;
        m64_r2_ = detail::u128_from_int((Int(1) << 128) % p_);
        break;
      }
      case ReductionKind::Mont128: {
        uint64_t p0 = uint64_t(detail::u128_from_int(p_));
        uint64_t inv = p0;
        for (int i = 0; i < 5; ++i) inv *= 2 - p0 * inv;
        m128_inv_ = ~inv + 1;
        m128_r2_ = detail::u128_from_int((Int(1) << 256) % p_);
        break;
      }
    }
    one_repr_ = to_repr(Int(1));
  }

  u128 base_add(u128 a, u128 b) const {
    u128 r = a + b;  // p < 2^126: no overflow
    return r >= p128_ ? r - p128_ : r;
  }

  u128 base_sub(u128 a, u128 b) const { return a >= b ? a - b : a + p128_ - b; }

  u128 mersenne_reduce(u128 lo, u128 hi) const {
    // value = hi * 2^128 + lo < p^2; fold the top onto e bits repeatedly
    u128 r = lo & mers_mask_;
    u128 top = (hi << (128 - mers_e_)) | (lo >> mers_e_);
    while (top != 0) {
      r += top * mers_c_;  // top < 2^e, c < 2^32, e + 32 <= 126
      top = r >> mers_e_;
      r &= mers_mask_;
    }
    return r >= p128_ ? r - p128_ : r;
  }

  static void mul_64x64(uint64_t a, uint64_t b, uint64_t& lo, uint64_t& hi) {
    u128 t = u128(a) * b;
    lo = uint64_t(t);
    hi = uint64_t(t >> 64);
  }

  // 128x128 -> 256 bit product as four 64-bit limbs, little-endian.
  static void mul_128x128(u128 a, u128 b, uint64_t t[4]) {
    uint64_t a0 = uint64_t(a), a1 = uint64_t(a >> 64);
    uint64_t b0 = uint64_t(b), b1 = uint64_t(b >> 64);
    u128 p00 = u128(a0) * b0;
    u128 p01 = u128(a0) * b1;
    u128 p10 = u128(a1) * b0;
    u128 p11 = u128(a1) * b1;
    t[0] = uint64_t(p00);
    u128 mid = (p00 >> 64) + uint64_t(p01) + uint64_t(p10);
    t[1] = uint64_t(mid);
    u128 high = (mid >> 64) + (p01 >> 64) + (p10 >> 64) + uint64_t(p11);
    t[2] = uint64_t(high);
    t[3] = uint64_t(p11 >> 64) + uint64_t(high >> 64);
  }

  u128 mont128_mul(u128 a, u128 b) const {
    uint64_t t[4];
    mul_128x128(a, b, t);
    uint64_t p0 = uint64_t(p128_), p1 = uint64_t(p128_ >> 64);
    for (int round = 0; round < 2; ++round) {
      uint64_t m = t[0] * m128_inv_;
      uint64_t lo, hi, lo1, hi1;
      mul_64x64(m, p0, lo, hi);
      mul_64x64(m, p1, lo1, hi1);
      u128 carry = (u128(t[0]) + lo) >> 64;
      carry += u128(t[1]) + hi + lo1;
      t[0] = uint64_t(carry);
      carry = (carry >> 64) + t[2] + hi1;
      t[1] = uint64_t(carry);
      carry = (carry >> 64) + t[3];
      t[2] = uint64_t(carry);
      t[3] = uint64_t(carry >> 64);
    }
    invariant(t[2] == 0 && t[3] == 0, "montgomery reduction overflow");
    u128 r = (u128(t[1]) << 64) | t[0];
    return r >= p128_ ? r - p128_ : r;
  }

  u128 base_mul(u128 a, u128 b) const {
    switch (kind_) {
      case ReductionKind::Mersenne64: {
        u128 t = u128(uint64_t(a)) * uint64_t(b);
        return mersenne_reduce(t, 0);
      }
      case ReductionKind::Mont64: {
        u128 t = u128(uint64_t(a)) * uint64_t(b);
        uint64_t m = uint64_t(t) * m64_inv_;
        u128 mp = u128(m) * uint64_t(p128_);
        u128 r =
            (t >> 64) + (mp >> 64) + ((u128(uint64_t(t)) + uint64_t(mp)) >> 64);
        return r >= p128_ ? r - p128_ : r;
      }
      case ReductionKind::Mersenne128: {
        uint64_t t[4];
        mul_128x128(a, b, t);
        return mersenne_reduce((u128(t[1]) << 64) | t[0],
                               (u128(t[3]) << 64) | t[2]);
      }
      case ReductionKind::Mont128:
        return mont128_mul(a, b);
    }
    return 0;
  }

  u128 base_pow(u128 a, const Int& e) const {
    u128 r = one_repr_;
    size_t bits = bit_length(e);
    for (size_t b = bits; b-- > 0;) {
      r = base_mul(r, r);
      if (mpz_tstbit(e.get_mpz_t(), b)) r = base_mul(r, a);
    }
    return r;
  }

  u128 to_repr_raw(u128 canonical) const {
    switch (kind_) {
      case ReductionKind::Mersenne64:
      case ReductionKind::Mersenne128:
        return canonical;
      case ReductionKind::Mont64:
        return base_mul(canonical, m64_r2_);
      case ReductionKind::Mont128:
        return base_mul(canonical, m128_r2_);
    }
    return 0;
  }

  u128 to_repr(const Int& canonical) const {
    return to_repr_raw(detail::u128_from_int(canonical));
  }

  u128 from_repr(u128 repr) const {
    switch (kind_) {
      case ReductionKind::Mersenne64:
      case ReductionKind::Mersenne128:
        return repr;
      case ReductionKind::Mont64:
      case ReductionKind::Mont128:
        return base_mul(repr, 1);
    }
    return 0;
  }

  u128 random_residue(SplitMix64& rng) const {
    size_t bits = bit_length(p_);
    for (;;) {
      u128 v = rng.next();
      if (bits > 64) v |= u128(rng.next()) << 64;
      v &= (u128(1) << bits) - 1;
      if (v < p128_) return v;
    }
  }

  // -- extension field layer --------------------------------------------------------

  void normalize_defining(std::vector<Int>& f) const {
    check(int(f.size()) == k_ + 1, ErrorKind::BadInput,
          "defining polynomial degree must equal the extension degree");
    check(f.back() == 1, ErrorKind::BadInput,
          "defining polynomial must be monic");
    for (Int& c : f) {
      c %= p_;
      if (c < 0) c += p_;
    }
  }

  // Monic degree <= 3 over F_p is irreducible iff it has no roots.
  // Root test: deg(gcd(x^p - x, f)) > 0.
  bool is_irreducible_smalldeg(const std::vector<Int>& f) const {
    int deg = int(f.size()) - 1;
    if (deg == 1) return true;
    std::array<std::array<u128, 3>, 2> rows{};
    build_red_rows(f, rows);
    std::array<u128, 3> x{};
    x[1] = one_repr_;
    std::array<u128, 3> r{};
    r[0] = one_repr_;
    size_t bits = bit_length(p_);
    for (size_t b = bits; b-- > 0;) {
      r = raw_poly_mulmod(r, r, deg, rows);
      if (mpz_tstbit(p_.get_mpz_t(), b)) r = raw_poly_mulmod(r, x, deg, rows);
    }
    r[1] = base_sub(r[1], one_repr_);
    std::vector<u128> rv(r.begin(), r.begin() + deg);
    std::vector<u128> fv(deg + 1);
    for (int i = 0; i <= deg; ++i) fv[i] = to_repr(f[i]);
    return small_gcd_degree(std::move(rv), std::move(fv)) == 0;
  }

  static int raw_degree(const std::vector<u128>& v, int from) {
    int d = from;
    while (d >= 0 && v[size_t(d)] == 0) --d;
    return d;
  }

  // Degree of gcd(a, b) over F_p; callers never pass gcd(0, 0).
  int small_gcd_degree(std::vector<u128> a, std::vector<u128> b) const {
    int da = raw_degree(a, int(a.size()) - 1);
    int db = raw_degree(b, int(b.size()) - 1);
    if (da < db) {
      std::swap(a, b);
      std::swap(da, db);
    }
    while (db >= 0) {
      if (db == 0) return 0;
      u128 linv = base_pow(b[size_t(db)], p_ - 2);
      while (da >= db) {
        u128 f = base_mul(a[size_t(da)], linv);
        if (f != 0) {
          for (int i = 0; i <= db; ++i)
            a[size_t(da - db + i)] =
                base_sub(a[size_t(da - db + i)], base_mul(f, b[size_t(i)]));
        }
        da = raw_degree(a, da - 1);
      }
      std::swap(a, b);
      std::swap(da, db);
    }
    return da;
  }

  // rows[j] = x^{deg+j} mod f, j = 0 (deg 2, 3) and j = 1 (deg 3 only).
  void build_red_rows(const std::vector<Int>& f,
                      std::array<std::array<u128, 3>, 2>& rows) const {
    int deg = int(f.size()) - 1;
    std::array<u128, 3> row{};
    for (int i = 0; i < deg; ++i) row[i] = base_sub(0, to_repr(f[i]));
    rows[0] = row;
    if (deg == 3) {
      u128 top = row[2];
      std::array<u128, 3> nxt{};
      nxt[0] = base_mul(top, row[0]);
      nxt[1] = base_add(row[0], base_mul(top, row[1]));
      nxt[2] = base_add(row[1], base_mul(top, row[2]));
      rows[1] = nxt;
    }
  }

  std::array<u128, 3> raw_poly_mulmod(
      const std::array<u128, 3>& a, const std::array<u128, 3>& b, int deg,
      const std::array<std::array<u128, 3>, 2>& rows) const {
    u128 prod[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < deg; ++i) {
      if (a[size_t(i)] == 0) continue;
      for (int j = 0; j < deg; ++j) {
        if (b[size_t(j)] == 0) continue;
        prod[i + j] = base_add(prod[i + j], base_mul(a[size_t(i)], b[size_t(j)]));
      }
    }
    std::array<u128, 3> out{};
    for (int i = 0; i < deg; ++i) out[size_t(i)] = prod[i];
    for (int j = 2 * deg - 2; j >= deg; --j) {
      u128 coef = prod[j];
      if (coef == 0) continue;
      const auto& row = rows[size_t(j - deg)];
      for (int i = 0; i < deg; ++i)
        out[size_t(i)] = base_add(out[size_t(i)], base_mul(coef, row[size_t(i)]));
    }
    return out;
  }

  // Deterministic scan over non-leading coefficient vectors, most
  // significant coefficient first, least significant fastest. Provable
  // skip: for k = 3 with p = 2 mod 3 cubing is a bijection, so every
  // x^3 + c has a root and the (0, 0, *) block holds no irreducibles.
  std::vector<Int> find_defining_poly() const {
    if (k_ == 2) {
      for (Int c0 = 1;; ++c0) {
        std::vector<Int> f{c0, 0, 1};
        if (is_irreducible_smalldeg(f)) return f;
      }
    }
    bool cubes_bijective = (p_ % 3) == 2;
    for (Int c1 = cubes_bijective ? 1 : 0;; ++c1) {
      for (Int c0 = (c1 == 0) ? 1 : 0; c0 < p_; ++c0) {
        std::vector<Int> f{c0, c1, 0, 1};
        if (is_irreducible_smalldeg(f)) return f;
      }
    }
  }

  FieldElement ext_mul(const FieldElement& a, const FieldElement& b) const {
    FieldElement r = element();
    r.c = raw_poly_mulmod(a.c, b.c, k_, red_rows_);
    return r;
  }

  // Exponentiation that bypasses the op counters (internal machinery).
  FieldElement ext_pow_nocount(const FieldElement& a, const Int& e) const {
    FieldElement r = one();
    if (k_ == 1) {
      r.c[0] = base_pow(a.c[0], e);
      return r;
    }
    size_t bits = bit_length(e);
    for (size_t b = bits; b-- > 0;) {
      r = ext_mul(r, r);
      if (mpz_tstbit(e.get_mpz_t(), b)) r = ext_mul(r, a);
    }
    return r;
  }

  // -- quadratic machinery --------------------------------------------------------

  void init_quadratic_context() {
    Int t = q_ - 1;
    ts_s_ = mpz_scan1(t.get_mpz_t(), 0);
    ts_t_ = t >> ts_s_;
    non_residue_ = scan_non_residue();
  }

  FieldElement scan_non_residue() const {
    if (k_ == 2) {
      for (Int c0 = 0;; ++c0) {
        FieldElement cand = add(alpha(), from_int(c0));
        if (!is_qr(cand)) return cand;
      }
    }
    for (Int c0 = 2;; ++c0) {
      FieldElement cand = from_int(c0);
      if (!is_qr(cand)) return cand;
    }
  }

  FieldElement tonelli_shanks(const FieldElement& a) const {
    FieldElement c = ext_pow_nocount(non_residue_, ts_t_);
    FieldElement x = ext_pow_nocount(a, (ts_t_ + 1) / 2);
    FieldElement b = ext_pow_nocount(a, ts_t_);
    unsigned long m = ts_s_;
    while (!is_one(b)) {
      FieldElement t = b;
      unsigned long i = 0;
      while (!is_one(t)) {
        t = sqr(t);
        ++i;
        invariant(i < m, "square root loop left the residue class");
      }
      FieldElement e = c;
      for (unsigned long j = 0; j + i + 1 < m; ++j) e = sqr(e);
      x = mul(x, e);
      c = sqr(e);
      b = mul(b, c);
      m = i;
    }
    return x;
  }

  bool lex_less(const FieldElement& a, const FieldElement& b) const {
    for (int i = k_; i-- > 0;) {
      u128 av = from_repr(a.c[i]);
      u128 bv = from_repr(b.c[i]);
      if (av != bv) return av < bv;
    }
    return false;
  }
};

inline std::shared_ptr<const Field> field_new(const Int& p, int k = 1,
                                              std::vector<Int> defining = {}) {
  return std::make_shared<const Field>(p, k, std::move(defining));
}

}  // namespace jacsearch
