#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <vector>

#include "bigint.hpp"
#include "blackbox.hpp"
#include "curve.hpp"
#include "errors.hpp"
#include "ff.hpp"
#include "rng.hpp"
#include "zeta.hpp"

namespace jacsearch {

namespace detail {

// Inverse of mix64: undoes each xor-shift and multiplies by the modular
// inverses of the two mix constants.
inline uint64_t unxorshift(uint64_t x, unsigned s) {
  uint64_t r = x;
  for (unsigned done = s; done < 64; done += s) r = x ^ (r >> s);
  return r;
}

inline uint64_t unmix64(uint64_t z) {
  z = unxorshift(z, 31);
  z *= 0x319642B2D24D8EC3ull;  // inverse of 0x94D049BB133111EB
  z = unxorshift(z, 27);
  z *= 0x96DE1B173F119089ull;  // inverse of 0xBF58476D1CE4E5B9
  z = unxorshift(z, 30);
  return z;
}

}  // namespace detail

// Product of hidden cyclic groups Z/n_1 x ... x Z/n_r behind an opaque
// encoding: callers only see keyed-bijection images of the residues, so the
// only available structure is composition, inversion and equality. Used to
// exercise generic-group code against known answers.
class OpaqueGroup {
 public:
  struct Element {
    std::array<uint64_t, 8> w{};
    uint8_t count = 0;
  };

  OpaqueGroup(std::vector<uint64_t> moduli, uint64_t key_seed,
              bool advertise_fast_inverse = true)
      : moduli_(std::move(moduli)), fast_inverse_(advertise_fast_inverse) {
    check(!moduli_.empty() && moduli_.size() <= 8, ErrorKind::BadInput,
          "opaque group needs 1..8 factors");
    Int total = 1;
    for (uint64_t n : moduli_) {
      check(n >= 1, ErrorKind::BadInput, "opaque factor must be positive");
      total *= Int(n);
    }
    check(bit_length(total) <= 60, ErrorKind::BadInput,
          "opaque group order exceeds 2^60");
    SplitMix64 kr = rng_for(key_seed, 0x6f70617175656772ull);
    for (size_t i = 0; i < moduli_.size(); ++i) keys_[i] = kr.next();
    hash_salt_ = kr.next();
  }

  size_t slots() const { return moduli_.size(); }

  Element identity() const {
    Element e;
    e.count = uint8_t(moduli_.size());
    for (size_t i = 0; i < moduli_.size(); ++i) e.w[i] = encode(i, 0);
    return e;
  }

  Element compose(const Element& a, const Element& b) const {
    ++ops_;
    Element e;
    e.count = a.count;
    for (size_t i = 0; i < moduli_.size(); ++i) {
      uint64_t r = decode(i, a.w[i]) + decode(i, b.w[i]);
      if (r >= moduli_[i]) r -= moduli_[i];
      e.w[i] = encode(i, r);
    }
    return e;
  }

  Element invert(const Element& a) const {
    Element e;
    e.count = a.count;
    for (size_t i = 0; i < moduli_.size(); ++i) {
      uint64_t r = decode(i, a.w[i]);
      e.w[i] = encode(i, r == 0 ? 0 : moduli_[i] - r);
    }
    return e;
  }

  void compose_all(std::vector<Element>& v, const Element& g) const {
    for (Element& e : v) e = compose(e, g);
  }

  Element random_element(SplitMix64& rng) const {
    Element e;
    e.count = uint8_t(moduli_.size());
    for (size_t i = 0; i < moduli_.size(); ++i) {
      e.w[i] = encode(i, moduli_[i] == 1 ? 0 : rng.next_below(moduli_[i]));
    }
    return e;
  }

  bool equal(const Element& a, const Element& b) const {
    for (size_t i = 0; i < moduli_.size(); ++i) {
      if (a.w[i] != b.w[i]) return false;
    }
    return true;
  }

  bool is_identity(const Element& a) const {
    for (size_t i = 0; i < moduli_.size(); ++i) {
      if (decode(i, a.w[i]) != 0) return false;
    }
    return true;
  }

  // Symmetric under inversion: each slot contributes the smaller of the
  // mixes of the residue's encoding and its inverse's encoding.
  uint64_t hash64(const Element& a) const {
    uint64_t h = 0x243F6A8885A308D3ull;
    for (size_t i = 0; i < moduli_.size(); ++i) {
      uint64_t r = decode(i, a.w[i]);
      uint64_t s = r == 0 ? 0 : moduli_[i] - r;
      uint64_t hr = mix64(encode(i, r) ^ hash_salt_);
      uint64_t hs = mix64(encode(i, s) ^ hash_salt_);
      h = h * 0x9E3779B97F4A7C15ull + (hr < hs ? hr : hs);
    }
    return mix64(h);
  }

  std::vector<uint8_t> serialize(const Element& a) const {
    std::vector<uint8_t> out(moduli_.size() * 8);
    for (size_t i = 0; i < moduli_.size(); ++i) {
      uint64_t v = a.w[i];
      for (int b = 0; b < 8; ++b) out[i * 8 + b] = uint8_t(v >> (8 * b));
    }
    return out;
  }

  bool fast_inverse() const { return fast_inverse_; }
  uint64_t ops() const { return ops_; }
  void reset_ops() const { ops_ = 0; }

  // Test channels; generic callers must not touch these.
  Int true_order() const {
    Int n = 1;
    for (uint64_t m : moduli_) n *= Int(m);
    return n;
  }
  Int true_lambda() const {
    Int l = 1;
    for (uint64_t m : moduli_) l = lcm_int(l, Int(m));
    return l;
  }
  uint64_t true_element_order(const Element& a) const {
    Int o = 1;
    for (size_t i = 0; i < moduli_.size(); ++i) {
      uint64_t r = decode(i, a.w[i]);
      if (r == 0) continue;
      o = lcm_int(o, Int(moduli_[i] / std::gcd(moduli_[i], r)));
    }
    return to_u64(o);
  }

 private:
  uint64_t encode(size_t i, uint64_t r) const { return mix64(r + keys_[i]); }
  uint64_t decode(size_t i, uint64_t w) const {
    return detail::unmix64(w) - keys_[i];
  }

  std::vector<uint64_t> moduli_;
  std::array<uint64_t, 8> keys_{};
  uint64_t hash_salt_ = 0;
  bool fast_inverse_;
  mutable uint64_t ops_ = 0;
};

// ---------------------------------------------------------------------------
// Exhaustive reference answers for small curves, computed by strategies kept
// independent of the generic-group pipeline they cross-check.

namespace detail {

inline uint64_t elem_index(const Field& K, const FieldElement& z) {
  std::vector<Int> c = K.coords(z);
  uint64_t p = to_u64(K.p()), idx = 0, mult = 1;
  for (const Int& ci : c) {
    idx += to_u64(ci) * mult;
    mult *= p;
  }
  return idx;
}

inline SplitMix64 oracle_rng(const CurveParams& C, uint64_t tag) {
  uint64_t s = mix64(mpz_get_ui(C.field().p().get_mpz_t()));
  for (const FieldElement& c : C.f().coeffs()) {
    s = mix64(s ^ C.field().hash(c, 0x6f7261636c65ull));
  }
  return rng_for(s, tag);
}

// Affine point total over F_{p^k} by the quadratic character: a square table
// marks every value of y^2, then each x contributes 1 for a root of f and 2
// for a marked nonzero value. Prime fields and quadratic extensions run on
// raw residue arithmetic; higher extensions walk the field element by
// element.
inline uint64_t affine_count_table(const CurveParams& C, unsigned k) {
  const Field& F = C.field();
  uint64_t p = to_u64(F.p());
  std::vector<uint64_t> fb;
  for (const FieldElement& c : C.f().coeffs()) {
    fb.push_back(to_u64(F.coords(c)[0]));
  }
  if (k == 1) {
    std::vector<bool> sq(p, false);
    for (uint64_t y = 0; y < p; ++y) sq[(y * y) % p] = true;
    uint64_t total = 0;
    for (uint64_t x = 0; x < p; ++x) {
      uint64_t v = 0;
      for (size_t i = fb.size(); i-- > 0;) v = (v * x + fb[i]) % p;
      total += (v == 0) ? 1 : (sq[v] ? 2 : 0);
    }
    return total;
  }
  if (k == 2) {
    // alpha^2 = r0 + r1 alpha read off once; elements are c0 + c1 alpha
    Field K(F.p(), 2);
    std::vector<Int> rc = K.coords(K.mul(K.alpha(), K.alpha()));
    uint64_t r0 = to_u64(rc[0]), r1 = to_u64(rc[1]);
    uint64_t qn = p * p;
    auto mul2 = [&](uint64_t a0, uint64_t a1, uint64_t b0, uint64_t b1,
                    uint64_t& o0, uint64_t& o1) {
      uint64_t t = (a1 * b1) % p;
      o0 = (a0 * b0 + t * r0) % p;
      o1 = (a0 * b1 + a1 * b0 + t * r1) % p;
    };
    std::vector<bool> sq(qn, false);
    for (uint64_t c1 = 0; c1 < p; ++c1) {
      for (uint64_t c0 = 0; c0 < p; ++c0) {
        uint64_t s0, s1;
        mul2(c0, c1, c0, c1, s0, s1);
        sq[s0 + s1 * p] = true;
      }
    }
    uint64_t total = 0;
    for (uint64_t c1 = 0; c1 < p; ++c1) {
      for (uint64_t c0 = 0; c0 < p; ++c0) {
        uint64_t v0 = 0, v1 = 0;
        for (size_t i = fb.size(); i-- > 0;) {
          mul2(v0, v1, c0, c1, v0, v1);
          v0 += fb[i];
          if (v0 >= p) v0 -= p;
        }
        uint64_t idx = v0 + v1 * p;
        total += (idx == 0) ? 1 : (sq[idx] ? 2 : 0);
      }
    }
    return total;
  }
  Field K(F.p(), int(k));
  uint64_t qn = to_u64(pow_int(F.p(), k));
  std::vector<FieldElement> fk;
  for (uint64_t c : fb) fk.push_back(K.from_int(Int(c)));
  std::vector<bool> sq(qn, false);
  std::vector<Int> digits(k, 0);
  auto next_digit = [&]() {
    for (unsigned j = 0; j < k; ++j) {
      digits[j] += 1;
      if (digits[j] < K.p()) return;
      digits[j] = 0;
    }
  };
  for (uint64_t i = 0; i < qn; ++i, next_digit()) {
    FieldElement z = K.from_coords(digits);
    sq[elem_index(K, K.mul(z, z))] = true;
  }
  digits.assign(k, 0);
  uint64_t total = 0;
  for (uint64_t i = 0; i < qn; ++i, next_digit()) {
    FieldElement x = K.from_coords(digits);
    FieldElement v = K.zero();
    for (size_t j = fk.size(); j-- > 0;) v = K.add(K.mul(v, x), fk[j]);
    if (K.is_zero(v)) {
      total += 1;
    } else if (sq[elem_index(K, v)]) {
      total += 2;
    }
  }
  return total;
}

// Independent recount for tiny fields: test every (x, y) pair directly.
inline uint64_t affine_count_pairs(const CurveParams& C, unsigned k) {
  const Field& F = C.field();
  Field Kown(F.p(), int(k));
  const Field& K = Kown;
  uint64_t qn = to_u64(pow_int(F.p(), k));
  std::vector<FieldElement> fk;
  for (const FieldElement& c : C.f().coeffs()) {
    fk.push_back(K.from_int(F.coords(c)[0]));
  }
  std::vector<FieldElement> elems;
  elems.reserve(qn);
  std::vector<Int> digits(k, 0);
  for (uint64_t i = 0; i < qn; ++i) {
    elems.push_back(K.from_coords(digits));
    for (unsigned j = 0; j < k; ++j) {
      digits[j] += 1;
      if (digits[j] < K.p()) break;
      digits[j] = 0;
    }
  }
  uint64_t total = 0;
  for (const FieldElement& x : elems) {
    FieldElement v = K.zero();
    for (size_t j = fk.size(); j-- > 0;) v = K.add(K.mul(v, x), fk[j]);
    for (const FieldElement& y : elems) {
      if (K.is_zero(K.sub(K.mul(y, y), v))) ++total;
    }
  }
  return total;
}

}  // namespace detail

// Number of points on the curve over the degree-k extension, by exhaustive
// enumeration (one point at infinity plus the affine total). Two independent
// enumeration strategies are cross-checked on fields small enough to afford
// both.
inline Int naive_counts(const CurveParams& C, unsigned k) {
  const Field& F = C.field();
  check(F.k() == 1, ErrorKind::BadInput,
        "counting oracle needs a prime base field");
  check(k >= 1 && k <= 26, ErrorKind::BadInput,
        "extension degree out of range");
  Int Q = pow_int(F.p(), k);
  check(Q <= (Int(1) << 26), ErrorKind::FieldTooLarge,
        "field too large for exhaustive counting");
  uint64_t affine = detail::affine_count_table(C, k);
  if (Q <= (Int(1) << 12)) {
    uint64_t again = detail::affine_count_pairs(C, k);
    invariant(affine == again, "enumeration strategies disagree");
  }
  return Int(affine) + 1;
}

namespace detail {

struct IntervalHits {
  std::vector<Int> hits;
  bool capped = false;
};

// Every exponent in [lo, hi] annihilating x: baby-step giant-step over the
// interval, with hash matches confirmed by a direct power. The symmetric
// hash lets one giant row cover both signs of the baby offset. More than
// cap hits flags the scan as truncated; the collected prefix still exposes
// the element order as the least gap.
template <class Box>
IntervalHits annihilators_in_interval(const Box& box,
                                      const typename Box::Element& x,
                                      const Int& lo, const Int& hi,
                                      size_t cap = 4096) {
  using Elem = typename Box::Element;
  IntervalHits out;
  Int width = hi - lo + 1;
  invariant(width >= 1, "order scan needs a nonempty interval");
  Int mi = isqrt(width) + 1;
  check(mi <= (Int(1) << 26), ErrorKind::FieldTooLarge,
        "baby table would not fit in memory");
  uint64_t m = to_u64(mi);
  std::vector<std::pair<uint64_t, uint32_t>> babies;
  babies.reserve(m);
  Elem cur = box.identity();
  for (uint64_t k = 0; k < m; ++k) {
    babies.push_back({box.hash64(cur), uint32_t(k)});
    cur = box.compose(cur, x);
  }
  std::sort(babies.begin(), babies.end());
  Elem gstep = box.invert(cur);                 // x^{-m}
  Elem row = box.invert(box_pow(box, x, lo));   // x^{-lo}
  bool stop = false;
  auto try_hit = [&](const Int& n) {
    if (stop || n < 0 || n >= width) return;
    if (!box.is_identity(box_pow(box, x, lo + n))) return;
    out.hits.push_back(lo + n);
    if (out.hits.size() > cap) {
      out.capped = true;
      stop = true;
    }
  };
  for (Int i = 0; !stop && i * m <= width + m; ++i) {
    uint64_t h = box.hash64(row);
    auto [b, e] = std::equal_range(
        babies.begin(), babies.end(), std::pair<uint64_t, uint32_t>{h, 0},
        [](const auto& u, const auto& v) { return u.first < v.first; });
    Int im = i * Int(m);
    for (auto it = b; it != e && !stop; ++it) {
      Int k(uint64_t(it->second));
      try_hit(im + k);
      if (it->second != 0) try_hit(im - k);
    }
    row = box.compose(row, gstep);
  }
  std::sort(out.hits.begin(), out.hits.end());
  out.hits.erase(std::unique(out.hits.begin(), out.hits.end()),
                 out.hits.end());
  return out;
}

// The unique group order inside [lo, hi]: sampled element orders (least gaps
// of the annihilator scans) accumulate into an lcm until a single multiple
// remains; leftover ties go to Sylow structure analysis.
template <class Box>
Int pinned_order(const Box& box, SplitMix64& rng, const Int& lo,
                 const Int& hi) {
  Int L = 1;
  bool have = false;
  for (int probe = 0; probe < 8; ++probe) {
    typename Box::Element x = box.random_element(rng);
    if (box.is_identity(x)) continue;
    IntervalHits res = annihilators_in_interval(box, x, lo, hi);
    if (!res.capped && res.hits.size() == 1) return res.hits[0];
    invariant(res.hits.size() >= 2, "interval scan must see the group order");
    Int d = res.hits[1] - res.hits[0];
    for (size_t t = 2; t < res.hits.size(); ++t) {
      Int gap = res.hits[t] - res.hits[t - 1];
      if (gap < d) d = gap;
    }
    L = lcm_int(L, d);
    have = true;
    auto [count, first] = multiples_in_interval(L, lo, hi);
    if (count == 1) return first;
  }
  check(have, ErrorKind::Ambiguous, "no usable element for the order scan");
  auto [count, first] = multiples_in_interval(L, lo, hi);
  check(count <= 4096, ErrorKind::Ambiguous,
        "sampled exponents pin too little of the interval");
  std::vector<Int> cands;
  for (Int t = 0; t < count; ++t) cands.push_back(first + t * L);
  auto settled = settle_order(box, cands, rng, Int(1) << 44);
  check(settled.has_value(), ErrorKind::Ambiguous,
        "several orders fit every sampled element");
  return *settled;
}

}  // namespace detail

// Exact Jacobian order of a small curve. Fields whose group fits exhaustive
// point counting go through Newton's identities on the counts; larger ones
// run the interval annihilator scan over the full Weil interval.
inline Int naive_jacobian_order(const CurveParams& C, bool force_scan = false) {
  const Field& F = C.field();
  check(F.k() == 1, ErrorKind::BadInput,
        "order oracle needs a prime base field");
  unsigned g = C.genus();
  const Int& q = F.p();
  Int qg = pow_int(q, g);
  check(qg <= (Int(1) << 40), ErrorKind::FieldTooLarge,
        "field too large for the exhaustive order oracle");
  if (!force_scan && qg <= (Int(1) << 26)) {
    std::vector<Int> counts;
    for (unsigned k = 1; k <= g; ++k) counts.push_back(naive_counts(C, k));
    return lpoly_eval(lpoly_from_counts(q, g, counts), 1);
  }
  auto [lo, hi] = weil_interval(q, g);
  if (lo < 1) lo = 1;
  JacobianBox box(C);
  SplitMix64 rng = detail::oracle_rng(C, 0x6f64);
  return detail::pinned_order(box, rng, lo, hi);
}

// Reference L-polynomial from exhaustive data alone: the first point counts
// fix the leading coefficients through Newton's identities, and the one
// missing coefficient comes from the group order, scanned over an interval
// sharpened by those counts.
inline LPolynomial oracle_lpoly(const CurveParams& C) {
  const Field& F = C.field();
  check(F.k() == 1, ErrorKind::BadInput, "oracle needs a prime base field");
  const Int& q = F.p();
  unsigned g = C.genus();
  Int N1 = naive_counts(C, 1);
  Int a1 = N1 - (q + 1);
  JacobianBox box(C);
  SplitMix64 rng = detail::oracle_rng(C, 0x6c70);
  LPolynomial P;
  if (g == 2) {
    Int base = q * q + 1 + (q + 1) * a1;
    Int lo = base - 6 * q, hi = base + 6 * q;
    auto [wlo, whi] = weil_interval(q, 2);
    if (lo < wlo) lo = wlo;
    if (hi > whi) hi = whi;
    if (lo < 1) lo = 1;
    Int P1 = detail::pinned_order(box, rng, lo, hi);
    Int a2 = P1 - base;
    P = lpoly_from_low(q, 2, {a1, a2});
  } else {
    Int N2 = naive_counts(C, 2);
    Int s1 = q + 1 - N1, s2 = q * q + 1 - N2;
    Int two_a2 = s1 * s1 - s2;
    invariant(mpz_even_p(two_a2.get_mpz_t()) != 0,
              "second power sum must match the trace parity");
    Int a2 = two_a2 / 2;
    Int base = q * q * q + 1 + (q * q + 1) * a1 + (q + 1) * a2;
    Int spread = isqrt(400 * q * q * q);
    Int lo = base - spread, hi = base + spread;
    auto [wlo, whi] = weil_interval(q, 3);
    if (lo < wlo) lo = wlo;
    if (hi > whi) hi = whi;
    if (lo < 1) lo = 1;
    Int P1 = detail::pinned_order(box, rng, lo, hi);
    Int a3 = P1 - base;
    P = lpoly_from_low(q, 3, {a1, a2, a3});
  }
  check(validate_lpoly(P).ok, ErrorKind::InvalidCounts,
        "exhaustive data is not Weil-consistent");
  return P;
}

}  // namespace jacsearch
