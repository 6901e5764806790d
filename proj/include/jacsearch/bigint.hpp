#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace jacsearch {

using Int = mpz_class;

inline size_t bit_length(const Int& n) {
  if (n == 0) return 0;
  return mpz_sizeinbase(n.get_mpz_t(), 2);
}

inline Int isqrt(const Int& n) {
  check(n >= 0, ErrorKind::BadInput, "isqrt of negative");
  Int r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

// Floor of the k-th root.
inline Int iroot(const Int& n, unsigned long k) {
  check(k >= 1, ErrorKind::BadInput, "iroot with k = 0");
  check(n >= 0, ErrorKind::BadInput, "iroot of negative");
  Int r;
  mpz_root(r.get_mpz_t(), n.get_mpz_t(), k);
  return r;
}

inline Int pow_int(const Int& base, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

inline Int pow_mod(const Int& base, const Int& e, const Int& mod) {
  Int r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), mod.get_mpz_t());
  return r;
}

inline Int gcd_int(const Int& a, const Int& b) {
  Int r;
  mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

inline Int lcm_int(const Int& a, const Int& b) {
  Int r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

inline bool is_square(const Int& n) {
  return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

inline bool fits_u64(const Int& n) {
  return n >= 0 && mpz_sizeinbase(n.get_mpz_t(), 2) <= 64;
}

inline uint64_t to_u64(const Int& n) {
  static_assert(sizeof(unsigned long) == 8, "64-bit unsigned long expected");
  check(fits_u64(n), ErrorKind::BadInput, "value does not fit in 64 bits");
  return mpz_get_ui(n.get_mpz_t());
}

// Integer endpoints of [(sqrt(q)-1)^(2g), (sqrt(q)+1)^(2g)], the range of
// possible group orders for a genus-g Jacobian over a q-element field.
// Expanding (sqrt(q)+-1)^(2g) = A +- Bc*sqrt(q) with integer A, Bc gives the
// inward-rounded integer interval [A - floor(Bc*sqrt(q)), A + floor(Bc*sqrt(q))].
inline std::pair<Int, Int> weil_interval(const Int& q, unsigned g) {
  check(q >= 2, ErrorKind::BadInput, "field size must be at least 2");
  check(g >= 1 && g <= 16, ErrorKind::BadInput, "genus out of range");
  Int a = 0, bc = 0;
  for (unsigned j = 0; j <= 2 * g; ++j) {
    Int binom;
    mpz_bin_uiui(binom.get_mpz_t(), 2 * g, j);
    if (j % 2 == 0) {
      a += binom * pow_int(q, j / 2);
    } else {
      bc += binom * pow_int(q, (j - 1) / 2);
    }
  }
  Int s = isqrt(bc * bc * q);
  return {a - s, a + s};
}

// ---------------------------------------------------------------------------
// Integer expressions: "2^61-1", "3*10^16+29", "(2^10+1)*3".

namespace detail {

struct ExprParser {
  const std::string& s;
  size_t i = 0;

  explicit ExprParser(const std::string& str) : s(str) {}

  void skip_ws() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }

  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }

  Int parse_expr() {
    Int v = parse_term();
    for (;;) {
      if (eat('+')) {
        v += parse_term();
      } else if (eat('-')) {
        v -= parse_term();
      } else {
        return v;
      }
    }
  }

  Int parse_term() {
    Int v = parse_factor();
    while (eat('*')) v *= parse_factor();
    return v;
  }

  Int parse_factor() {
    Int base = parse_atom();
    if (eat('^')) {
      Int e = parse_factor();
      check(e >= 0 && e <= 0xFFFFFFFF, ErrorKind::BadInput,
            "exponent out of range");
      return pow_int(base, mpz_get_ui(e.get_mpz_t()));
    }
    return base;
  }

  Int parse_atom() {
    skip_ws();
    if (eat('-')) return -parse_atom();
    if (eat('(')) {
      Int v = parse_expr();
      check(eat(')'), ErrorKind::BadInput, "missing ')'");
      return v;
    }
    size_t start = i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    check(i > start, ErrorKind::BadInput, "expected a number");
    return Int(s.substr(start, i - start));
  }
};

}  // namespace detail

inline Int parse_int_expr(const std::string& s) {
  detail::ExprParser p(s);
  Int v = p.parse_expr();
  p.skip_ws();
  check(p.i == s.size(), ErrorKind::BadInput,
        "trailing characters in integer expression");
  return v;
}

// ---------------------------------------------------------------------------
// Primes.

inline std::vector<uint32_t> primes_below(uint32_t limit) {
  std::vector<uint32_t> out;
  if (limit <= 2) return out;
  std::vector<bool> comp(limit, false);
  for (uint32_t p = 2; uint64_t(p) * p < limit; ++p) {
    if (comp[p]) continue;
    for (uint64_t m = uint64_t(p) * p; m < limit; m += p) comp[m] = true;
  }
  for (uint32_t p = 2; p < limit; ++p) {
    if (!comp[p]) out.push_back(p);
  }
  return out;
}

namespace detail {

// Strong probable prime test to the given base; n odd, n > 2.
inline bool mr_round(const Int& n, const Int& base) {
  Int d = n - 1;
  unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
  d >>= s;
  Int x = pow_mod(base % n, d, n);
  if (x == 1 || x == n - 1) return true;
  for (unsigned long r = 1; r < s; ++r) {
    x = x * x % n;
    if (x == n - 1) return true;
  }
  return false;
}

// Strong Lucas probable prime test with the standard parameter choice
// (first D in 5, -7, 9, -11, ... with Jacobi(D|n) = -1; P = 1, Q = (1-D)/4).
inline bool strong_lucas_round(const Int& n) {
  long d_abs = 5;
  int sign = 1;
  Int D;
  for (;;) {
    D = sign * d_abs;
    int j = mpz_jacobi(D.get_mpz_t(), n.get_mpz_t());
    if (j == -1) break;
    if (j == 0 && abs(D) != n) return false;
    d_abs += 2;
    sign = -sign;
    // A perfect square never yields Jacobi -1; callers reject squares first.
    invariant(d_abs < 1000000, "no Lucas discriminant found");
  }
  Int Q = (1 - D) / 4;
  Int k = n + 1;
  unsigned long s = mpz_scan1(k.get_mpz_t(), 0);
  Int d = k >> s;

  // Compute U_d, V_d mod n by the binary double-and-add chain.
  Int U = 1, V = 1, Qk = Q % n;
  if (Qk < 0) Qk += n;
  size_t bits = bit_length(d);
  for (size_t b = bits - 1; b-- > 0;) {
    // (U, V, Q^k) -> (U V, V^2 - 2 Q^k, Q^2k)
    U = U * V % n;
    V = (V * V - 2 * Qk) % n;
    Qk = Qk * Qk % n;
    if (mpz_tstbit(d.get_mpz_t(), b)) {
      // index +1: U' = (U + V)/2, V' = (D U + V)/2, Q^k picks up a factor Q
      Int U2 = U + V;
      Int V2 = D * U + V;
      if (mpz_odd_p(U2.get_mpz_t())) U2 += n;
      if (mpz_odd_p(V2.get_mpz_t())) V2 += n;
      U = (U2 / 2) % n;
      V = (V2 / 2) % n;
      Qk = Qk * Q % n;
    }
    if (U < 0) U += n;
    if (V < 0) V += n;
    if (Qk < 0) Qk += n;
  }
  if (U == 0 || V == 0) return true;
  for (unsigned long r = 1; r < s; ++r) {
    V = (V * V - 2 * Qk) % n;
    if (V < 0) V += n;
    if (V == 0) return true;
    Qk = Qk * Qk % n;
  }
  return false;
}

}  // namespace detail

// Baillie-PSW style test: trial division, strong base-2 probable prime,
// strong Lucas, then two extra strong-probable-prime rounds.
inline bool is_prime(const Int& n) {
  if (n < 2) return false;
  static const uint32_t kSmall[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                    31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  for (uint32_t p : kSmall) {
    if (n == p) return true;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
  }
  if (is_square(n)) return false;
  if (!detail::mr_round(n, 2)) return false;
  if (!detail::strong_lucas_round(n)) return false;
  return detail::mr_round(n, 3) && detail::mr_round(n, 5);
}

// ---------------------------------------------------------------------------
// Factoring.

struct Factorization {
  std::vector<std::pair<Int, unsigned>> factors;  // (prime, multiplicity), increasing
  Int cofactor = 1;  // > 1 when the effort budget ran out before finishing

  bool complete() const { return cofactor == 1; }

  Int value() const {
    Int v = cofactor;
    for (const auto& [p, e] : factors) v *= pow_int(p, e);
    return v;
  }

  Int largest_prime() const {
    return factors.empty() ? Int(0) : factors.back().first;
  }
};

namespace detail {

inline void push_factor(Factorization& f, const Int& p, unsigned e) {
  for (auto& [q, m] : f.factors) {
    if (q == p) {
      m += e;
      return;
    }
  }
  f.factors.emplace_back(p, e);
}

inline void sort_factors(Factorization& f) {
  std::sort(f.factors.begin(), f.factors.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
}

inline const std::vector<uint32_t>& default_trial_primes() {
  static const std::vector<uint32_t> primes = primes_below(1u << 24);
  return primes;
}

// Brent's cycle variant of Pollard's rho. Returns a nontrivial factor of n
// (odd composite) or 0 if the step budget ran out.
inline Int pollard_rho_brent(const Int& n, SplitMix64& rng,
                             uint64_t max_steps) {
  Int y = Int(rng.next()) % n;
  Int c = Int(rng.next_range(1, 0xFFFFFFFF)) % n;
  if (c == 0) c = 1;
  const unsigned long m = 128;
  Int g = 1, q = 1, x, ys;
  uint64_t steps = 0;
  for (unsigned long r = 1; g == 1; r <<= 1) {
    x = y;
    for (unsigned long j = 0; j < r; ++j) y = (y * y + c) % n;
    for (unsigned long k = 0; k < r && g == 1; k += m) {
      ys = y;
      unsigned long lim = std::min(m, r - k);
      for (unsigned long j = 0; j < lim; ++j) {
        y = (y * y + c) % n;
        Int diff = x - y;
        if (diff < 0) diff += n;
        q = q * diff % n;
      }
      g = gcd_int(q, n);
      steps += lim;
      if (steps > max_steps) return 0;
    }
  }
  if (g == n) {
    // Backtrack one step at a time to split the batched gcd.
    do {
      ys = (ys * ys + c) % n;
      Int diff = x - ys;
      if (diff < 0) diff += n;
      g = gcd_int(diff, n);
    } while (g == 1);
  }
  return g == n ? Int(0) : g;
}

}  // namespace detail

// Strip prime factors up to the bound by sieved trial division. The cofactor
// holds whatever remains (1, a prime, or a composite; callers classify).
inline Factorization factor_bounded(Int n, uint32_t bound = 1u << 24) {
  check(n >= 1, ErrorKind::BadInput, "factor_bounded needs n >= 1");
  Factorization f;
  const std::vector<uint32_t>& primes = (bound == (1u << 24))
                                            ? detail::default_trial_primes()
                                            : primes_below(bound);
  for (uint32_t p : primes) {
    if (p >= bound) break;
    if (Int(p) * p > n) break;
    if (!mpz_divisible_ui_p(n.get_mpz_t(), p)) continue;
    unsigned e = 0;
    do {
      mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
      ++e;
    } while (mpz_divisible_ui_p(n.get_mpz_t(), p));
    detail::push_factor(f, p, e);
  }
  if (n > 1 && n < Int(bound) * bound) {
    // Any remaining value below bound^2 with no prime factor < bound is prime.
    detail::push_factor(f, n, 1);
    n = 1;
  }
  f.cofactor = n;
  detail::sort_factors(f);
  return f;
}

// Full effort-bounded factorization: trial division up to trial_bound, then
// rho attempts on composite cofactors. Deterministic for fixed arguments.
inline Factorization factorize(const Int& n, uint32_t trial_bound = 1u << 24,
                               int rho_attempts = 40,
                               uint64_t rho_steps = 1u << 20) {
  Factorization f = factor_bounded(n, trial_bound);
  if (f.cofactor == 1) return f;

  SplitMix64 rng = rng_for(0x8811a7c34fd2e6b1ull,
                           to_u64(f.cofactor % Int(0xFFFFFFFFFFFFul)));
  std::vector<Int> pending{f.cofactor};
  f.cofactor = 1;
  int attempts_left = rho_attempts;
  while (!pending.empty()) {
    Int m = pending.back();
    pending.pop_back();
    if (m == 1) continue;
    if (is_prime(m)) {
      detail::push_factor(f, m, 1);
      continue;
    }
    Int d = 0;
    while (attempts_left > 0 && d == 0) {
      --attempts_left;
      d = detail::pollard_rho_brent(m, rng, rho_steps);
    }
    if (d == 0) {
      f.cofactor *= m;  // budget exhausted; leave composite remainder
      continue;
    }
    pending.push_back(d);
    pending.push_back(m / d);
  }
  detail::sort_factors(f);
  return f;
}

}  // namespace jacsearch
