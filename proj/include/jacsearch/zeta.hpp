// Frobenius L-polynomials: recovery from a known group order, validation
// against the Weil bounds, and exact orders of the derived groups (twists,
// extensions, quotients, trace zero subgroups).
#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "bigint.hpp"
#include "blackbox.hpp"
#include "errors.hpp"
#include "genalg.hpp"
#include "poly.hpp"
#include "rng.hpp"

namespace jacsearch {

// P(z) = sum a_i z^i of degree 2g with a_0 = 1; the numerator of the zeta
// function of a genus-g curve over F_q.
struct LPolynomial {
  Int q;
  unsigned g = 0;
  std::vector<Int> a;
};

inline bool operator==(const LPolynomial& x, const LPolynomial& y) {
  return x.q == y.q && x.g == y.g && x.a == y.a;
}

inline Int lpoly_eval(const LPolynomial& P, const Int& z) {
  Int v = 0;
  for (size_t i = P.a.size(); i-- > 0;) v = v * z + P.a[i];
  return v;
}

// Build the full coefficient list from a_1..a_g; the upper half follows from
// the functional equation a_{2g-i} = q^{g-i} a_i.
inline LPolynomial lpoly_from_low(const Int& q, unsigned g,
                                  const std::vector<Int>& low) {
  check(g >= 1 && g <= 8, ErrorKind::BadInput, "unsupported genus");
  check(low.size() == g, ErrorKind::BadInput,
        "need exactly g low coefficients");
  LPolynomial P{q, g, std::vector<Int>(2 * g + 1)};
  P.a[0] = 1;
  for (unsigned i = 1; i <= g; ++i) P.a[i] = low[i - 1];
  for (unsigned j = 1; j <= g; ++j) P.a[g + j] = pow_int(q, j) * P.a[g - j];
  return P;
}

// The quadratic twist negates the odd coefficients.
inline LPolynomial twist_lpoly(const LPolynomial& P) {
  LPolynomial T = P;
  for (size_t i = 1; i < T.a.size(); i += 2) T.a[i] = -T.a[i];
  return T;
}

namespace detail {

inline void trim_intpoly(std::vector<Int>& v) {
  while (!v.empty() && v.back() == 0) v.pop_back();
}

// Resultant of two integer polynomials (ascending coefficients) via
// fraction-free Bareiss elimination of the Sylvester matrix.
inline Int resultant_int(std::vector<Int> A, std::vector<Int> B) {
  trim_intpoly(A);
  trim_intpoly(B);
  if (A.empty() || B.empty()) return 0;
  int da = int(A.size()) - 1, db = int(B.size()) - 1;
  if (da == 0 && db == 0) return 1;
  if (db == 0) return pow_int(B[0], unsigned(da));
  if (da == 0) return pow_int(A[0], unsigned(db));
  int n = da + db;
  std::vector<std::vector<Int>> M(size_t(n), std::vector<Int>(size_t(n), 0));
  for (int r = 0; r < db; ++r)
    for (int j = 0; j <= da; ++j) M[size_t(r)][size_t(r + j)] = A[size_t(da - j)];
  for (int r = 0; r < da; ++r)
    for (int j = 0; j <= db; ++j)
      M[size_t(db + r)][size_t(r + j)] = B[size_t(db - j)];
  Int prev = 1, sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (M[size_t(k)][size_t(k)] == 0) {
      int s = -1;
      for (int r = k + 1; r < n; ++r)
        if (M[size_t(r)][size_t(k)] != 0) {
          s = r;
          break;
        }
      if (s < 0) return 0;
      std::swap(M[size_t(k)], M[size_t(s)]);
      sign = -sign;
    }
    for (int r = k + 1; r < n; ++r) {
      for (int c = k + 1; c < n; ++c) {
        M[size_t(r)][size_t(c)] =
            (M[size_t(k)][size_t(k)] * M[size_t(r)][size_t(c)] -
             M[size_t(r)][size_t(k)] * M[size_t(k)][size_t(c)]) /
            prev;
      }
      M[size_t(r)][size_t(k)] = 0;
    }
    prev = M[size_t(k)][size_t(k)];
  }
  return sign * M[size_t(n - 1)][size_t(n - 1)];
}

// T^k mod Q for monic integer Q, by square and multiply; stays in Z[T].
inline std::vector<Int> powmod_monic_int(uint64_t k, const std::vector<Int>& Q) {
  size_t dq = Q.size() - 1;
  auto reduce = [&](std::vector<Int> v) {
    for (size_t d = v.size(); d-- > dq;) {
      if (v[d] == 0) continue;
      Int c = v[d];
      for (size_t i = 0; i < dq; ++i) v[d - dq + i] -= c * Q[i];
      v[d] = 0;
    }
    v.resize(dq);
    return v;
  };
  auto mul = [&](const std::vector<Int>& x, const std::vector<Int>& y) {
    std::vector<Int> prod(x.size() + y.size() - 1, 0);
    for (size_t i = 0; i < x.size(); ++i)
      for (size_t j = 0; j < y.size(); ++j) prod[i + j] += x[i] * y[j];
    return reduce(std::move(prod));
  };
  std::vector<Int> base(dq + 1, 0);
  base[1] = 1;
  base = reduce(std::move(base));
  std::vector<Int> acc(dq, 0);
  acc[0] = 1;
  while (k) {
    if (k & 1) acc = mul(acc, base);
    k >>= 1;
    if (k) base = mul(base, base);
  }
  return acc;
}

inline void check_lpoly_shape(const LPolynomial& P) {
  check(P.g >= 1 && P.g <= 8, ErrorKind::BadInput, "unsupported genus");
  check(P.q >= 2, ErrorKind::BadInput, "field size must be at least two");
  check(P.a.size() == 2 * size_t(P.g) + 1, ErrorKind::BadInput,
        "coefficient list must have length 2g+1");
  check(P.a[0] == 1, ErrorKind::BadInput,
        "constant coefficient must be one");
}

}  // namespace detail

// Order of the group over the degree-k extension: the product of P over all
// k-th roots of unity, computed exactly as the resultant of the monic
// reversed polynomial Q (whose roots are the Frobenius eigenvalues) with
// 1 - T^k reduced mod Q.
inline Int extension_order(const LPolynomial& P, unsigned k) {
  detail::check_lpoly_shape(P);
  check(k >= 1, ErrorKind::BadInput, "extension degree must be positive");
  std::vector<Int> Q(P.a.rbegin(), P.a.rend());
  std::vector<Int> r = detail::powmod_monic_int(k, Q);
  std::vector<Int> S(r.size());
  for (size_t i = 0; i < r.size(); ++i) S[i] = -r[i];
  if (S.empty()) S.push_back(0);
  S[0] += 1;
  return detail::resultant_int(Q, S);
}

// Order of the quotient of the degree-a extension group by the degree-b one.
inline Int quotient_order(const LPolynomial& P, unsigned a, unsigned b) {
  check(b >= 1 && a >= b && a % b == 0, ErrorKind::BadInput,
        "extension degrees must nest");
  Int ea = extension_order(P, a);
  Int eb = extension_order(P, b);
  check(eb != 0 && ea % eb == 0, ErrorKind::NonDivisibleOrders,
        "extension orders do not divide; the polynomial is inconsistent");
  return ea / eb;
}

// Order of the trace zero subgroup for k in {2,3}. The quotient order is
// always a subgroup order; it is the exact order when the base group has no
// k-torsion, certified here by k not dividing P(1).
struct TraceZeroOrder {
  Int order;
  bool exact = false;
};

inline TraceZeroOrder trace_zero_order(const LPolynomial& P, unsigned k) {
  check(k == 2 || k == 3, ErrorKind::BadInput,
        "trace zero subgroups are available for degrees two and three");
  TraceZeroOrder out;
  out.order = quotient_order(P, k, 1);
  out.exact = !mpz_divisible_ui_p(lpoly_eval(P, 1).get_mpz_t(), k);
  return out;
}

namespace detail {

// Roots of a monic real polynomial of degree at most three, closed form.
inline std::vector<std::complex<long double>> low_degree_roots(
    const std::vector<long double>& c) {
  using C = std::complex<long double>;
  std::vector<C> roots;
  if (c.size() == 2) {
    roots.push_back(C(-c[0] / c[1], 0));
  } else if (c.size() == 3) {
    C b(c[1], 0), a(c[0], 0);
    C d = std::sqrt(b * b - C(4, 0) * a);
    roots.push_back((-b + d) / C(2, 0));
    roots.push_back((-b - d) / C(2, 0));
  } else if (c.size() == 4) {
    long double b = c[2], cc = c[1], d = c[0];
    // depressed cubic s^3 + p s + r with t = s - b/3
    long double p = cc - b * b / 3.0L;
    long double r = 2.0L * b * b * b / 27.0L - b * cc / 3.0L + d;
    C disc = std::sqrt(C(r * r / 4.0L + p * p * p / 27.0L, 0));
    C u = std::pow(C(-r / 2.0L, 0) + disc, C(1.0L / 3.0L, 0));
    if (std::abs(u) < 1e-30L) u = std::pow(C(-r / 2.0L, 0) - disc, C(1.0L / 3.0L, 0));
    const C omega(-0.5L, 0.866025403784438646763L);
    C w(1, 0);
    for (int j = 0; j < 3; ++j) {
      C s = (std::abs(u) < 1e-30L) ? C(0, 0) : u * w - C(p / 3.0L, 0) / (u * w);
      roots.push_back(s - C(b / 3.0L, 0));
      w *= omega;
    }
  }
  return roots;
}

// Numeric check that all inverse roots sit on the circle of radius sqrt(q).
// Works through the real polynomial whose roots are the eigenvalue pair sums
// x_i = alpha_i + q/alpha_i; each x gives back the pair via a quadratic.
inline std::optional<std::string> root_circle_advisory(const LPolynomial& P) {
  if (P.g > 3) return std::nullopt;
  long double q = mpz_get_d(P.q.get_mpz_t());
  auto coef = [&](unsigned i) -> long double {
    return mpz_get_d(P.a[i].get_mpz_t());
  };
  std::vector<long double> tr;
  if (P.g == 1) {
    tr = {coef(1), 1.0L};
  } else if (P.g == 2) {
    tr = {coef(2) - 2.0L * q, coef(1), 1.0L};
  } else {
    tr = {coef(3) - 2.0L * q * coef(1), coef(2) - 3.0L * q, coef(1), 1.0L};
  }
  long double rq = std::sqrt(q);
  for (const auto& x : low_degree_roots(tr)) {
    std::complex<long double> d = std::sqrt(x * x - 4.0L * q);
    for (int s = -1; s <= 1; s += 2) {
      std::complex<long double> alpha = (x + (long double)(s)*d) / 2.0L;
      long double mag = std::abs(alpha);
      if (std::abs(mag - rq) > 1e-6L * rq) {
        return "advisory: an inverse root is off the half-power circle";
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

struct LPolyReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Exact Weil-consistency checks: unit constant coefficient, functional
// equation, binomial coefficient bounds, and interval membership of every
// extension order up to degree four. A numeric root-magnitude check is
// appended as advisory only; it never flips the verdict.
inline LPolyReport validate_lpoly(const LPolynomial& P) {
  check(P.g >= 1 && P.g <= 8, ErrorKind::BadInput, "unsupported genus");
  check(P.q >= 2, ErrorKind::BadInput, "field size must be at least two");
  check(P.a.size() == 2 * size_t(P.g) + 1, ErrorKind::BadInput,
        "coefficient list must have length 2g+1");
  LPolyReport rep;
  auto flag = [&](std::string s) {
    rep.ok = false;
    rep.violations.push_back(std::move(s));
  };
  if (P.a[0] != 1) flag("constant coefficient must be one");
  for (unsigned i = 0; i < P.g; ++i) {
    if (P.a[2 * P.g - i] != pow_int(P.q, P.g - i) * P.a[i]) {
      flag("functional equation fails between indices " + std::to_string(i) +
           " and " + std::to_string(2 * P.g - i));
    }
  }
  for (unsigned i = 0; i <= 2 * P.g; ++i) {
    Int bound;
    mpz_bin_uiui(bound.get_mpz_t(), 2 * P.g, i);
    if (P.a[i] * P.a[i] > bound * bound * pow_int(P.q, i)) {
      flag("coefficient bound fails at index " + std::to_string(i));
    }
  }
  if (rep.ok) {
    for (unsigned k = 1; k <= 4; ++k) {
      Int ext = extension_order(P, k);
      auto [lo, hi] = weil_interval(pow_int(P.q, k), P.g);
      if (ext < lo || ext > hi) {
        flag("order outside the Weil interval for extension " +
             std::to_string(k));
      }
    }
  }
  if (rep.ok) {
    if (auto adv = detail::root_circle_advisory(P)) {
      rep.violations.push_back(*adv);
    }
  }
  return rep;
}

// Coefficients from exact point counts N_1..N_g over the first g extensions,
// via Newton's identities on the eigenvalue power sums; the upper half comes
// from the functional equation.
inline LPolynomial lpoly_from_counts(const Int& q, unsigned g,
                                     const std::vector<Int>& counts) {
  check(g >= 1 && g <= 3, ErrorKind::BadInput, "unsupported genus");
  check(counts.size() == g, ErrorKind::BadInput,
        "need exactly g point counts");
  std::vector<Int> s(g + 1);
  for (unsigned k = 1; k <= g; ++k) s[k] = pow_int(q, k) + 1 - counts[k - 1];
  LPolynomial P{q, g, std::vector<Int>(2 * g + 1)};
  P.a[0] = 1;
  for (unsigned k = 1; k <= g; ++k) {
    Int acc = 0;
    for (unsigned i = 1; i <= k; ++i) acc += s[i] * P.a[k - i];
    acc = -acc;
    check(mpz_divisible_ui_p(acc.get_mpz_t(), k), ErrorKind::InvalidCounts,
          "counts break the integrality of Newton's identities");
    mpz_divexact_ui(P.a[k].get_mpz_t(), acc.get_mpz_t(), k);
  }
  for (unsigned j = 1; j <= g; ++j) P.a[g + j] = pow_int(q, j) * P.a[g - j];
  auto rep = validate_lpoly(P);
  check(rep.ok, ErrorKind::InvalidCounts,
        "counts do not produce a Weil-consistent polynomial");
  return P;
}

// ---------------------------------------------------------------------------
// Near-prime classification.

enum class NearPrimeStatus { Yes, No, Inconclusive };

struct NearPrime {
  NearPrimeStatus status = NearPrimeStatus::Inconclusive;
  Int largest_prime;  // largest certified prime factor (one if none found)
  Int cofactor;       // complement of the largest prime; the unfactored
                      // composite part when inconclusive
};

namespace detail {

// Exact size-ratio test: L at least the num/den power of N.
inline bool size_ratio_holds(const Int& L, const Int& N, unsigned num,
                             unsigned den) {
  return pow_int(L, den) >= pow_int(N, num);
}

}  // namespace detail

// Strips factors by trial division and a few rho rounds, certifies the rest
// with a strong-probable-prime plus Lucas test, and reports whether the
// largest certified prime reaches the num/den fraction of the size of N.
// A composite cofactor that can neither reach nor rule out the threshold is
// reported as inconclusive rather than guessed.
inline NearPrime near_prime(const Int& N, unsigned num = 19, unsigned den = 20,
                            uint32_t trial_bound = 1u << 24,
                            int rho_attempts = 40) {
  check(N >= 2, ErrorKind::BadInput, "need an integer of at least two");
  check(num >= 1 && den >= num, ErrorKind::BadInput,
        "threshold must be a fraction of at most one");
  Factorization f = factorize(N, trial_bound, rho_attempts);
  NearPrime out;
  Int known = f.largest_prime();
  if (f.complete()) {
    out.largest_prime = known;
    out.cofactor = N / known;
    out.status = detail::size_ratio_holds(known, N, num, den)
                     ? NearPrimeStatus::Yes
                     : NearPrimeStatus::No;
    return out;
  }
  if (known > 1 && detail::size_ratio_holds(known, N, num, den)) {
    out.largest_prime = known;
    out.cofactor = N / known;
    out.status = NearPrimeStatus::Yes;
    return out;
  }
  // Every prime hiding in the composite part exceeds the trial bound, so the
  // largest one is at most the part divided by the bound.
  Int inside_cap = f.cofactor / (Int(trial_bound) + 1);
  if (!detail::size_ratio_holds(inside_cap < known ? known : inside_cap, N,
                                num, den)) {
    out.largest_prime = known > 1 ? known : Int(1);
    out.cofactor = f.cofactor;
    out.status = NearPrimeStatus::No;
    return out;
  }
  out.largest_prime = known > 1 ? known : Int(1);
  out.cofactor = f.cofactor;
  out.status = NearPrimeStatus::Inconclusive;
  return out;
}

// ---------------------------------------------------------------------------
// Security normalization and curve shape filter.

struct SecurityContext {
  unsigned genus = 2;
  unsigned extension = 1;
  bool trace_zero = false;
  bool three_divides_ext2 = false;
};

// Converts a group bit length into prime-field genus-2 equivalent bits by
// the per-context rate at which index calculus style attacks scale.
inline double security_equivalent_bits(double order_bits,
                                       const SecurityContext& c) {
  check(order_bits > 0, ErrorKind::BadInput, "bit length must be positive");
  if (c.trace_zero) {
    check(c.genus == 2 && c.extension == 3, ErrorKind::UnknownContext,
          "trace zero rating covers degree-three subgroups of genus two");
    return c.three_divides_ext2 ? order_bits * 4.0 / 5.0
                                : order_bits * 5.0 / 6.0;
  }
  if (c.genus == 2 && c.extension == 1) return order_bits;
  if (c.genus == 3 && c.extension == 1) return order_bits * 8.0 / 9.0;
  if (c.genus == 2 && c.extension == 2) return order_bits * 9.0 / 14.0;
  fail(ErrorKind::UnknownContext, "no security rating for this context");
}

// True iff the factorization pattern of f has exactly one irreducible factor
// of degree three, five, or seven.
inline bool smith_filter(const Poly& f) {
  int odd_mid = 0;
  for (int d : poly_factor_degrees(f)) {
    if (d == 3 || d == 5 || d == 7) ++odd_mid;
  }
  return odd_mid == 1;
}

// ---------------------------------------------------------------------------
// Recovery of the polynomial from the exact base order, driving the quadratic
// twist as a black-box group.

namespace detail {

// Drop candidate exponents that fail to annihilate fresh random elements.
template <class Box>
void refine_by_annihilation(const Box& box, std::vector<Int>& cands,
                            SplitMix64& rng, unsigned rounds) {
  for (unsigned r = 0; r < rounds && cands.size() > 1; ++r) {
    typename Box::Element x = box.random_element(rng);
    if (box.is_identity(x)) continue;
    std::vector<Int> keep;
    for (const Int& e : cands) {
      if (box.is_identity(box_pow(box, x, e))) keep.push_back(e);
    }
    cands = std::move(keep);
    if (cands.empty()) return;
  }
}

// Pin the order among several annihilating exponents: the group exponent
// divides their gcd, so the true order is the product of the Sylow component
// sizes over the primes of that gcd. Any internal inconsistency (the gcd
// falling short of the exponent, factoring stalls, component towers past the
// cap) settles nothing and the ambiguity is reported, not guessed.
template <class Box>
std::optional<Int> settle_order(const Box& box, const std::vector<Int>& cands,
                                SplitMix64& rng, const Int& size_cap) try {
  Int G = 0;
  for (const Int& e : cands) G = gcd_int(G, e);
  if (G == 0) return std::nullopt;
  Factorization fac = factorize(G);
  if (!fac.complete()) return std::nullopt;
  Int N = 1;
  for (const auto& [p, e] : fac.factors) {
    if (!fits_u64(p)) return std::nullopt;
    FactoredOrder lam;
    lam.value = G;
    lam.factors.push_back({to_u64(p), e});
    auto comp = sylow_structure(box, lam, to_u64(p), rng, size_cap);
    if (!comp) return std::nullopt;
    for (const auto& [gen, ord] : *comp) N *= Int(ord);
  }
  for (const Int& e : cands) {
    if (e == N) return N;
  }
  return std::nullopt;
} catch (const Error&) {
  return std::nullopt;
}

template <class Box>
Int pick_exponent(const Box& box, std::vector<Int>& cands, SplitMix64& rng,
                  const Int& hi) {
  check(!cands.empty(), ErrorKind::NoCandidate,
        "no admissible order fits the constraints");
  refine_by_annihilation(box, cands, rng, 40);
  check(!cands.empty(), ErrorKind::NoCandidate,
        "no candidate order annihilates the group");
  if (cands.size() == 1) return cands[0];
  Int cap = hi < (Int(1) << 44) ? hi : (Int(1) << 44);
  auto settled = settle_order(box, cands, rng, cap);
  check(settled.has_value(), ErrorKind::Ambiguous,
        "several candidate orders survive structure analysis");
  return *settled;
}

inline SplitMix64 recovery_rng(const Int& P1, const Int& q) {
  uint64_t s = 0x5bf03635u;
  s = mix64(s ^ mpz_get_ui(P1.get_mpz_t()));
  s = mix64(s ^ uint64_t(bit_length(P1)));
  s = mix64(s ^ mpz_get_ui(q.get_mpz_t()));
  return rng_for(s, 0x7a);
}

struct HitSequence {
  Int base;  // first exponent of the run
  Int len;   // number of terms, spaced by the common step
};

// One simultaneous baby-step giant-step pass over several arithmetic runs of
// exponents, all sharing the step: returns every run member that annihilates
// alpha. Babies are powers of alpha^step; giant rows advance by a batched
// right-multiplication. Matches are confirmed by a direct power, and the
// inverse-symmetric hash makes each giant row cover both signs of the baby
// offset. Overflowing hit_cap aborts with nullopt so the caller can swap in
// a fresh element.
template <class Box>
std::optional<std::vector<Int>> sequence_hits(
    const Box& box, const typename Box::Element& alpha, const Int& step,
    const std::vector<HitSequence>& seqs, size_t hit_cap) {
  using Elem = typename Box::Element;
  Int total = 0;
  Int max_len = 0;
  for (const auto& s : seqs) {
    total += s.len;
    if (s.len > max_len) max_len = s.len;
  }
  if (total == 0) return std::vector<Int>{};
  Int mi = isqrt(total) + 1;
  check(mi <= (Int(1) << 27), ErrorKind::FieldTooLarge,
        "baby table would not fit in memory");
  uint64_t m = to_u64(mi);
  Elem gamma = box_pow(box, alpha, step);
  std::vector<std::pair<uint64_t, uint32_t>> babies;
  babies.reserve(m);
  Elem cur = box.identity();
  for (uint64_t k = 0; k < m; ++k) {
    babies.push_back({box.hash64(cur), uint32_t(k)});
    if (k + 1 < m) cur = box.compose(cur, gamma);
  }
  std::sort(babies.begin(), babies.end());
  Elem gminv = box.invert(box.compose(cur, gamma));  // gamma^{-m}

  std::vector<Int> hits;
  auto try_hit = [&](const HitSequence& s, const Int& n) -> bool {
    if (n < 0 || n >= s.len) return true;
    Int e = s.base + step * n;
    if (!box.is_identity(box_pow(box, alpha, e))) return true;
    hits.push_back(e);
    return hits.size() <= hit_cap;
  };

  std::vector<Elem> rows;
  std::vector<size_t> row_seq;
  std::vector<Int> remaining;
  rows.reserve(seqs.size());
  for (size_t j = 0; j < seqs.size(); ++j) {
    rows.push_back(box.invert(box_pow(box, alpha, seqs[j].base)));
    row_seq.push_back(j);
    remaining.push_back(seqs[j].len);
  }
  for (Int i = 0; !rows.empty(); ++i) {
    Int im = i * Int(m);
    for (size_t r = 0; r < rows.size(); ++r) {
      uint64_t h = box.hash64(rows[r]);
      auto [lo, hi] = std::equal_range(
          babies.begin(), babies.end(), std::pair<uint64_t, uint32_t>{h, 0},
          [](const auto& a, const auto& b) { return a.first < b.first; });
      for (auto it = lo; it != hi; ++it) {
        Int k(uint64_t(it->second));
        if (!try_hit(seqs[row_seq[r]], im + k)) return std::nullopt;
        if (it->second != 0 && !try_hit(seqs[row_seq[r]], im - k)) {
          return std::nullopt;
        }
      }
    }
    // retire exhausted rows, then advance the survivors one giant step
    std::vector<Elem> next_rows;
    std::vector<size_t> next_seq;
    std::vector<Int> next_rem;
    for (size_t r = 0; r < rows.size(); ++r) {
      if (remaining[r] > Int(m)) {
        next_rows.push_back(rows[r]);
        next_seq.push_back(row_seq[r]);
        next_rem.push_back(remaining[r] - Int(m));
      }
    }
    rows = std::move(next_rows);
    row_seq = std::move(next_seq);
    remaining = std::move(next_rem);
    if (!rows.empty()) box.compose_all(rows, gminv);
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  return hits;
}

}  // namespace detail

// Genus-2 recovery: P(1) pins a_1 to a short arithmetic run of candidate
// twist orders spaced 2(q+1) apart; stepping a random twist element through
// the run keeps exactly the annihilating ones, and structure analysis breaks
// any remaining tie.
template <class Box>
LPolynomial recover_genus2(const Int& P1, const Box& twist_box, const Int& q,
                           SplitMix64& rng) {
  check(q >= 2, ErrorKind::BadInput, "field size must be at least two");
  check(P1 >= 1, ErrorKind::BadInput, "group order must be positive");
  const Int qp1 = q + 1;
  const Int mid = q * q + 1;
  const Int step = 2 * qp1;
  auto [wlo, whi] = weil_interval(q, 2);
  if (wlo < 1) wlo = 1;

  Int alo, ahi;
  mpz_cdiv_q(alo.get_mpz_t(), Int(P1 - mid - 6 * q).get_mpz_t(),
             qp1.get_mpz_t());
  mpz_fdiv_q(ahi.get_mpz_t(), Int(P1 - mid + 6 * q).get_mpz_t(),
             qp1.get_mpz_t());
  std::vector<Int> cands;
  for (Int a1 = alo; a1 <= ahi; ++a1) {
    if (a1 * a1 > 16 * q) continue;
    Int a2 = P1 - mid - qp1 * a1;
    if (a2 * a2 > 36 * q * q) continue;
    Int e = P1 - step * a1;
    if (e < wlo || e > whi) continue;
    cands.push_back(e);
  }
  std::sort(cands.begin(), cands.end());
  Int E = detail::pick_exponent(twist_box, cands, rng, whi);

  Int diff = P1 - E;
  invariant(diff % step == 0, "candidate order must sit on the trace grid");
  Int a1 = diff / step;
  Int a2 = P1 - mid - qp1 * a1;
  LPolynomial P = lpoly_from_low(q, 2, {a1, a2});
  check(validate_lpoly(P).ok, ErrorKind::NoCandidate,
        "recovered polynomial is not Weil-consistent");
  return P;
}

template <class Box>
LPolynomial recover_genus2(const Int& P1, const Box& twist_box, const Int& q) {
  SplitMix64 rng = detail::recovery_rng(P1, q);
  return recover_genus2(P1, twist_box, q, rng);
}

// Genus-3 recovery: 31 candidate traces each open an arithmetic run of twist
// orders spaced 2(q+1) apart; one simultaneous baby-step giant-step pass over
// all runs finds the annihilating members with about sqrt(1240 sqrt(q))
// babies. Above q = 1640 the surviving order determines the coefficients
// uniquely.
template <class Box>
LPolynomial recover_genus3(const Int& P1, const Box& twist_box, const Int& q,
                           SplitMix64& rng) {
  check(q > 1640, ErrorKind::FieldTooSmall,
        "genus-3 recovery needs a field beyond the uniqueness bound");
  check(P1 >= 1, ErrorKind::BadInput, "group order must be positive");
  const Int qp1 = q + 1;
  const Int q2p1 = q * q + 1;
  const Int q3p1 = q * q * q + 1;
  const Int step = 2 * qp1;
  auto [wlo, whi] = weil_interval(q, 3);
  if (wlo < 1) wlo = 1;
  const Int delta = P1 - q3p1;
  const Int a3cap = isqrt(400 * q * q * q);

  std::vector<detail::HitSequence> seqs;
  Int center;
  mpz_fdiv_q(center.get_mpz_t(), delta.get_mpz_t(), q2p1.get_mpz_t());
  for (Int c = center - 16; c <= center + 16; ++c) {
    if (c * c > 36 * q) continue;
    Int R = delta - q2p1 * c;
    Int base0 = q3p1 - q2p1 * c - R;
    // a2 window from the a3 cap, the a2 bound, and the Weil interval
    Int lo1, hi1, lo3, hi3;
    mpz_cdiv_q(lo1.get_mpz_t(), Int(R - a3cap).get_mpz_t(), qp1.get_mpz_t());
    mpz_fdiv_q(hi1.get_mpz_t(), Int(R + a3cap).get_mpz_t(), qp1.get_mpz_t());
    Int lo2 = -15 * q, hi2 = 15 * q;
    mpz_cdiv_q(lo3.get_mpz_t(), Int(wlo - base0).get_mpz_t(),
               step.get_mpz_t());
    mpz_fdiv_q(hi3.get_mpz_t(), Int(whi - base0).get_mpz_t(),
               step.get_mpz_t());
    Int lo = lo1 > lo2 ? lo1 : lo2;
    if (lo3 > lo) lo = lo3;
    Int hi = hi1 < hi2 ? hi1 : hi2;
    if (hi3 < hi) hi = hi3;
    if (lo > hi) continue;
    seqs.push_back({base0 + step * lo, hi - lo + 1});
  }
  check(!seqs.empty(), ErrorKind::NoCandidate,
        "no admissible trace fits the order");

  std::vector<Int> cands;
  bool searched = false;
  for (unsigned attempt = 0; attempt < 4 && !searched; ++attempt) {
    typename Box::Element alpha = twist_box.random_element(rng);
    if (twist_box.is_identity(alpha)) continue;
    auto hits = detail::sequence_hits(twist_box, alpha, step, seqs, 20000);
    if (!hits) continue;  // tiny-order element flooded the pass
    cands = std::move(*hits);
    searched = true;
  }
  check(searched, ErrorKind::Ambiguous,
        "every sampled element floods the search with annihilators");
  Int E = detail::pick_exponent(twist_box, cands, rng, whi);

  Int X = P1 - E;  // 2(q^2+1)a1 + 2a3
  Int Y = P1 + E - 2 * q3p1;
  invariant(Y % step == 0, "candidate order must sit on the trace grid");
  Int a2 = Y / step;
  invariant(mpz_even_p(X.get_mpz_t()), "trace split must be even");
  Int half = X / 2;
  Int a1;
  mpz_fdiv_q(a1.get_mpz_t(), Int(2 * half + q2p1).get_mpz_t(),
             Int(2 * q2p1).get_mpz_t());
  Int a3 = half - q2p1 * a1;
  LPolynomial P = lpoly_from_low(q, 3, {a1, a2, a3});
  check(validate_lpoly(P).ok, ErrorKind::NoCandidate,
        "recovered polynomial is not Weil-consistent");
  return P;
}

template <class Box>
LPolynomial recover_genus3(const Int& P1, const Box& twist_box, const Int& q) {
  SplitMix64 rng = detail::recovery_rng(P1, q);
  return recover_genus3(P1, twist_box, q, rng);
}

}  // namespace jacsearch
