#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bigint.hpp"
#include "blackbox.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace jacsearch {

// ---------------------------------------------------------------------------
// Factored exponents

struct FactoredExponent {
  std::vector<std::pair<uint64_t, unsigned>> prime_powers;  // ascending primes
  Int value = 1;   // product of all p^h (1 when skipped)
  double lg = 0;   // log2 of the product
};

inline uint64_t pow_u64(uint64_t p, unsigned h) {
  uint64_t r = 1;
  for (unsigned i = 0; i < h; ++i) r *= p;
  return r;
}

namespace detail {

inline Int product_tree(std::vector<Int> terms) {
  if (terms.empty()) return 1;
  while (terms.size() > 1) {
    std::vector<Int> next;
    next.reserve(terms.size() / 2 + 1);
    for (size_t i = 0; i + 1 < terms.size(); i += 2) {
      next.push_back(terms[i] * terms[i + 1]);
    }
    if (terms.size() % 2) next.push_back(terms.back());
    terms = std::move(next);
  }
  return terms[0];
}

constexpr uint64_t kSmallPrimes[9] = {2, 3, 5, 7, 11, 13, 17, 19, 23};
constexpr uint64_t kPrimorials[10] = {1,      2,      6,      30,     210,
                                      2310,   30030,  510510, 9699690,
                                      223092870};

}  // namespace detail

// Product of maximal prime powers. With w == 0: all primes p <= B with
// p^h <= B (the exponentiation target). With w > 0: the first w primes with
// p^h <= B^2 (the wheel-stripping exponent of the bounded-order search).
inline FactoredExponent build_exponent(uint64_t B, unsigned w = 0,
                                       bool with_value = true) {
  check(B >= 2, ErrorKind::BadInput, "exponent bound must be at least 2");
  check(B <= (uint64_t(1) << 28), ErrorKind::BadInput,
        "exponent bound too large");
  FactoredExponent e;
  if (w == 0) {
    for (uint32_t p : primes_below(uint32_t(B + 1))) {
      unsigned h = 1;
      uint64_t q = p;
      while (q <= B / p) {
        q *= p;
        ++h;
      }
      e.prime_powers.emplace_back(p, h);
      e.lg += h * std::log2(double(p));
    }
  } else {
    check(w <= 9, ErrorKind::BadInput, "at most 9 wheel primes supported");
    uint64_t cap = B * B;
    for (unsigned i = 0; i < w; ++i) {
      uint64_t p = detail::kSmallPrimes[i];
      unsigned h = 1;
      uint64_t q = p;
      while (q <= cap / p) {
        q *= p;
        ++h;
      }
      e.prime_powers.emplace_back(p, h);
      e.lg += h * std::log2(double(p));
    }
  }
  if (with_value) {
    std::vector<Int> terms;
    terms.reserve(e.prime_powers.size());
    for (auto& [p, h] : e.prime_powers) terms.push_back(pow_int(Int(p), h));
    e.value = detail::product_tree(std::move(terms));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Easiness test

struct EasyBound {
  uint64_t B = 0;
  FactoredExponent e_full;  // factors only; no product needed here
};

inline EasyBound make_easy_bound(uint64_t B) {
  return EasyBound{B, build_exponent(B, 0, false)};
}

// N is easy iff stripping every prime p <= B down to its capped power leaves
// a cofactor at most B^2.
inline bool is_b_easy(const Int& N, const EasyBound& bound) {
  check(N >= 1, ErrorKind::BadInput, "easiness is defined for positive values");
  Int b2 = Int(bound.B) * Int(bound.B);
  Int M = N;
  if (M <= b2) return true;
  for (auto& [p, h] : bound.e_full.prime_powers) {
    for (unsigned i = 0;
         i < h && mpz_divisible_ui_p(M.get_mpz_t(), p); ++i) {
      mpz_divexact_ui(M.get_mpz_t(), M.get_mpz_t(), p);
    }
    if (M <= b2) return true;
  }
  return M <= b2;
}

// ---------------------------------------------------------------------------
// Wheel

// Offsets between consecutive integers coprime to the primorial P, starting
// from 1: phi(P) gaps summing to P, plus the largest gap.
inline std::pair<std::vector<uint32_t>, uint32_t> wheel(uint64_t P) {
  unsigned w = 0;
  for (unsigned i = 2; i <= 9; ++i) {
    if (detail::kPrimorials[i] == P) w = i;
  }
  check(w >= 2, ErrorKind::NotPrimorial,
        "wheel modulus must be a primorial with at least two prime factors");
  std::vector<uint32_t> gaps;
  uint32_t r_max = 0;
  uint64_t prev = 1;
  for (uint64_t j = 2; j <= P + 1; ++j) {
    bool coprime = true;
    for (unsigned i = 0; i < w; ++i) {
      if (j % detail::kSmallPrimes[i] == 0) {
        coprime = false;
        break;
      }
    }
    if (!coprime) continue;
    gaps.push_back(uint32_t(j - prev));
    r_max = std::max(r_max, gaps.back());
    prev = j;
  }
  return {std::move(gaps), r_max};
}

// ---------------------------------------------------------------------------
// Search plan

struct PrimorialPlan {
  uint64_t B = 0;        // order bound: every order up to B^2 is reachable
  unsigned w = 0;        // wheel prime count
  uint64_t P = 1;        // primorial of the first w primes
  uint64_t phi = 0;      // totient of P
  uint64_t m = 0;        // lane count (baby and giant)
  std::vector<uint32_t> gaps;   // wheel offsets
  std::vector<uint32_t> units;  // integers coprime to P in [1, P)
  uint32_t r_max = 0;
  FactoredExponent e_wheel;
  bool inverse_trick = true;  // giant spacing doubled, +/- matching
};

namespace detail {

inline uint64_t euler_phi_primorial(unsigned w) {
  uint64_t phi = 1;
  for (unsigned i = 0; i < w; ++i) phi *= kSmallPrimes[i] - 1;
  return phi;
}

inline uint64_t plan_m_min(uint64_t B, unsigned w, bool trick) {
  Int need = Int(B) * Int(B);
  Int denom = Int(kPrimorials[w]) * Int(euler_phi_primorial(w));
  if (trick) denom *= 2;
  Int q = (need + denom - 1) / denom;  // ceil(B^2 / (stride*P*phi))
  Int m = isqrt(q);
  if (m * m < q) m += 1;
  return std::max<uint64_t>(1, to_u64(m));
}

}  // namespace detail

inline PrimorialPlan make_primorial_plan(uint64_t B, bool fast_inverse = true,
                                         unsigned w = 0) {
  check(B >= 2, ErrorKind::BadInput, "order bound must be at least 2");
  if (w == 0) {
    // Largest wheel keeping at least 128 lanes; tiny bounds fall back to the
    // wheel minimizing the walk cost 2*m*phi.
    for (unsigned cand = 8; cand >= 2; --cand) {
      if (detail::plan_m_min(B, cand, fast_inverse) >= 128) {
        w = cand;
        break;
      }
    }
    if (w == 0) {
      Int best_cost = 0;
      for (unsigned cand = 2; cand <= 8; ++cand) {
        Int cost = Int(2) * Int(detail::plan_m_min(B, cand, fast_inverse)) *
                   Int(detail::euler_phi_primorial(cand));
        if (w == 0 || cost < best_cost) {
          best_cost = cost;
          w = cand;
        }
      }
    }
  }
  check(w >= 2 && w <= 9, ErrorKind::BadInput, "wheel size out of range");
  PrimorialPlan plan;
  plan.B = B;
  plan.w = w;
  plan.P = detail::kPrimorials[w];
  plan.inverse_trick = fast_inverse;
  auto [gaps, r_max] = wheel(plan.P);
  plan.gaps = std::move(gaps);
  plan.r_max = r_max;
  plan.phi = plan.gaps.size();
  plan.units.reserve(plan.phi);
  uint64_t u = 1;
  for (size_t i = 0; i < plan.phi; ++i) {
    plan.units.push_back(uint32_t(u));
    u += plan.gaps[i];
  }
  plan.m = detail::plan_m_min(B, w, fast_inverse);
  plan.e_wheel = build_exponent(B, w);
  Int coverage = Int(fast_inverse ? 2 : 1) * Int(plan.m) * Int(plan.m) *
                 Int(plan.P) * Int(plan.phi);
  invariant(coverage >= Int(B) * Int(B), "plan must cover the order bound");
  return plan;
}

// ---------------------------------------------------------------------------
// Factored orders

struct FactoredOrder {
  Int value = 1;
  std::vector<std::pair<uint64_t, unsigned>> factors;  // ascending primes
};

inline void fo_push(FactoredOrder& o, uint64_t p, unsigned e) {
  if (e == 0) return;
  o.value *= pow_int(Int(p), e);
  auto it = std::lower_bound(
      o.factors.begin(), o.factors.end(), p,
      [](const std::pair<uint64_t, unsigned>& a, uint64_t v) {
        return a.first < v;
      });
  if (it != o.factors.end() && it->first == p) {
    it->second += e;
  } else {
    o.factors.insert(it, {p, e});
  }
}

inline void fo_merge_mul(FactoredOrder& a, const FactoredOrder& b) {
  for (auto& [p, e] : b.factors) fo_push(a, p, e);
}

inline FactoredExponent to_factored_exponent(const Factorization& f) {
  invariant(f.cofactor == 1, "factorization must be complete");
  FactoredExponent e;
  for (auto& [p, h] : f.factors) {
    e.prime_powers.emplace_back(to_u64(p), h);
    e.lg += h * std::log2(mpz_get_d(p.get_mpz_t()));
  }
  e.value = f.value();
  return e;
}

struct GenalgStats {
  uint64_t exp_ops = 0;     // exponentiation-phase compositions
  uint64_t search_ops = 0;  // table-walk and matching compositions
  uint64_t restarts = 0;
};

struct OrderOptions {
  // Chain snapshots are kept in full while the term count stays within
  // 2*lg^2(estimated group size); beyond that only evenly spaced
  // checkpoints are stored and probes recompute forward.
  size_t lg_group_estimate = 64;
};

// ---------------------------------------------------------------------------
// Order from a factored annihilating exponent

namespace detail {

template <class Box>
unsigned prime_power_order_exp(const Box& box, typename Box::Element x,
                               uint64_t p) {
  unsigned e = 0;
  while (!box.is_identity(x)) {
    x = box_pow_u64(box, x, p);
    ++e;
    invariant(e <= 128, "prime-power tower must terminate");
  }
  return e;
}

}  // namespace detail

// Exact order of alpha given that alpha^E = 1 for the factored E; empty if
// the chain never reaches the identity (the order does not divide E).
template <class Box>
std::optional<FactoredOrder> order_from_exponent(
    const Box& box, const typename Box::Element& alpha,
    const FactoredExponent& E, const OrderOptions& opts = {}) {
  if (box.is_identity(alpha)) return FactoredOrder{};
  const auto& qs = E.prime_powers;
  const size_t w = qs.size();
  if (w == 0) return std::nullopt;

  size_t budget = opts.lg_group_estimate * opts.lg_group_estimate;
  size_t stride = (w <= 2 * budget) ? 1 : (w + budget - 1) / budget;
  std::vector<typename Box::Element> saved;  // chain values at stride marks
  saved.reserve(w / stride + 1);

  typename Box::Element x = alpha;
  typename Box::Element before_one = alpha;
  size_t first_one = w + 1;
  for (size_t j = 0; j < w; ++j) {
    if (j % stride == 0) saved.push_back(x);
    typename Box::Element nx =
        box_pow_u64(box, x, pow_u64(qs[j].first, qs[j].second));
    if (box.is_identity(nx)) {
      before_one = x;
      first_one = j + 1;
      break;
    }
    x = nx;
  }
  if (first_one > w) return std::nullopt;

  auto chain_at = [&](size_t j) -> typename Box::Element {
    if (j % stride == 0) return saved[j / stride];
    typename Box::Element y = saved[j / stride];
    for (size_t t = (j / stride) * stride; t < j; ++t) {
      y = box_pow_u64(box, y, pow_u64(qs[t].first, qs[t].second));
    }
    return y;
  };

  FactoredOrder N;
  fo_push(N, qs[first_one - 1].first,
          detail::prime_power_order_exp(box, before_one, qs[first_one - 1].first));

  size_t hi = first_one;  // chain_at(hi)^N = 1 is established
  while (true) {
    size_t lo = 0, top = hi;
    while (lo < top) {
      size_t mid = (lo + top) / 2;
      if (box.is_identity(box_pow(box, chain_at(mid), N.value))) {
        top = mid;
      } else {
        lo = mid + 1;
      }
    }
    if (lo == 0) break;
    typename Box::Element y = box_pow(box, chain_at(lo - 1), N.value);
    fo_push(N, qs[lo - 1].first,
            detail::prime_power_order_exp(box, y, qs[lo - 1].first));
    hi = lo - 1;
  }

  invariant(box.is_identity(box_pow(box, alpha, N.value)),
            "order must annihilate");
  for (auto& [p, e] : N.factors) {
    invariant(!box.is_identity(box_pow(box, alpha, N.value / Int(p))),
              "order must be minimal");
  }
  return N;
}

// ---------------------------------------------------------------------------
// Bounded order search

namespace detail {

inline void radix_sort_packed(std::vector<uint64_t>& v) {
  if (v.size() < 2048) {
    std::sort(v.begin(), v.end());
    return;
  }
  constexpr unsigned kBits = 10;
  constexpr size_t kBuckets = size_t(1) << kBits;
  std::vector<size_t> count(kBuckets + 1, 0);
  for (uint64_t x : v) ++count[(x >> (64 - kBits)) + 1];
  for (size_t i = 1; i <= kBuckets; ++i) count[i] += count[i - 1];
  std::vector<uint64_t> out(v.size());
  std::vector<size_t> at(count.begin(), count.end() - 1);
  for (uint64_t x : v) out[at[x >> (64 - kBits)]++] = x;
  for (size_t b = 0; b < kBuckets; ++b) {
    std::sort(out.begin() + count[b], out.begin() + count[b + 1]);
  }
  v = std::move(out);
}

}  // namespace detail

// Order of alpha under the plan's reachability guarantee (orders up to B^2
// are always found; larger orders are found only if a table coincidence
// reveals an annihilating exponent, and are then still exact). Empty result
// means the order is out of reach for this bound.
template <class Box>
std::optional<FactoredOrder> order_bounded(const Box& box,
                                           const typename Box::Element& alpha,
                                           const PrimorialPlan& plan,
                                           GenalgStats* stats = nullptr,
                                           const OrderOptions& opts = {}) {
  check(!plan.inverse_trick || box.fast_inverse(), ErrorKind::BadInput,
        "plan assumes inverse-symmetric matching");
  uint64_t t0 = box.ops();
  typename Box::Element beta0 = box_pow(box, alpha, plan.e_wheel.value);
  if (stats) stats->exp_ops += box.ops() - t0;
  t0 = box.ops();

  const uint64_t m = plan.m;
  const uint64_t P = plan.P;
  const uint64_t phi = plan.phi;
  const uint64_t jstride = plan.inverse_trick ? 2 : 1;
  const unsigned ib = unsigned(std::bit_width(m - 1));
  const unsigned kb = unsigned(std::bit_width(phi - 1));
  const unsigned shift = ib + kb;
  const uint64_t low_mask = (shift == 0) ? 0 : ((uint64_t(1) << shift) - 1);
  auto pack = [&](uint64_t h, uint64_t i, uint64_t k) {
    return (h & ~low_mask) | (i << kb) | k;
  };

  std::optional<Int> annih;
  auto note = [&](const Int& e) {
    if (!annih || e < *annih) annih = e;
  };
  if (box.is_identity(beta0)) annih = 1;

  std::vector<uint64_t> babies, giants;
  if (!annih) {
    // Baby lanes: beta0^(iP + u) over lanes i and units u.
    babies.reserve(m * phi);
    std::vector<typename Box::Element> lane;
    lane.reserve(m);
    lane.push_back(beta0);
    typename Box::Element bP = box_pow_u64(box, beta0, P);
    for (uint64_t i = 1; i < m; ++i) {
      lane.push_back(box.compose(lane.back(), bP));
    }
    std::vector<typename Box::Element> delta;  // beta0^2, beta0^4, ...
    delta.reserve(plan.r_max / 2);
    delta.push_back(box.compose(beta0, beta0));
    for (uint32_t g = 4; g <= plan.r_max; g += 2) {
      delta.push_back(box.compose(delta.back(), delta.front()));
    }
    for (uint64_t k = 0; k < phi; ++k) {
      for (uint64_t i = 0; i < m; ++i) {
        if (box.is_identity(lane[i])) {
          note(Int(i * P + plan.units[k]));
        }
        babies.push_back(pack(box.hash64(lane[i]), i, k));
      }
      if (annih || k + 1 == phi) break;
      box.compose_all(lane, delta[plan.gaps[k] / 2 - 1]);
    }
  }

  const uint64_t mP = m * P;
  auto giant_exp = [&](uint64_t i, uint64_t k) -> Int {
    return Int(mP) * Int(jstride * (phi * i + k) + 1);
  };
  if (!annih) {
    // Giant lanes: beta0^(mP * (jstride*(phi*i + k) + 1)).
    giants.reserve(m * phi);
    typename Box::Element g0 = box_pow_u64(box, beta0, mP);
    typename Box::Element d0 =
        (jstride == 2) ? box.compose(g0, g0) : g0;
    typename Box::Element cur = g0;
    for (uint64_t i = 0; i < m && !annih; ++i) {
      for (uint64_t k = 0; k < phi; ++k) {
        if (box.is_identity(cur)) {
          note(giant_exp(i, k));
          break;
        }
        giants.push_back(pack(box.hash64(cur), i, k));
        if (i + 1 < m || k + 1 < phi) cur = box.compose(cur, d0);
      }
    }
  }

  if (!annih) {
    detail::radix_sort_packed(babies);
    detail::radix_sort_packed(giants);
    const uint64_t imask = (ib == 0) ? 0 : ((uint64_t(1) << ib) - 1);
    const uint64_t kmask = (kb == 0) ? 0 : ((uint64_t(1) << kb) - 1);
    size_t bi = 0, gi = 0;
    while (bi < babies.size() && gi < giants.size() && !annih) {
      uint64_t hb = babies[bi] >> shift;
      uint64_t hg = giants[gi] >> shift;
      if (hb < hg) {
        ++bi;
        continue;
      }
      if (hg < hb) {
        ++gi;
        continue;
      }
      size_t be = bi, ge = gi;
      while (be < babies.size() && (babies[be] >> shift) == hb) ++be;
      while (ge < giants.size() && (giants[ge] >> shift) == hb) ++ge;
      for (size_t b = bi; b < be && !annih; ++b) {
        uint64_t bexp = ((babies[b] >> kb) & imask) * P +
                        plan.units[babies[b] & kmask];
        typename Box::Element bel = box_pow_u64(box, beta0, bexp);
        for (size_t g = gi; g < ge && !annih; ++g) {
          Int gexp = giant_exp((giants[g] >> kb) & imask, giants[g] & kmask);
          typename Box::Element gel = box_pow(box, beta0, gexp);
          if (box.equal(gel, bel)) {
            note(gexp - Int(bexp));
          } else if (plan.inverse_trick &&
                     box.equal(gel, box.invert(bel))) {
            note(gexp + Int(bexp));
          }
        }
      }
      bi = be;
      gi = ge;
    }
  }
  if (stats) stats->search_ops += box.ops() - t0;
  if (!annih) return std::nullopt;

  t0 = box.ops();
  Factorization fa = factorize(*annih);
  invariant(fa.cofactor == 1, "match exponent must factor completely");
  auto rough = order_from_exponent(box, beta0, to_factored_exponent(fa), opts);
  invariant(rough.has_value(), "match exponent must annihilate");

  // Recover the wheel-smooth part from alpha^|beta0|.
  typename Box::Element tail = box_pow(box, alpha, rough->value);
  auto smooth = order_from_exponent(box, tail, plan.e_wheel, opts);
  if (stats) stats->exp_ops += box.ops() - t0;
  if (!smooth) return std::nullopt;

  FactoredOrder result = std::move(*rough);
  fo_merge_mul(result, *smooth);
  invariant(box.is_identity(box_pow(box, alpha, result.value)),
            "order must annihilate");
  for (auto& [p, e] : result.factors) {
    invariant(!box.is_identity(box_pow(box, alpha, result.value / Int(p))),
              "order must be minimal");
  }
  return result;
}

// ---------------------------------------------------------------------------
// Group exponent

struct ExponentContext {
  uint64_t B = 0;
  FactoredExponent e_full;
  PrimorialPlan plan;
};

inline ExponentContext make_exponent_context(uint64_t B,
                                             bool fast_inverse = true,
                                             unsigned w = 0) {
  ExponentContext ctx;
  ctx.B = B;
  ctx.e_full = build_exponent(B);
  ctx.plan = make_primorial_plan(B, fast_inverse, w);
  return ctx;
}

// Least common multiple of the orders of at least c random elements; divides
// the group exponent and equals it with overwhelming probability as c grows.
// Empty result: some element order is out of the bound's reach.
template <class Box>
std::optional<FactoredOrder> group_exponent(const Box& box,
                                            const ExponentContext& ctx,
                                            SplitMix64& rng, unsigned c = 6,
                                            GenalgStats* stats = nullptr,
                                            const OrderOptions& opts = {}) {
  check(c >= 2, ErrorKind::BadInput,
        "confirmation count must be at least 2");
  FactoredOrder N;
  for (unsigned round = 0; round < 64; ++round) {
    typename Box::Element a = box.random_element(rng);
    uint64_t t0 = box.ops();
    if (N.value != 1) a = box_pow(box, a, N.value);
    typename Box::Element b = box_pow(box, a, ctx.e_full.value);
    if (stats) stats->exp_ops += box.ops() - t0;

    auto rough = order_bounded(box, b, ctx.plan, stats, opts);
    if (!rough) return std::nullopt;  // exponent out of reach for this bound

    t0 = box.ops();
    typename Box::Element x = box_pow(box, a, rough->value);
    auto smooth = order_from_exponent(box, x, ctx.e_full, opts);
    invariant(smooth.has_value(), "residual order must divide the exponent");
    if (stats) stats->exp_ops += box.ops() - t0;
    fo_merge_mul(N, *rough);
    fo_merge_mul(N, *smooth);

    bool restart = false;
    for (unsigned t = 1; t < c; ++t) {
      typename Box::Element f = box.random_element(rng);
      t0 = box.ops();
      f = box_pow(box, f, N.value);
      auto extra = order_from_exponent(box, f, ctx.e_full, opts);
      if (stats) stats->exp_ops += box.ops() - t0;
      if (!extra || extra->value != 1) {  // fresh element was not annihilated
        if (extra) fo_merge_mul(N, *extra);
        if (stats) ++stats->restarts;
        restart = true;
        break;
      }
    }
    if (!restart) return N;
  }
  return std::nullopt;
}

template <class Box>
std::optional<FactoredOrder> group_exponent(const Box& box, uint64_t B,
                                            SplitMix64& rng, unsigned c = 6,
                                            GenalgStats* stats = nullptr) {
  return group_exponent(box, make_exponent_context(B, box.fast_inverse()),
                        rng, c, stats);
}

// ---------------------------------------------------------------------------
// Component structure

namespace detail {

// Row-relation diagonalization. M's rows span the relation lattice of the
// current generator list; W tracks the inverse of the accumulated column
// transform, so new generator j is the product of old generators raised to
// row j of W. Row operations need no mirror.
inline void diagonalize_relations(std::vector<std::vector<Int>>& M,
                                  std::vector<std::vector<Int>>& W) {
  const size_t n = M.size();
  W.assign(n, std::vector<Int>(n, 0));
  for (size_t i = 0; i < n; ++i) W[i][i] = 1;
  for (size_t k = 0; k < n; ++k) {
    while (true) {
      size_t pi = n, pj = n;
      for (size_t i = k; i < n; ++i) {
        for (size_t j = k; j < n; ++j) {
          if (M[i][j] != 0 &&
              (pi == n || abs(M[i][j]) < abs(M[pi][pj]))) {
            pi = i;
            pj = j;
          }
        }
      }
      if (pi == n) return;
      std::swap(M[k], M[pi]);
      if (pj != k) {
        for (size_t i = 0; i < n; ++i) std::swap(M[i][k], M[i][pj]);
        std::swap(W[k], W[pj]);
      }
      bool clean = true;
      for (size_t i = k + 1; i < n; ++i) {
        if (M[i][k] == 0) continue;
        Int q = M[i][k] / M[k][k];
        if (q != 0) {
          for (size_t j = k; j < n; ++j) M[i][j] -= q * M[k][j];
        }
        if (M[i][k] != 0) clean = false;
      }
      for (size_t j = k + 1; j < n; ++j) {
        if (M[k][j] == 0) continue;
        Int q = M[k][j] / M[k][k];
        if (q != 0) {
          for (size_t i = 0; i < n; ++i) M[i][j] -= q * M[i][k];
          for (size_t i = 0; i < n; ++i) W[k][i] += q * W[j][i];
        }
        if (M[k][j] != 0) clean = false;
      }
      if (clean) break;
    }
    if (M[k][k] < 0) {
      for (size_t j = k; j < n; ++j) M[k][j] = -M[k][j];
    }
  }
}

}  // namespace detail

// Independent generators of the p-part of the group, as (generator, order)
// pairs with orders descending. lambda must be a multiple of every sampled
// element order. Empty result: the component outgrows size_cap.
template <class Box>
std::optional<std::vector<std::pair<typename Box::Element, uint64_t>>>
sylow_structure(const Box& box, const FactoredOrder& lambda, uint64_t p,
                SplitMix64& rng, const Int& size_cap,
                GenalgStats* stats = nullptr) {
  bool has_p = false;
  for (auto& [q, e] : lambda.factors) has_p = has_p || q == p;
  check(has_p, ErrorKind::BadInput,
        "prime does not divide the group exponent");
  Int M = lambda.value;
  while (mpz_divisible_ui_p(M.get_mpz_t(), p)) {
    mpz_divexact_ui(M.get_mpz_t(), M.get_mpz_t(), p);
  }

  uint64_t t0 = box.ops();
  std::vector<typename Box::Element> gens;
  std::vector<unsigned> exps;
  Int size = 1;

  // Meet-in-the-middle span table: left combos stored, right combos streamed.
  size_t split = 0;
  std::vector<typename Box::Element> left;
  std::unordered_multimap<uint64_t, uint32_t> table;
  bool dirty = true;
  auto rebuild = [&]() {
    Int target = isqrt(size);
    split = 0;
    Int lsz = 1;
    while (split < gens.size() && lsz < target) {
      lsz *= pow_u64(p, exps[split]);
      ++split;
    }
    left.clear();
    left.push_back(box.identity());
    for (size_t d = 0; d < split; ++d) {
      size_t block = left.size();
      uint64_t o = pow_u64(p, exps[d]);
      for (uint64_t e = 1; e < o; ++e) {
        for (size_t j = 0; j < block; ++j) {
          left.push_back(box.compose(left[(e - 1) * block + j], gens[d]));
        }
      }
    }
    table.clear();
    for (size_t i = 0; i < left.size(); ++i) {
      table.emplace(box.hash64(left[i]), uint32_t(i));
    }
    dirty = false;
  };

  // Digits of y over the current generators, or empty.
  auto span_digits =
      [&](const typename Box::Element& y) -> std::optional<std::vector<uint64_t>> {
    if (dirty) rebuild();
    std::vector<uint64_t> rdig(gens.size() - split, 0);
    std::vector<typename Box::Element> rinv;
    for (size_t d = split; d < gens.size(); ++d) {
      rinv.push_back(box.invert(gens[d]));
    }
    typename Box::Element z = y;
    while (true) {
      auto [lo, hi] = table.equal_range(box.hash64(z));
      for (auto it = lo; it != hi; ++it) {
        if (!box.equal(left[it->second], z)) continue;
        std::vector<uint64_t> digits(gens.size(), 0);
        uint64_t idx = it->second;
        for (size_t d = 0; d < split; ++d) {
          uint64_t o = pow_u64(p, exps[d]);
          digits[d] = idx % o;
          idx /= o;
        }
        for (size_t d = split; d < gens.size(); ++d) {
          digits[d] = rdig[d - split];
        }
        return digits;
      }
      size_t d = 0;
      while (d < rdig.size()) {
        z = box.compose(z, rinv[d]);
        if (++rdig[d] < pow_u64(p, exps[split + d])) break;
        rdig[d] = 0;
        ++d;
      }
      if (d == rdig.size()) return std::nullopt;
    }
  };

  unsigned stable = 0;
  while (stable < 20) {
    typename Box::Element eta = box_pow(box, box.random_element(rng), M);
    unsigned t = 0;
    Int tower = 1;
    typename Box::Element probe = eta;
    std::optional<std::vector<uint64_t>> digits;
    while (!(digits = span_digits(probe))) {
      probe = box_pow_u64(box, probe, p);
      ++t;
      tower *= p;
      // The extension grows by p^t, so a tower already past the cap can
      // only end past the cap. This also bails out when the sample is not
      // a p-element, which happens when the supplied exponent fell short.
      if (size * tower > size_cap) {
        if (stats) stats->search_ops += box.ops() - t0;
        return std::nullopt;
      }
    }
    if (t == 0) {
      ++stable;
      continue;
    }
    stable = 0;

    // Present the extended group and rediagonalize.
    size_t r = gens.size();
    std::vector<std::vector<Int>> R(r + 1, std::vector<Int>(r + 1, 0));
    for (size_t i = 0; i < r; ++i) R[i][i] = pow_u64(p, exps[i]);
    for (size_t i = 0; i < r; ++i) R[r][i] = -Int((*digits)[i]);
    R[r][r] = pow_u64(p, t);
    std::vector<std::vector<Int>> W;
    detail::diagonalize_relations(R, W);

    std::vector<typename Box::Element> old_gens = std::move(gens);
    old_gens.push_back(eta);
    gens.clear();
    std::vector<unsigned> old_exps = std::move(exps);
    exps.clear();
    Int new_size = 1;
    for (size_t j = 0; j <= r; ++j) {
      Int d = R[j][j];
      invariant(d > 0, "presentation must be full rank");
      if (d == 1) continue;
      typename Box::Element g = box.identity();
      for (size_t i = 0; i <= r; ++i) {
        if (W[j][i] != 0) {
          g = box.compose(g, box_pow(box, old_gens[i], W[j][i]));
        }
      }
      unsigned f = 0;
      Int dd = d;
      while (dd > 1) {
        invariant(mpz_divisible_ui_p(dd.get_mpz_t(), p) != 0,
                  "component orders must be prime powers");
        mpz_divexact_ui(dd.get_mpz_t(), dd.get_mpz_t(), p);
        ++f;
      }
      invariant(box.is_identity(box_pow(box, g, d)),
                "generator order must annihilate");
      invariant(!box.is_identity(box_pow(box, g, d / Int(p))),
                "generator order must be minimal");
      gens.push_back(g);
      exps.push_back(f);
      new_size *= d;
    }
    invariant(new_size == size * pow_int(Int(p), t),
              "extension must grow by the tower height");
    size = new_size;
    if (size > size_cap) {
      if (stats) stats->search_ops += box.ops() - t0;
      return std::nullopt;
    }
    // Keep generators in descending order of size.
    std::vector<size_t> idx(gens.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](size_t a, size_t b) { return exps[a] > exps[b]; });
    std::vector<typename Box::Element> sg;
    std::vector<unsigned> se;
    for (size_t i : idx) {
      sg.push_back(gens[i]);
      se.push_back(exps[i]);
    }
    gens = std::move(sg);
    exps = std::move(se);
    dirty = true;
  }
  if (stats) stats->search_ops += box.ops() - t0;

  std::vector<std::pair<typename Box::Element, uint64_t>> out;
  for (size_t i = 0; i < gens.size(); ++i) {
    out.emplace_back(gens[i], pow_u64(p, exps[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Group order

inline std::pair<Int, Int> multiples_in_interval(const Int& lambda,
                                                 const Int& lo,
                                                 const Int& hi) {
  Int k1, k2;
  mpz_cdiv_q(k1.get_mpz_t(), lo.get_mpz_t(), lambda.get_mpz_t());
  mpz_fdiv_q(k2.get_mpz_t(), hi.get_mpz_t(), lambda.get_mpz_t());
  if (k1 < 1) k1 = 1;
  if (k2 < k1) return {0, 0};
  return {k2 - k1 + 1, k1 * lambda};
}

template <class Box>
struct SylowComponent {
  uint64_t prime = 0;
  std::vector<std::pair<typename Box::Element, uint64_t>> generators;
};

template <class Box>
struct GroupOrderResult {
  Int order = 1;
  bool from_interval = false;
  FactoredOrder lambda;
  std::vector<SylowComponent<Box>> components;
};

// Group order via the exponent: a unique exponent multiple inside a known
// interval settles it outright; otherwise the component structure is built
// per prime. Empty result: out of reach for the bound.
template <class Box>
std::optional<GroupOrderResult<Box>> group_order(
    const Box& box, const ExponentContext& ctx, SplitMix64& rng,
    const std::optional<std::pair<Int, Int>>& interval = {}, unsigned c = 6,
    GenalgStats* stats = nullptr, const OrderOptions& opts = {}) {
  auto lambda = group_exponent(box, ctx, rng, c, stats, opts);
  if (!lambda) return std::nullopt;
  GroupOrderResult<Box> res;
  res.lambda = *lambda;
  if (interval) {
    auto [count, first] =
        multiples_in_interval(lambda->value, interval->first, interval->second);
    check(count >= 1, ErrorKind::AmbiguousOrder,
          "no exponent multiple inside the target interval");
    if (count == 1) {
      res.order = first;
      res.from_interval = true;
      return res;
    }
  }
  Int cap = Int(ctx.B) * Int(ctx.B);
  for (auto& [p, h] : lambda->factors) {
    auto comp = sylow_structure(box, *lambda, p, rng, cap, stats);
    if (!comp) return std::nullopt;
    Int csize = 1;
    for (auto& [g, o] : *comp) csize *= Int(o);
    invariant(!comp->empty() && (*comp)[0].second >= pow_u64(p, h),
              "component must realize the exponent's prime power");
    res.order *= csize;
    res.components.push_back({p, std::move(*comp)});
  }
  if (interval) {
    check(res.order >= interval->first && res.order <= interval->second,
          ErrorKind::AmbiguousOrder,
          "reconstructed order misses the target interval");
  }
  return res;
}

}  // namespace jacsearch
