#pragma once

#include <cstdint>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace jacsearch {

// A black-box group is any type Box providing:
//
//   using Element = ...;                       value type, copyable
//   Element identity() const;
//   Element compose(const Element&, const Element&) const;
//   Element invert(const Element&) const;
//   void    compose_all(std::vector<Element>&, const Element&) const;
//                                              in-place right-multiply of each
//   Element random_element(SplitMix64&) const;
//   bool    equal(const Element&, const Element&) const;
//   bool    is_identity(const Element&) const;
//   uint64_t hash64(const Element&) const;
//   std::vector<uint8_t> serialize(const Element&) const;
//   bool    fast_inverse() const;              invert is ~free and
//                                              hash64(x) == hash64(invert(x))
//   uint64_t ops() const;                      compositions performed so far
//
// compose_all exists so a box can amortize shared work (one combined field
// inversion per call); it must count one operation per element either way.

namespace detail {

// Window width minimizing lg(e)/(k+1) + 2^(k-1) multiplies on top of the
// lg(e) squarings.
inline unsigned pow_window_bits(size_t exp_bits) {
  unsigned best_k = 1;
  double best = 1e300;
  for (unsigned k = 1; k <= 14; ++k) {
    double cost = double(exp_bits) / (k + 1) + double(uint64_t(1) << (k - 1));
    if (cost < best) {
      best = cost;
      best_k = k;
    }
  }
  return best_k;
}

}  // namespace detail

// Sliding-window exponentiation. Negative exponents go through invert.
template <class Box>
typename Box::Element box_pow(const Box& box, const typename Box::Element& a,
                              const Int& e) {
  if (e < 0) return box.invert(box_pow(box, a, Int(-e)));
  if (e == 0) return box.identity();
  if (e == 1) return a;
  size_t bits = bit_length(e);
  unsigned k = detail::pow_window_bits(bits);

  // Odd powers a^1, a^3, ..., a^(2^k - 1).
  std::vector<typename Box::Element> odd;
  odd.reserve(size_t(1) << (k - 1));
  odd.push_back(a);
  if (k > 1) {
    typename Box::Element sq = box.compose(a, a);
    for (size_t i = 1; i < (size_t(1) << (k - 1)); ++i) {
      odd.push_back(box.compose(odd.back(), sq));
    }
  }

  const mpz_srcptr ez = e.get_mpz_t();
  typename Box::Element acc = box.identity();
  bool started = false;
  size_t i = bits;
  while (i > 0) {
    if (!mpz_tstbit(ez, i - 1)) {
      if (started) acc = box.compose(acc, acc);
      --i;
      continue;
    }
    // Greedy window [l, i-1] ending at a set bit.
    size_t l = (i >= k) ? i - k : 0;
    while (!mpz_tstbit(ez, l)) ++l;
    uint64_t w = 0;
    for (size_t b = i; b-- > l;) w = (w << 1) | mpz_tstbit(ez, b);
    for (size_t b = 0; b < i - l; ++b) {
      if (started) acc = box.compose(acc, acc);
    }
    if (started) {
      acc = box.compose(acc, odd[w >> 1]);
    } else {
      acc = odd[w >> 1];
      started = true;
    }
    i = l;
  }
  return acc;
}

template <class Box>
typename Box::Element box_pow_u64(const Box& box,
                                  const typename Box::Element& a, uint64_t e) {
  if (e == 0) return box.identity();
  if (e == 1) return a;
  // Plain left-to-right binary; exponents here are small.
  int top = 63;
  while (!((e >> top) & 1)) --top;
  typename Box::Element acc = a;
  for (int b = top - 1; b >= 0; --b) {
    acc = box.compose(acc, acc);
    if ((e >> b) & 1) acc = box.compose(acc, a);
  }
  return acc;
}

}  // namespace jacsearch
