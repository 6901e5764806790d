#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "ff.hpp"

namespace jacsearch {

// Dense polynomial over a field, coefficients ascending, no leading zeros.
// The zero polynomial has an empty coefficient vector and degree -1.
class Poly {
 public:
  Poly() = default;

  Poly(const Field& F, std::vector<FieldElement> coeffs)
      : field_(&F), c_(std::move(coeffs)) {
    for (const auto& e : c_)
      check(e.field == field_, ErrorKind::FieldMismatch,
            "coefficient from a different field");
    trim();
  }

  static Poly zero(const Field& F) { return Poly(F, {}); }
  static Poly one(const Field& F) { return Poly(F, {F.one()}); }
  static Poly x(const Field& F) { return Poly(F, {F.zero(), F.one()}); }

  static Poly from_ints(const Field& F, const std::vector<Int>& v) {
    std::vector<FieldElement> c;
    c.reserve(v.size());
    for (const Int& a : v) c.push_back(F.from_int(a));
    return Poly(F, std::move(c));
  }

  const Field& field() const {
    invariant(field_ != nullptr, "polynomial without a field");
    return *field_;
  }

  int degree() const { return int(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<FieldElement>& coeffs() const { return c_; }

  FieldElement coeff(int i) const {
    return (i >= 0 && i < int(c_.size())) ? c_[size_t(i)] : field().zero();
  }

  FieldElement leading() const {
    check(!is_zero(), ErrorKind::ZeroPolynomial, "zero polynomial has no leading term");
    return c_.back();
  }

  bool is_monic() const { return !is_zero() && field().is_one(c_.back()); }

  bool operator==(const Poly& o) const {
    return field_ == o.field_ && c_ == o.c_;
  }
  bool operator!=(const Poly& o) const { return !(*this == o); }

  Poly operator+(const Poly& o) const {
    const Field& F = common_field(o);
    std::vector<FieldElement> r(std::max(c_.size(), o.c_.size()), F.zero());
    for (size_t i = 0; i < r.size(); ++i) r[i] = F.add(coeff(int(i)), o.coeff(int(i)));
    return Poly(F, std::move(r));
  }

  Poly operator-(const Poly& o) const {
    const Field& F = common_field(o);
    std::vector<FieldElement> r(std::max(c_.size(), o.c_.size()), F.zero());
    for (size_t i = 0; i < r.size(); ++i) r[i] = F.sub(coeff(int(i)), o.coeff(int(i)));
    return Poly(F, std::move(r));
  }

  Poly operator-() const {
    const Field& F = field();
    std::vector<FieldElement> r(c_);
    for (auto& e : r) e = F.neg(e);
    return Poly(F, std::move(r));
  }

  Poly operator*(const Poly& o) const {
    const Field& F = common_field(o);
    if (is_zero() || o.is_zero()) return Poly::zero(F);
    std::vector<FieldElement> r(c_.size() + o.c_.size() - 1, F.zero());
    for (size_t i = 0; i < c_.size(); ++i) {
      if (F.is_zero(c_[i])) continue;
      for (size_t j = 0; j < o.c_.size(); ++j)
        r[i + j] = F.add(r[i + j], F.mul(c_[i], o.c_[j]));
    }
    return Poly(F, std::move(r));
  }

  Poly scaled(const FieldElement& s) const {
    const Field& F = field();
    std::vector<FieldElement> r(c_);
    for (auto& e : r) e = F.mul(e, s);
    return Poly(F, std::move(r));
  }

  Poly monic() const {
    const Field& F = field();
    check(!is_zero(), ErrorKind::ZeroPolynomial, "cannot normalize the zero polynomial");
    if (is_monic()) return *this;
    return scaled(F.inv(c_.back()));
  }

  // Multiply by x^n.
  Poly shifted(int n) const {
    if (is_zero() || n == 0) return *this;
    const Field& F = field();
    std::vector<FieldElement> r(c_.size() + size_t(n), F.zero());
    for (size_t i = 0; i < c_.size(); ++i) r[i + size_t(n)] = c_[i];
    return Poly(F, std::move(r));
  }

  FieldElement eval(const FieldElement& at) const {
    const Field& F = field();
    FieldElement acc = F.zero();
    for (size_t i = c_.size(); i-- > 0;) acc = F.add(F.mul(acc, at), c_[i]);
    return acc;
  }

  Poly derivative() const {
    const Field& F = field();
    if (c_.size() <= 1) return Poly::zero(F);
    std::vector<FieldElement> r;
    r.reserve(c_.size() - 1);
    for (size_t i = 1; i < c_.size(); ++i)
      r.push_back(F.mul(c_[i], F.from_int(Int(uint64_t(i)))));
    return Poly(F, std::move(r));
  }

 private:
  const Field* field_ = nullptr;
  std::vector<FieldElement> c_;

  const Field& common_field(const Poly& o) const {
    const Field& F = field();
    check(field_ == o.field_, ErrorKind::FieldMismatch,
          "polynomials over different fields");
    return F;
  }

  void trim() {
    while (!c_.empty() && field_->is_zero(c_.back())) c_.pop_back();
  }
};

inline std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b) {
  const Field& F = a.field();
  check(!b.is_zero(), ErrorKind::DivisionByZero, "polynomial division by zero");
  if (a.degree() < b.degree()) return {Poly::zero(F), a};
  FieldElement lead_inv = b.is_monic() ? F.one() : F.inv(b.leading());
  std::vector<FieldElement> rem(a.coeffs());
  int db = b.degree();
  std::vector<FieldElement> quot(size_t(a.degree() - db + 1), F.zero());
  for (int i = a.degree(); i >= db; --i) {
    FieldElement f = F.mul(rem[size_t(i)], lead_inv);
    if (F.is_zero(f)) continue;
    quot[size_t(i - db)] = f;
    for (int j = 0; j <= db; ++j)
      rem[size_t(i - db + j)] = F.sub(rem[size_t(i - db + j)], F.mul(f, b.coeff(j)));
  }
  return {Poly(F, std::move(quot)), Poly(F, std::move(rem))};
}

inline Poly poly_mod(const Poly& a, const Poly& b) { return poly_divmod(a, b).second; }

inline Poly poly_div_exact(const Poly& a, const Poly& b) {
  auto [q, r] = poly_divmod(a, b);
  invariant(r.is_zero(), "polynomial division expected to be exact");
  return q;
}

// Monic gcd; gcd(0, 0) is the zero polynomial.
inline Poly poly_gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = poly_mod(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return a.is_zero() ? a : a.monic();
}

// Extended gcd: (g, s, t) with s*a + t*b = g and g monic (or zero).
inline std::tuple<Poly, Poly, Poly> poly_xgcd(Poly a, Poly b) {
  const Field& F = a.field();
  check(&F == &b.field(), ErrorKind::FieldMismatch,
        "polynomials over different fields");
  Poly s0 = Poly::one(F), s1 = Poly::zero(F);
  Poly t0 = Poly::zero(F), t1 = Poly::one(F);
  while (!b.is_zero()) {
    auto [q, r] = poly_divmod(a, b);
    a = std::move(b);
    b = std::move(r);
    Poly s2 = s0 - q * s1;
    s0 = std::move(s1);
    s1 = std::move(s2);
    Poly t2 = t0 - q * t1;
    t0 = std::move(t1);
    t1 = std::move(t2);
  }
  if (a.is_zero()) return {a, std::move(s0), std::move(t0)};
  FieldElement li = F.inv(a.leading());
  return {a.scaled(li), s0.scaled(li), t0.scaled(li)};
}

// Division without field inversions: scale * a = q * b + r with deg r < deg b
// and scale a power of b's leading coefficient. r keeps a's value when
// deg a < deg b (scale one).
inline std::tuple<Poly, Poly, FieldElement> poly_pseudo_divmod(const Poly& a,
                                                               const Poly& b) {
  const Field& F = a.field();
  check(&F == &b.field(), ErrorKind::FieldMismatch,
        "polynomials over different fields");
  check(!b.is_zero(), ErrorKind::DivisionByZero, "polynomial division by zero");
  Poly q = Poly::zero(F);
  Poly r = a;
  FieldElement beta = b.leading();
  FieldElement scale = F.one();
  int db = b.degree();
  while (!r.is_zero() && r.degree() >= db) {
    FieldElement c = r.leading();
    int s = r.degree() - db;
    std::vector<FieldElement> mono(size_t(s) + 1, F.zero());
    mono.back() = c;
    q = q.scaled(beta) + Poly(F, std::move(mono));
    r = r.scaled(beta) - b.shifted(s).scaled(c);
    scale = F.mul(scale, beta);
  }
  return {std::move(q), std::move(r), scale};
}

inline Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& mod) {
  return poly_mod(a * b, mod);
}

inline Poly poly_powmod(const Poly& base, const Int& e, const Poly& mod) {
  const Field& F = base.field();
  check(e >= 0, ErrorKind::BadInput, "negative polynomial exponent");
  Poly r = poly_mod(Poly::one(F), mod);
  Poly acc = poly_mod(base, mod);
  size_t bits = bit_length(e);
  for (size_t b = bits; b-- > 0;) {
    r = poly_mulmod(r, r, mod);
    if (mpz_tstbit(e.get_mpz_t(), b)) r = poly_mulmod(r, acc, mod);
  }
  return r;
}

namespace detail {

// Coefficient-wise p-th root of f, defined when every exponent with a
// nonzero coefficient is a multiple of p. In F_{p^k} the inverse of the
// Frobenius is a -> a^{p^{k-1}}.
inline Poly poly_pth_root(const Poly& f) {
  const Field& F = f.field();
  invariant(f.degree() >= 0, "p-th root of the zero polynomial");
  uint64_t p = to_u64(F.p());  // f' = 0 with deg >= 1 forces p <= deg
  Int inv_frob = 1;
  for (int i = 1; i < F.k(); ++i) inv_frob *= F.p();
  std::vector<FieldElement> out;
  out.reserve(size_t(f.degree()) / p + 1);
  for (size_t i = 0; i <= size_t(f.degree()); i += p) {
    FieldElement a = f.coeff(int(i));
    out.push_back(F.k() == 1 ? a : F.pow(a, inv_frob));
  }
  return Poly(F, std::move(out));
}

// Squarefree decomposition: pairwise-coprime squarefree parts with their
// multiplicities, f = prod part^mult (up to a constant).
inline void squarefree_parts(const Poly& f, unsigned scale,
                             std::vector<std::pair<Poly, unsigned>>& out) {
  const Field& F = f.field();
  if (f.degree() <= 0) return;
  Poly d = f.derivative();
  if (d.is_zero()) {
    squarefree_parts(poly_pth_root(f), scale * unsigned(to_u64(F.p())), out);
    return;
  }
  Poly c = poly_gcd(f, d);
  Poly w = poly_div_exact(f.monic(), c);
  unsigned i = 1;
  while (w.degree() > 0) {
    Poly y = poly_gcd(w, c);
    Poly z = poly_div_exact(w, y);
    if (z.degree() > 0) out.emplace_back(z, i * scale);
    ++i;
    w = std::move(y);
    c = poly_div_exact(c, w);
  }
  if (c.degree() > 0)
    squarefree_parts(poly_pth_root(c), scale * unsigned(to_u64(F.p())), out);
}

}  // namespace detail

// True iff f is irreducible over its field. Constants are not irreducible.
inline bool poly_irreducible(const Poly& f) {
  const Field& F = f.field();
  check(!f.is_zero(), ErrorKind::ZeroPolynomial, "zero polynomial");
  int d = f.degree();
  if (d == 0) return false;
  if (d == 1) return true;
  Poly m = f.monic();
  Poly xp = Poly::x(F);
  // prime divisors of d
  std::vector<int> primes;
  int n = d;
  for (int r = 2; r * r <= n; ++r) {
    if (n % r == 0) {
      primes.push_back(r);
      while (n % r == 0) n /= r;
    }
  }
  if (n > 1) primes.push_back(n);
  // frob = x^{q^i} mod m, computed incrementally
  Poly frob = Poly::x(F);
  for (int i = 1; i <= d; ++i) {
    frob = poly_powmod(frob, F.q(), m);
    for (int r : primes) {
      if (i * r == d) {
        Poly g = poly_gcd(frob - xp, m);
        if (g.degree() != 0) return false;
      }
    }
  }
  return poly_mod(frob - xp, m).is_zero();
}

inline bool poly_irreducible(const std::vector<FieldElement>& coeffs,
                             const Field& F) {
  return poly_irreducible(Poly(F, coeffs));
}

// Multiset of irreducible-factor degrees with multiplicity, ascending.
// A degree-0 input has no factors; the zero polynomial is rejected.
inline std::vector<int> poly_factor_degrees(const Poly& f) {
  const Field& F = f.field();
  check(!f.is_zero(), ErrorKind::ZeroPolynomial, "zero polynomial");
  std::vector<int> degrees;
  std::vector<std::pair<Poly, unsigned>> parts;
  detail::squarefree_parts(f, 1, parts);
  for (auto& [part, mult] : parts) {
    // distinct-degree factorization of the squarefree part
    Poly g = part.monic();
    Poly xp = Poly::x(F);
    Poly h = poly_mod(xp, g);
    for (int d = 1; g.degree() > 0 && d <= g.degree() / 2; ++d) {
      h = poly_powmod(h, F.q(), g);
      Poly common = poly_gcd(h - xp, g);
      if (common.degree() > 0) {
        invariant(common.degree() % d == 0, "distinct-degree block out of shape");
        for (int c = 0; c < common.degree() / d; ++c)
          for (unsigned m = 0; m < mult; ++m) degrees.push_back(d);
        g = poly_div_exact(g, common);
        h = poly_mod(h, g);
      }
    }
    if (g.degree() > 0)
      for (unsigned m = 0; m < mult; ++m) degrees.push_back(g.degree());
  }
  std::sort(degrees.begin(), degrees.end());
  return degrees;
}

inline std::vector<int> poly_factor_degrees(const std::vector<FieldElement>& coeffs,
                                            const Field& F) {
  return poly_factor_degrees(Poly(F, coeffs));
}

}  // namespace jacsearch
