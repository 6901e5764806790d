#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <jacsearch/curve.hpp>
#include <jacsearch/genalg.hpp>

#include "test_util.hpp"
#include "vectors.hpp"

using namespace jacsearch;

namespace {

// Resultant of two integer polynomials via the Sylvester matrix and
// fraction-free Bareiss elimination; an independent route to the
// squarefreeness decision that curve construction makes with a gcd.
Int sylvester_resultant(const std::vector<Int>& a, const std::vector<Int>& b) {
  int da = int(a.size()) - 1, db = int(b.size()) - 1;
  int n = da + db;
  std::vector<std::vector<Int>> M(size_t(n), std::vector<Int>(size_t(n), 0));
  for (int r = 0; r < db; ++r)
    for (int j = 0; j <= da; ++j) M[size_t(r)][size_t(r + j)] = a[size_t(da - j)];
  for (int r = 0; r < da; ++r)
    for (int j = 0; j <= db; ++j)
      M[size_t(db + r)][size_t(r + j)] = b[size_t(db - j)];
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

std::vector<Int> int_derivative(const std::vector<Int>& f) {
  std::vector<Int> d;
  for (size_t i = 1; i < f.size(); ++i) d.push_back(f[i] * Int(uint64_t(i)));
  return d;
}

bool mumford_valid(const Divisor& D) {
  const CurveParams& C = *D.curve;
  if (!D.u.is_monic() || D.u.degree() > int(C.genus())) return false;
  if (!D.v.is_zero() && D.v.degree() >= D.u.degree()) return false;
  return poly_mod(D.v * D.v - C.f(), D.u).is_zero();
}

Int count_curve_points(const Field& F, const std::vector<Int>& fc) {
  Poly f = Poly::from_ints(F, fc);
  Int n = 1;
  for (Int i = 0; i < F.q(); ++i) {
    std::vector<Int> co;
    Int t = i;
    for (int j = 0; j < F.k(); ++j) {
      co.push_back(t % F.p());
      t /= F.p();
    }
    FieldElement x = F.from_coords(co);
    FieldElement y2 = f.eval(x);
    if (F.is_zero(y2))
      n += 1;
    else if (F.is_qr(y2))
      n += 2;
  }
  return n;
}

const std::vector<Int> kQuinticF7{1, 0, 0, 0, 0, 1};             // x^5 + 1
const std::vector<Int> kSepticF7{1, 1, 0, 0, 0, 0, 0, 1};        // x^7 + x + 1
const std::vector<Int> kQuintic1009{1, 0, 0, 0, 0, 1};           // x^5 + 1
const std::vector<Int> kSeptic1009{648, 5, 1, 4, 1, 3, 0, 1};
const std::vector<Int> kFamilyT816{816, 1, 7, 2, 0, 1};

}  // namespace

TEST_CASE("curves validate their defining polynomial") {
  Field F7(Int(7));
  CHECK_NOTHROW(curve_new(F7, 2, kQuinticF7));
  CHECK_NOTHROW(curve_new(F7, 3, kSepticF7));

  Field F50(parse_int_expr("2^50-27"));
  CHECK_NOTHROW(curve_new(F50, 3, std::vector<Int>{648, 5, 1, 4, 1, 3, 0, 1}));

  // the gcd decision agrees with an integer resultant of (f, f')
  Int res = sylvester_resultant(kQuinticF7, int_derivative(kQuinticF7));
  CHECK(res % 7 != 0);
  std::vector<Int> x5{0, 0, 0, 0, 0, 1};
  CHECK(sylvester_resultant(x5, int_derivative(x5)) == 0);

  REQUIRE_THROWS_MATCHES(curve_new(F7, 2, x5), Error,
                         ErrorKindIs(ErrorKind::SingularCurve));
  REQUIRE_THROWS_MATCHES(
      curve_new(F7, 2, std::vector<Int>{1, 0, 0, 0, 0, 2}), Error,
      ErrorKindIs(ErrorKind::NotMonic));
  REQUIRE_THROWS_MATCHES(curve_new(F7, 2, std::vector<Int>{1, 0, 0, 0, 1}),
                         Error, ErrorKindIs(ErrorKind::BadDegree));
  REQUIRE_THROWS_MATCHES(
      curve_new(F7, 2, std::vector<Int>{1, 0, 0, 0, 0, 0, 1}), Error,
      ErrorKindIs(ErrorKind::BadDegree));
  REQUIRE_THROWS_MATCHES(curve_new(F7, 1, std::vector<Int>{1, 0, 0, 1}), Error,
                         ErrorKindIs(ErrorKind::BadDegree));
  REQUIRE_THROWS_MATCHES(
      curve_new(F7, 4, std::vector<Int>{1, 0, 0, 0, 0, 0, 0, 0, 1}), Error,
      ErrorKindIs(ErrorKind::BadDegree));
}

TEST_CASE("twists scale coefficients by the canonical non-residue") {
  Field F7(Int(7));
  REQUIRE(F7.coords(F7.find_non_residue())[0] == 3);
  CurveParams C = curve_new(F7, 2, kQuinticF7);
  CurveParams T = twist(C);
  // 3^5 (x/3)^5 + 3^5 = x^5 + 243 = x^5 + 5 over F_7
  CHECK(T.f() == Poly::from_ints(F7, {5, 0, 0, 0, 0, 1}));

  // double twist scales coefficient i by alpha^(2(d-i))
  CurveParams TT = twist(T);
  const FieldElement& alpha = F7.find_non_residue();
  for (int i = 0; i <= 5; ++i) {
    FieldElement want = F7.mul(C.f().coeff(i),
                               F7.pow(alpha, Int(2 * (5 - i))));
    CHECK(TT.f().coeff(i) == want);
  }

  // the double twist is isomorphic: same group exponent over F_1009
  Field F(Int(1009));
  CurveParams C9 = curve_new(F, 2, kQuintic1009);
  CurveParams TT9 = twist(twist(C9));
  JacobianBox box_a(C9), box_b(TT9);
  SplitMix64 rng = rng_for(12, 0x01);
  auto la = group_exponent(box_a, 150, rng, 10);
  auto lb = group_exponent(box_b, 150, rng, 10);
  REQUIRE(la.has_value());
  REQUIRE(lb.has_value());
  CHECK(la->value == lb->value);
}

TEST_CASE("points lift to weight-one divisors") {
  Field F(Int(1009));
  CurveParams C = curve_new(F, 2, kQuintic1009);
  // f(1) = 2, a nonzero square mod 1009
  FieldElement x0 = F.from_int(Int(1));
  FieldElement y2 = C.f().eval(x0);
  REQUIRE(F.is_qr(y2));
  FieldElement y0 = *F.sqrt(y2);
  Divisor D = divisor_from_point(C, x0, y0);
  CHECK(D.u.degree() == 1);
  CHECK(mumford_valid(D));
  REQUIRE_THROWS_MATCHES(divisor_from_point(C, x0, F.add(y0, F.one())), Error,
                         ErrorKindIs(ErrorKind::BadInput));
}

TEST_CASE("group axioms hold on random divisors") {
  struct Case {
    Int p;
    unsigned g;
    std::vector<Int> f;
    int triples;
  };
  std::vector<Case> cases{
      {Int(7), 2, kQuinticF7, 300},
      {Int(7), 3, kSepticF7, 300},
      {Int(1009), 2, kQuintic1009, 300},
      {Int(1009), 3, kSeptic1009, 300},
      {parse_int_expr("2^61-1"), 2, kFamilyT816, 25},
  };
  uint64_t tag = 0x20;
  for (const auto& tc : cases) {
    Field F(tc.p);
    CurveParams C = curve_new(F, tc.g, tc.f);
    Divisor id = jac_identity(C);
    SplitMix64 rng = rng_for(12, tag++);
    for (int i = 0; i < tc.triples; ++i) {
      Divisor a = jac_random(C, rng);
      Divisor b = jac_random(C, rng);
      Divisor c = jac_random(C, rng);
      CHECK(mumford_valid(a));
      CHECK(jac_add(a, id) == a);
      CHECK(jac_add(id, a) == a);
      CHECK(jac_is_identity(jac_add(a, jac_neg(a))));
      CHECK(jac_add(a, b) == jac_add(b, a));
      CHECK(jac_add(jac_add(a, b), c) == jac_add(a, jac_add(b, c)));
    }
  }
}

TEST_CASE("one-inversion path agrees with the general path") {
  Field F(Int(1009));
  SplitMix64 rng = rng_for(12, 0x02);
  CurveParams C2 = curve_new(F, 2, kQuintic1009);
  for (int i = 0; i < 10000; ++i) {
    Divisor a = jac_random(C2, rng);
    Divisor b = (i % 10 == 0) ? a : jac_random(C2, rng);
    Divisor s = jac_add(a, b);
    CHECK(s == jac_add_cantor(a, b));
    CHECK(mumford_valid(s));
  }
  CurveParams C3 = curve_new(F, 3, kSeptic1009);
  for (int i = 0; i < 2000; ++i) {
    Divisor a = jac_random(C3, rng);
    Divisor b = (i % 10 == 0) ? a : jac_random(C3, rng);
    Divisor s = jac_add(a, b);
    CHECK(s == jac_add_cantor(a, b));
    CHECK(mumford_valid(s));
  }
  // weight-deficient inputs: points and their sums
  for (int i = 0; i < 500; ++i) {
    Divisor a = jac_random(C3, rng);
    Divisor p = jac_identity(C3);
    while (jac_is_identity(p)) {
      FieldElement x0 = F.random_element(rng);
      FieldElement y2 = C3.f().eval(x0);
      if (F.is_zero(y2) || !F.is_qr(y2)) continue;
      p = divisor_from_point(C3, x0, *F.sqrt(y2));
    }
    CHECK(jac_add(a, p) == jac_add_cantor(a, p));
    CHECK(jac_add(p, p) == jac_add_cantor(p, p));
  }
}

TEST_CASE("batched operations match the scalar path") {
  Field F(Int(1009));
  CurveParams C = curve_new(F, 2, kQuintic1009);
  SplitMix64 rng = rng_for(12, 0x03);

  CHECK(jac_batch({}).empty());

  Divisor a0 = jac_random(C, rng), b0 = jac_random(C, rng);
  auto single = jac_batch({{a0, b0}});
  REQUIRE(single.size() == 1);
  CHECK(single[0] == jac_add(a0, b0));

  std::vector<std::pair<Divisor, Divisor>> pairs;
  std::vector<Divisor> want;
  for (int i = 0; i < 100; ++i) {
    Divisor a = jac_random(C, rng);
    Divisor b = jac_random(C, rng);
    if (i == 17) b = jac_neg(a);         // cancellation inside the batch
    if (i == 42) b = a;                  // doubling inside the batch
    if (i == 63) b = jac_identity(C);    // identity operand
    if (i == 64) a = jac_identity(C);
    pairs.emplace_back(a, b);
    want.push_back(jac_add_cantor(a, b));
  }
  auto got = jac_batch(pairs);
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < want.size(); ++i) CHECK(got[i] == want[i]);
  CHECK(jac_is_identity(got[17]));
}

TEST_CASE("exponentiation obeys the power laws") {
  Field F(Int(1009));
  CurveParams C = curve_new(F, 2, kQuintic1009);
  SplitMix64 rng = rng_for(12, 0x04);
  Divisor D = jac_random(C, rng);

  CHECK(jac_is_identity(jac_exp(D, Int(0))));
  CHECK(jac_exp(D, Int(1)) == D);
  CHECK(jac_exp(D, Int(2)) == jac_double(D));
  CHECK(jac_exp(D, Int(-3)) == jac_neg(jac_exp(D, Int(3))));

  for (int i = 0; i < 10; ++i) {
    Int a(rng.next() >> 32), b(rng.next() >> 32);
    CHECK(jac_exp(jac_exp(D, a), b) == jac_exp(D, a * b));
  }

  // factored form: 2^3 * 3 * 5^2 = 600
  std::vector<std::pair<uint64_t, unsigned>> e{{2, 3}, {3, 1}, {5, 2}};
  CHECK(jac_exp(D, e) == jac_exp(D, Int(600)));
}

TEST_CASE("random divisors are reproducible and valid") {
  Field F(Int(1009));
  CurveParams C3 = curve_new(F, 3, kSeptic1009);
  SplitMix64 r1 = rng_for(12, 0x05), r2 = rng_for(12, 0x05);
  for (int i = 0; i < 50; ++i) {
    Divisor a = jac_random(C3, r1);
    Divisor b = jac_random(C3, r2);
    CHECK(a == b);
    CHECK(mumford_valid(a));
  }

  // the sampled exponent annihilates fresh samples
  JacobianBox box(C3);
  SplitMix64 rng = rng_for(12, 0x06);
  auto lam = group_exponent(box, 300, rng, 10);
  REQUIRE(lam.has_value());
  for (int i = 0; i < 50; ++i) {
    CHECK(jac_is_identity(jac_exp(jac_random(C3, rng), lam->value)));
  }
}

TEST_CASE("hashes are sign-symmetric with a pinned identity value") {
  Field F(Int(1009));
  CurveParams C = curve_new(F, 2, kQuintic1009);
  SplitMix64 rng = rng_for(12, 0x07);
  for (int i = 0; i < 200; ++i) {
    Divisor D = jac_random(C, rng);
    CHECK(jac_hash(D) == jac_hash(jac_neg(D)));
  }
  // frozen value of the canonical identity serialization for this field
  CHECK(jac_hash(jac_identity(C), 64) == 0x35321904af054292ull);

  Divisor D = jac_random(C, rng);
  CHECK(jac_hash(D, 20) == jac_hash(D, 64) >> 44);
  REQUIRE_THROWS_MATCHES(jac_hash(D, 0), Error,
                         ErrorKindIs(ErrorKind::BadInput));
  REQUIRE_THROWS_MATCHES(jac_hash(D, 65), Error,
                         ErrorKindIs(ErrorKind::BadInput));
}

TEST_CASE("hash collisions stay near the birthday estimate") {
  Field F(Int(1000000007));
  CurveParams C = curve_new(F, 2, kFamilyT816);
  SplitMix64 rng = rng_for(12, 0x08);
  const size_t n = 1000000;
  const unsigned bits = 24;
  std::vector<uint32_t> hs;
  hs.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    hs.push_back(uint32_t(jac_hash(jac_random(C, rng), bits)));
  }
  std::sort(hs.begin(), hs.end());
  uint64_t colliding_pairs = 0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && hs[j] == hs[i]) ++j;
    uint64_t m = j - i;
    colliding_pairs += m * (m - 1) / 2;
    i = j;
  }
  // birthday expectation: C(n,2) / 2^bits
  const double expect = double(n) * double(n - 1) / 2.0 / double(1u << bits);
  CHECK(double(colliding_pairs) <= 2.0 * expect);
}

TEST_CASE("published group orders annihilate random divisors") {
  struct Row {
    const char* p;
    unsigned g;
    std::vector<Int> f;
    const char* order;
  };
  // order = P(1) for the matching parameter rows in the frozen tables
  std::vector<Row> rows;
  for (const auto& tc : jacsearch::vectors::kTableCurves) {
    if (std::string(tc.name) == "g2_61_816")
      rows.push_back(Row{tc.p_expr, 2, kFamilyT816, tc.p1});
    if (std::string(tc.name) == "g3_50_648")
      rows.push_back(Row{tc.p_expr, 3, kSeptic1009, tc.p1});
  }
  REQUIRE(rows.size() == 2);
  uint64_t tag = 0x09;
  for (const auto& row : rows) {
    Field F(parse_int_expr(row.p));
    CurveParams C = curve_new(F, row.g, row.f);
    Int order = parse_int_expr(row.order);
    SplitMix64 rng = rng_for(12, tag++);
    bool off_order_moves = false;
    for (int i = 0; i < 3; ++i) {
      Divisor D = jac_random(C, rng);
      CHECK(jac_is_identity(jac_exp(D, order)));
      if (!jac_is_identity(jac_exp(D, order + 1))) off_order_moves = true;
    }
    CHECK(off_order_moves);
  }
}

TEST_CASE("black-box structure matches direct point counts") {
  // x^5 + 1 over F_1009: point counts over the base field and its quadratic
  // extension pin the group order exactly.
  Field F1(Int(1009)), F2(Int(1009), 2);
  Int M1 = count_curve_points(F1, kQuintic1009);
  Int M2 = count_curve_points(F2, kQuintic1009);
  CHECK(M1 == 1010);
  CHECK(M2 == 1022118);
  Int q(1009);
  Int s1 = q + 1 - M1;
  Int s2 = q * q + 1 - M2;
  Int e2 = (s1 * s1 - s2) / 2;
  Int order = 1 - s1 + e2 - q * s1 + q * q;
  CHECK(order == 1020100);  // 2^2 * 5^2 * 101^2

  CurveParams C = curve_new(F1, 2, kQuintic1009);
  JacobianBox box(C);
  SplitMix64 rng = rng_for(12, 0x0B);
  auto res = group_order(box, make_exponent_context(150), rng, {}, 10);
  REQUIRE(res.has_value());
  CHECK(res->order == order);
  CHECK(res->lambda.value == 1010);
  REQUIRE(res->components.size() == 3);
  for (const auto& comp : res->components) {
    std::vector<uint64_t> os;
    for (const auto& [g, o] : comp.generators) os.push_back(o);
    CHECK(os == std::vector<uint64_t>{comp.prime, comp.prime});
  }
  auto [lo, hi] = weil_interval(Int(1009), 2);
  CHECK(order >= lo);
  CHECK(order <= hi);

  // the 101-part, of size 101^2, exceeds the reach of bound 100
  SplitMix64 rng2 = rng_for(12, 0x0C);
  auto capped = group_order(box, make_exponent_context(100), rng2, {}, 10);
  CHECK(!capped.has_value());
}

TEST_CASE("serialization is degree-prefixed") {
  Field F(Int(1009));
  CurveParams C = curve_new(F, 2, kQuintic1009);
  size_t w = F.coord_bytes();

  auto id_bytes = jac_serialize(jac_identity(C));
  REQUIRE(id_bytes.size() == 8 + w);
  CHECK(id_bytes[0] == 1);  // u has one coefficient
  CHECK(id_bytes[1] == 0);
  CHECK(id_bytes[4] == 1);  // the coefficient is one
  CHECK(id_bytes[4 + w] == 0);  // v has no coefficients

  SplitMix64 rng = rng_for(12, 0x0D);
  for (int i = 0; i < 20; ++i) {
    Divisor D = jac_random(C, rng);
    auto bytes = jac_serialize(D);
    uint32_t nu = uint32_t(bytes[0]) | (uint32_t(bytes[1]) << 8) |
                  (uint32_t(bytes[2]) << 16) | (uint32_t(bytes[3]) << 24);
    CHECK(nu == D.u.coeffs().size());
    CHECK(bytes.size() ==
          8 + w * (D.u.coeffs().size() + D.v.coeffs().size()));
  }
}

TEST_CASE("divisors from different curve objects do not mix") {
  Field F(Int(1009));
  CurveParams A = curve_new(F, 2, kQuintic1009);
  CurveParams B = curve_new(F, 2, kQuintic1009);  // equal values, new object
  SplitMix64 rng = rng_for(12, 0x0E);
  Divisor da = jac_random(A, rng);
  Divisor db = jac_random(B, rng);
  REQUIRE_THROWS_MATCHES(jac_add(da, db), Error,
                         ErrorKindIs(ErrorKind::CurveMismatch));
  REQUIRE_THROWS_MATCHES(jac_batch({{da, db}}), Error,
                         ErrorKindIs(ErrorKind::CurveMismatch));
}
