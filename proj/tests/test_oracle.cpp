#include <catch2/catch_amalgamated.hpp>

#include <optional>
#include <string>
#include <vector>

#include "jacsearch/bigint.hpp"
#include "jacsearch/curve.hpp"
#include "jacsearch/ff.hpp"
#include "jacsearch/oracle.hpp"
#include "jacsearch/zeta.hpp"
#include "test_util.hpp"
#include "vectors.hpp"

using namespace jacsearch;

namespace {

// k-th power sum of the inverse roots, from Newton's identities.
Int power_sum(const LPolynomial& P, unsigned k) {
  std::vector<Int> s(k + 1, 0);
  for (unsigned j = 1; j <= k; ++j) {
    Int acc = j * P.a[j];
    for (unsigned i = 1; i < j; ++i) acc += P.a[i] * s[j - i];
    s[j] = -acc;
  }
  return s[k];
}

}  // namespace

TEST_CASE("point counts match hand-checked tables") {
  Field F7(Int(7));
  CurveParams C7 = curve_new(F7, 2, {1, 0, 0, 0, 0, 1});
  CHECK(naive_counts(C7, 1) == 8);  // squares mod 7 are {1,2,4}

  Field F(Int(1009));
  CurveParams C = curve_new(F, 2, {1, 0, 0, 0, 0, 1});
  CHECK(naive_counts(C, 1) == 1010);
  CHECK(naive_counts(C, 2) == 1022118);
  CHECK(naive_jacobian_order(C) == 1020100);
}

TEST_CASE("counts over extensions agree with the zeta prediction") {
  // the first g counts determine every higher count through the polynomial
  Field F(Int(101));
  CurveParams C = curve_new(F, 2, {17, 3, 0, 1, 0, 1});
  LPolynomial P = oracle_lpoly(C);
  for (unsigned k = 1; k <= 3; ++k) {
    Int predicted = pow_int(Int(101), k) + 1 - power_sum(P, k);
    CHECK(naive_counts(C, k) == predicted);
  }
}

TEST_CASE("counting rejects unsupported inputs") {
  Field Fx(Int(7), 2);
  CurveParams Cx = curve_new(Fx, 2, {1, 2, 0, 0, 0, 1});
  CHECK_THROWS_MATCHES(naive_counts(Cx, 1), Error,
                       ErrorKindIs(ErrorKind::BadInput));

  Field F(Int(1009));
  CurveParams C = curve_new(F, 2, {1, 2, 0, 0, 0, 1});
  CHECK_THROWS_MATCHES(naive_counts(C, 0), Error,
                       ErrorKindIs(ErrorKind::BadInput));
  CHECK_THROWS_MATCHES(naive_counts(C, 3), Error,
                       ErrorKindIs(ErrorKind::FieldTooLarge));

  Int big_p = Int(1) << 26;
  mpz_nextprime(big_p.get_mpz_t(), big_p.get_mpz_t());
  Field Fb(big_p);
  CurveParams Cb = curve_new(Fb, 2, {1, 2, 0, 0, 0, 1});
  CHECK_THROWS_MATCHES(naive_counts(Cb, 1), Error,
                       ErrorKindIs(ErrorKind::FieldTooLarge));
  CHECK_THROWS_MATCHES(naive_jacobian_order(Cb), Error,
                       ErrorKindIs(ErrorKind::FieldTooLarge));
}

TEST_CASE("order routes agree on both strategies") {
  Field F(Int(251));
  for (int t : {1, 2, 5, 9, 14}) {
    CurveParams C = curve_new(F, 2, {t, 1, 0, 0, 0, 1});
    INFO("t=" << t);
    Int via_counts = naive_jacobian_order(C);
    Int via_scan = naive_jacobian_order(C, true);
    CHECK(via_counts == via_scan);
    auto [lo, hi] = weil_interval(Int(251), 2);
    CHECK(via_counts >= lo);
    CHECK(via_counts <= hi);
  }
  Field F3(Int(101));
  CurveParams C3 = curve_new(F3, 3, {5, 1, 0, 0, 0, 0, 0, 1});
  CHECK(naive_jacobian_order(C3) == naive_jacobian_order(C3, true));
}

TEST_CASE("twist orders complement the curve count") {
  Field F(Int(251));
  for (int t : {3, 7, 11}) {
    CurveParams C = curve_new(F, 2, {t, 2, 1, 0, 0, 1});
    INFO("t=" << t);
    LPolynomial P = oracle_lpoly(C);
    LPolynomial Pt = oracle_lpoly(twist(C));
    CHECK(Pt == twist_lpoly(P));
    CHECK(lpoly_eval(Pt, 1) == lpoly_eval(P, -1));
    // the two curves cover every x twice between them
    Int n1 = naive_counts(C, 1), n1t = naive_counts(twist(C), 1);
    CHECK(n1 + n1t == 2 * (Int(251) + 1));
  }
  CurveParams C3 = curve_new(F, 3, {13, 1, 2, 0, 0, 0, 0, 1});
  LPolynomial P3 = oracle_lpoly(C3);
  CHECK(oracle_lpoly(twist(C3)) == twist_lpoly(P3));
}

TEST_CASE("pipeline recovery matches the oracle on random genus 2 curves") {
  Field F(Int(1009));
  int done = 0;
  for (int t = 1; t <= 60 && done < 40; ++t) {
    std::optional<CurveParams> C;
    try {
      C.emplace(curve_new(F, 2, {t, 1, 0, 0, 0, 1}));
    } catch (const Error&) {
      continue;  // singular member of the family
    }
    INFO("t=" << t);
    LPolynomial P = oracle_lpoly(*C);
    CurveParams Ct = twist(*C);
    JacobianBox box(Ct);
    LPolynomial R = recover_genus2(lpoly_eval(P, 1), box, Int(1009));
    CHECK(R == P);
    ++done;
  }
  CHECK(done == 40);
}

TEST_CASE("pipeline recovery matches the oracle on genus 3 curves") {
  Field F(Int(2003));
  int done = 0;
  for (int t = 1; t <= 10 && done < 4; ++t) {
    std::optional<CurveParams> C;
    try {
      C.emplace(curve_new(F, 3, {t, 1, 0, 0, 0, 0, 0, 1}));
    } catch (const Error&) {
      continue;
    }
    INFO("t=" << t);
    LPolynomial P = oracle_lpoly(*C);
    CurveParams Ct = twist(*C);
    JacobianBox box(Ct);
    LPolynomial R = recover_genus3(lpoly_eval(P, 1), box, Int(2003));
    CHECK(R == P);
    ++done;
  }
  CHECK(done == 4);
}

TEST_CASE("worked factored orders multiply back to the frozen values") {
  const vectors::TableCurve* tc = nullptr;
  for (const auto& row : vectors::kTableCurves) {
    if (std::string(row.name) == "g3_50_648") tc = &row;
  }
  REQUIRE(tc != nullptr);
  CHECK(parse_int_expr(vectors::kWorkedGenus3.order_factored) ==
        Int(std::string(tc->p1)));
  CHECK(parse_int_expr(vectors::kWorkedGenus3.order_twist_factored) ==
        Int(std::string(tc->pm1)));
  CHECK(Int(std::string(vectors::kWorkedGenus3.a1)) ==
        Int(std::string(tc->a1)));
  CHECK(Int(std::string(vectors::kWorkedGenus3.a2)) ==
        Int(std::string(tc->a2)));
  CHECK(Int(std::string(vectors::kWorkedGenus3.a3)) ==
        Int(std::string(tc->a3)));
}
