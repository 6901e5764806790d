#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "jacsearch/bigint.hpp"
#include "jacsearch/errors.hpp"
#include "jacsearch/rng.hpp"
#include "vectors.hpp"

using namespace jacsearch;

TEST_CASE("splitmix64 matches the reference stream") {
  SplitMix64 r0(0);
  CHECK(r0.next() == 0xE220A8397B1DCDAFull);
  CHECK(r0.next() == 0x6E789E6AA1B965F4ull);
  CHECK(r0.next() == 0x06C45D188009454Full);
  SplitMix64 r42(42);
  CHECK(r42.next() == 0xBDD732262FEB6E95ull);
  CHECK(r42.next() == 0x28EFE333B266F103ull);
}

TEST_CASE("derived streams depend only on seed and tag") {
  SplitMix64 a = rng_for(1, 5);
  SplitMix64 b = rng_for(1, 5);
  for (int i = 0; i < 64; ++i) REQUIRE(a.next() == b.next());

  SplitMix64 c = rng_for(1, 6);
  SplitMix64 d = rng_for(2, 5);
  SplitMix64 e = rng_for(1, 5);
  bool tag_differs = false, seed_differs = false;
  for (int i = 0; i < 8; ++i) {
    uint64_t v = e.next();
    tag_differs |= (c.next() != v);
    seed_differs |= (d.next() != v);
  }
  CHECK(tag_differs);
  CHECK(seed_differs);
}

TEST_CASE("bounded draws stay in range and cover all residues") {
  SplitMix64 r(7);
  std::set<uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    uint64_t v = r.next_below(10);
    REQUIRE(v < 10);
    seen.insert(v);
  }
  CHECK(seen.size() == 10);
  CHECK(r.next_below(1) == 0);
  CHECK(r.next_range(5, 5) == 5);
  for (int i = 0; i < 100; ++i) {
    uint64_t v = r.next_range(3, 17);
    REQUIRE(v >= 3);
    REQUIRE(v <= 17);
  }
}

TEST_CASE("integer expressions evaluate") {
  CHECK(parse_int_expr("2^61-1") == Int("2305843009213693951"));
  CHECK(parse_int_expr("3*10^16+29") == Int("30000000000000029"));
  CHECK(parse_int_expr("2^50-27") == Int("1125899906842597"));
  CHECK(parse_int_expr("2^84-35") == (pow_int(2, 84) - 35));
  CHECK(parse_int_expr("2^89-1") == (pow_int(2, 89) - 1));
  CHECK(parse_int_expr("2^93-25") == (pow_int(2, 93) - 25));
  CHECK(parse_int_expr("(2^10+1)*3") == 3075);
  CHECK(parse_int_expr(" 41 ") == 41);
  CHECK(parse_int_expr("-5+2") == -3);
  CHECK(parse_int_expr("2^3^2") == 512);  // right associative
  CHECK(parse_int_expr("10-2-3") == 5);   // subtraction left associative
}

TEST_CASE("integer expressions reject junk") {
  for (const char* bad : {"", "2^", "(1", "1)+2", "2**3", "0x10", "5!", "^2"}) {
    CHECK_THROWS_AS(parse_int_expr(bad), Error);
  }
  try {
    parse_int_expr("7 apples");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadInput);
  }
}

TEST_CASE("primality agrees with a sieve below 20000") {
  std::vector<uint32_t> primes = primes_below(20000);
  std::set<uint32_t> prime_set(primes.begin(), primes.end());
  for (uint32_t n = 0; n < 20000; ++n) {
    REQUIRE(is_prime(Int(n)) == (prime_set.count(n) != 0));
  }
}

TEST_CASE("primality rejects strong pseudoprimes and Carmichael numbers") {
  for (uint32_t n : {2047u, 3277u, 4033u, 4681u, 8321u, 15841u, 29341u,
                     42799u, 49141u, 52633u, 65281u, 74665u, 80581u, 85489u,
                     88357u, 90751u, 561u, 1105u, 1729u, 2465u, 2821u, 6601u}) {
    CHECK_FALSE(is_prime(Int(n)));
  }
}

TEST_CASE("primality handles large inputs") {
  CHECK(is_prime(pow_int(2, 61) - 1));
  CHECK(is_prime(pow_int(2, 89) - 1));
  CHECK(is_prime(pow_int(2, 127) - 1));
  CHECK_FALSE(is_prime(pow_int(2, 67) - 1));
  CHECK_FALSE(is_prime((pow_int(2, 61) - 1) * (pow_int(2, 61) - 1)));
  CHECK_FALSE(is_prime((pow_int(2, 61) - 1) * (pow_int(2, 89) - 1)));
}

TEST_CASE("every table characteristic parses and is prime") {
  for (const auto& c : vectors::kTableCurves) {
    Int p = parse_int_expr(c.p_expr);
    CHECK(p > 2);
    CHECK(is_prime(p));
  }
}

TEST_CASE("bounded trial division strips exactly the small part") {
  Int q("1000000007");  // exceeds 10000^2, so the small bound cannot certify it
  REQUIRE(is_prime(q));
  Int n = pow_int(2, 5) * pow_int(3, 2) * q;

  Factorization f = factor_bounded(n, 10000);
  REQUIRE(f.factors.size() == 2);
  CHECK(f.factors[0] == std::pair<Int, unsigned>(2, 5));
  CHECK(f.factors[1] == std::pair<Int, unsigned>(3, 2));
  CHECK(f.cofactor == q);
  CHECK(f.value() == n);

  // With a bound whose square exceeds the leftover, it is classified prime.
  Factorization g = factor_bounded(n, 1u << 24);
  CHECK(g.complete());
  REQUIRE(g.factors.size() == 3);
  CHECK(g.factors[2] == std::pair<Int, unsigned>(q, 1));

  Factorization one = factor_bounded(1);
  CHECK(one.complete());
  CHECK(one.factors.empty());

  Factorization pow2 = factor_bounded(pow_int(2, 10), 100);
  CHECK(pow2.complete());
  REQUIRE(pow2.factors.size() == 1);
  CHECK(pow2.factors[0] == std::pair<Int, unsigned>(2, 10));
}

TEST_CASE("effort-bounded factorization splits medium semiprimes") {
  Int p("1000003"), q("1000033");
  REQUIRE(is_prime(p));
  REQUIRE(is_prime(q));

  Factorization f = factorize(p * q, 1000);
  REQUIRE(f.complete());
  REQUIRE(f.factors.size() == 2);
  CHECK(f.factors[0] == std::pair<Int, unsigned>(p, 1));
  CHECK(f.factors[1] == std::pair<Int, unsigned>(q, 1));

  Factorization g = factorize(p * p * q, 1000);
  REQUIRE(g.complete());
  REQUIRE(g.factors.size() == 2);
  CHECK(g.factors[0] == std::pair<Int, unsigned>(p, 2));
  CHECK(g.factors[1] == std::pair<Int, unsigned>(q, 1));

  // Deterministic across calls.
  Factorization h = factorize(p * q, 1000);
  CHECK(h.factors == f.factors);
  CHECK(h.cofactor == f.cofactor);
}

TEST_CASE("factorization value round-trips and largest prime is reported") {
  Int n = Int("54880077749424473770842486727458448993") * 8 * 3 * 1083611;
  Factorization f = factorize(n);
  CHECK(f.value() == n);
  if (f.complete()) {
    CHECK(f.largest_prime() == Int("54880077749424473770842486727458448993"));
  }
}

TEST_CASE("integer root and square helpers") {
  Int t15 = pow_int(10, 15);
  CHECK(isqrt(t15 * t15) == t15);
  CHECK(isqrt(t15 * t15 + 1) == t15);
  CHECK(isqrt(t15 * t15 - 1) == t15 - 1);
  CHECK(iroot(pow_int(2, 90), 3) == pow_int(2, 30));
  CHECK(iroot(pow_int(2, 90) - 1, 3) == pow_int(2, 30) - 1);
  CHECK(iroot(Int(12345), 1) == 12345);
  CHECK(is_square(t15 * t15));
  CHECK_FALSE(is_square(t15 * t15 + 1));
  CHECK_THROWS_AS(isqrt(Int(-1)), Error);
  CHECK_THROWS_AS(iroot(Int(5), 0), Error);
}

TEST_CASE("bit length and u64 conversion") {
  CHECK(bit_length(Int(0)) == 0);
  CHECK(bit_length(Int(1)) == 1);
  CHECK(bit_length(pow_int(2, 64)) == 65);
  CHECK(bit_length(pow_int(2, 61) - 1) == 61);
  CHECK(to_u64(Int("18446744073709551615")) == 0xFFFFFFFFFFFFFFFFull);
  CHECK_THROWS_AS(to_u64(pow_int(2, 64)), Error);
  CHECK_THROWS_AS(to_u64(Int(-1)), Error);
}

TEST_CASE("errors carry their kind") {
  Error e(ErrorKind::SingularCurve, "discriminant vanished");
  CHECK(e.kind() == ErrorKind::SingularCurve);
  CHECK(std::string(e.what()).find("SingularCurve") != std::string::npos);
  CHECK_THROWS_AS(check(false, ErrorKind::Io, "boom"), Error);
  CHECK_NOTHROW(invariant(true, "fine"));
}
