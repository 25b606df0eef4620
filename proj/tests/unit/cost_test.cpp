#include <doctest.h>

#include <random>

#include "nesy/cost/flops.hpp"

using namespace nesy::cost;

namespace {

// Golden values from tests/oracles/flops_oracle.py (exact fractions,
// component-by-component per-token costs).
ModelArch toy() { return load_arch(NESY_DATA_DIR "/arch/toy.json"); }

ModelArch arch(const char* file) { return load_arch(std::string(NESY_DATA_DIR "/arch/") + file); }

}  // namespace

TEST_CASE("rational arithmetic") {
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(4, -8) == Rational(-1, 2));
  CHECK((Rational(3) * Rational(2, 3)).is_integer());
  CHECK(Rational(7, 2).str() == "7/2");
  CHECK(Rational(1, 3) < Rational(1, 2));
  const Rational big(int128(1) << 100, 1);
  CHECK_THROWS_AS(big * big, RationalOverflow);
}

TEST_CASE("parameter count") {
  CHECK(param_count(toy()) == Rational(2216));
  auto zero = toy();
  zero.n_layer = 0;
  CHECK(param_count(zero) == Rational(8 * 16 + 8));
  auto a = toy();
  a.n_heads = 8;
  a.d_attn = 1;
  Rational prev = param_count(a);
  for (int g : {2, 4, 8}) {
    a.g = g;
    CHECK(param_count(a) < prev);
    prev = param_count(a);
  }
  CHECK_THROWS_AS(param_count(arch("deepseek-r1.json")), ArchError);
}

TEST_CASE("first token") {
  CHECK(first_token(toy(), std::int64_t{1}).total() == Rational(5356));
  CHECK(first_token(toy(), std::int64_t{4}).total() == Rational(20728));
  CHECK(first_token(toy(), std::int64_t{4}).embedding == Rational(0));
  auto g2 = toy();
  g2.g = 2;
  CHECK(first_token(g2, std::int64_t{4}).total() == Rational(19608));
  auto moe = toy();
  moe.moe = MoeConfig{2, 16};
  CHECK(first_token(moe, std::int64_t{4}).total() == Rational(21048));

  Rational prev = first_token(toy(), std::int64_t{1}).total();
  for (std::int64_t n = 2; n < 200; ++n) {
    const Rational c = first_token(toy(), n).total();
    CHECK(c > prev);
    if (n % 2 == 0) CHECK(c <= Rational(4) * first_token(toy(), n / 2).total());
    prev = c;
  }
}

TEST_CASE("ith token") {
  CHECK(ith_token(toy(), 4, 2) == Rational(5896));
  CHECK(ith_token(toy(), 4, 3) == Rational(6004));
  CHECK(per_token(toy(), std::int64_t{4}).c_ic == Rational(108));
  for (std::int64_t i = 2; i < 50; ++i) CHECK(ith_token(toy(), 7, i + 1) - ith_token(toy(), 7, i) == Rational(108));
  CHECK_THROWS_AS(ith_token(toy(), 4, 1), std::invalid_argument);
}

TEST_CASE("total cost") {
  CHECK(total(toy(), 4, 1) == first_token(toy(), std::int64_t{4}).total());
  CHECK(total(toy(), 4, 3) == Rational(32628));
  auto g2 = toy();
  g2.g = 2;
  CHECK(total(g2, 4, 5) == Rational(42720));
  CHECK(static_cast<double>(total_avg(toy(), 4.0L, 3.0L)) == doctest::Approx(32628).epsilon(1e-15));
}

TEST_CASE("closed form equals term-by-term summation") {
  std::mt19937_64 rng(2024);
  auto pick = [&](std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  for (int sample = 0; sample < 50; ++sample) {
    ModelArch a;
    a.n_heads = pick(1, 16);
    a.d_attn = pick(1, 64);
    a.d_model = a.n_heads * a.d_attn;
    std::vector<std::int64_t> divisors;
    for (std::int64_t g = 1; g <= a.n_heads; ++g) {
      if (a.n_heads % g == 0) divisors.push_back(g);
    }
    a.g = divisors[static_cast<std::size_t>(pick(0, static_cast<std::int64_t>(divisors.size()) - 1))];
    a.n_layer = pick(1, 40);
    a.d_ff = pick(1, 4096);
    a.n_vocab = pick(1, 50000);
    a.n_A = pick(0, 12);
    if (sample % 5 == 0) a.moe = MoeConfig{pick(1, 9), pick(1, 2048)};
    const std::int64_t n_ctx = pick(1, 2000);
    const std::int64_t n_out = pick(1, 64);
    Rational sum = first_token(a, n_ctx).total();
    for (std::int64_t i = 2; i <= n_out; ++i) sum += ith_token(a, n_ctx, i);
    CHECK(total(a, n_ctx, n_out) == sum);
  }
}

TEST_CASE("total is monotone in every size") {
  const auto base = arch("phi-4.json");
  const long double c = total_avg(base, 500.0L, 100.0L);
  CHECK(total_avg(base, 501.0L, 100.0L) > c);
  CHECK(total_avg(base, 500.0L, 101.0L) > c);
  auto a = base;
  a.d_ff += 1;
  CHECK(total_avg(a, 500.0L, 100.0L) > c);
  a = base;
  a.n_layer += 1;
  CHECK(total_avg(a, 500.0L, 100.0L) > c);
  a = base;
  a.d_model += a.n_heads;
  a.d_attn += 1;
  CHECK(total_avg(a, 500.0L, 100.0L) > c);
}

TEST_CASE("approximation and discrepancy") {
  CHECK(static_cast<double>(approx(14e9L, 1706.5L, 181.5L)) == doctest::Approx(5.2864e13).epsilon(1e-12));
  CHECK(static_cast<double>(approx(12e9L, 1718.5L, 181.5L)) == doctest::Approx(4.56e13).epsilon(1e-12));
  CHECK(static_cast<double>(approx(10e9L, 1762.0L, 176.0L)) == doctest::Approx(3.876e13).epsilon(1e-12));
  CHECK(static_cast<double>(discrepancy(100, 110)) == doctest::Approx(10));
  CHECK(static_cast<double>(discrepancy(5, 5)) == 0);
  CHECK(static_cast<double>(discrepancy(4.17e13L, 4.56e13L)) == doctest::Approx(9.35).epsilon(0.001));
  CHECK_THROWS_AS(discrepancy(0, 1), std::invalid_argument);
}

TEST_CASE("large models stay exact") {
  const auto llama = arch("llama-3.1-405b.json");
  const auto exact = total(llama, 128, 88);
  CHECK(exact.to_long_double() > 1e14L);
  CHECK(static_cast<double>(total_avg(llama, 128.0L, 88.0L)) ==
        doctest::Approx(static_cast<double>(exact.to_long_double())).epsilon(1e-15));
  auto b = breakdown(llama, {128, 87.5L});
  CHECK_FALSE(b.exact);
  CHECK(static_cast<double>(b.c_total) == doctest::Approx(1.73e14).epsilon(0.1));
  CHECK(breakdown(llama, {128, 88}).exact);
}

TEST_CASE("arch validation") {
  auto j = to_json(toy());
  j.erase("n_heads");
  try {
    arch_from_json(j);
    FAIL("expected ArchError");
  } catch (const ArchError& e) {
    CHECK(e.field() == "n_heads");
  }
  auto bad = toy();
  bad.d_attn = 3;
  CHECK_THROWS_AS(validate(bad), ArchError);
  bad = toy();
  bad.g = 3;
  CHECK_THROWS_AS(validate(bad), ArchError);
  auto round = arch_from_json(to_json(arch("deepseek-r1.json")));
  REQUIRE(round.moe);
  CHECK(round.moe->n_active_experts == 9);
}
