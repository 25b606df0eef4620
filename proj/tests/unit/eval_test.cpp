#include <doctest.h>

#include <random>
#include <sstream>

#include "nesy/eval/records.hpp"
#include "nesy/logic/forward_chain.hpp"
#include "nesy/logic/problem_io.hpp"

using namespace nesy;
using eval::check_completeness;
using eval::check_faithfulness;
using logic::FactStep;
using logic::GoldenChain;
using logic::Literal;
using logic::Rule;
using logic::RuleStep;
using Idx = std::vector<std::size_t>;

namespace {

const std::vector<eval::StepPattern>& patterns() {
  static const auto p = eval::load_patterns(std::string(NESY_DATA_DIR) + "/patterns/steps.txt");
  return p;
}

GoldenChain whiskers_chain() {
  return GoldenChain({FactStep{Literal::fact("Cat", "whiskers")}, RuleStep{Rule::make("Cat", "Mammal")},
                      RuleStep{Rule::make("Mammal", "Animal")}});
}

// Exists a strictly increasing map of golden positions into detected.
bool embeds(const Idx& g, const Idx& m, std::size_t gi = 0, std::size_t mi = 0) {
  if (gi == g.size()) return true;
  for (std::size_t j = mi; j < m.size(); ++j) {
    if (m[j] == g[gi] && embeds(g, m, gi + 1, j + 1)) return true;
  }
  return false;
}

void all_lists(std::size_t max_len, std::size_t alphabet, std::vector<Idx>& out, Idx cur = {}) {
  out.push_back(cur);
  if (cur.size() == max_len) return;
  for (std::size_t s = 0; s < alphabet; ++s) {
    cur.push_back(s);
    all_lists(max_len, alphabet, out, cur);
    cur.pop_back();
  }
}

}  // namespace

TEST_CASE("answer extraction") {
  CHECK_FALSE(eval::extract_answer("...Therefore the query ``Whiskers Swims'' is false."));
  CHECK_FALSE(eval::extract_answer("True. Well, actually false."));
  CHECK_FALSE(eval::extract_answer("I cannot determine this."));
  CHECK(eval::extract_answer("The answer is TRUE"));
  CHECK(eval::extract_answer("false at first, then true!"));
  CHECK_FALSE(eval::extract_answer("untrue"));
  CHECK(eval::extract_answer("True\n\nSo this is untruthful trueish"));
  CHECK(eval::extract_answer("(true)"));
  const std::string base = "Reasoning... the answer is True";
  CHECK(eval::extract_answer(base) == eval::extract_answer(base + " and that settles it."));
}

TEST_CASE("wilson interval") {
  // Reference bounds evaluated at 40 digits with mpmath.
  struct Ref {
    double p, n, z, low, high;
  };
  const Ref refs[] = {
      {0.5, 300, 3, 0.4146679814017138557, 0.5853320185982861443},
      {0.0, 50, 3, 0.0, 0.1525423728813559322},
      {1.0, 50, 3, 0.8474576271186440678, 1.0},
      {0.9, 300, 3, 0.8358414862796506677, 0.94085754284656296765},
      {0.5, 1200, 3, 0.45686020185927119125, 0.54313979814072880875},
  };
  for (const auto& r : refs) {
    const auto w = eval::wilson_interval(r.p, r.n, r.z);
    CHECK(w.p_low == doctest::Approx(r.low).epsilon(1e-12));
    CHECK(w.p_high == doctest::Approx(r.high).epsilon(1e-12));
  }
  CHECK(eval::wilson_interval(0.0, 50, 3).p_low == 0.0);
  CHECK(eval::wilson_interval(0.0, 50, 3).p_high > 0.0);

  double last = 1;
  for (double n : {10.0, 40.0, 160.0, 640.0}) {
    const auto w = eval::wilson_interval(0.5, n, 3);
    CHECK(w.p_high - w.p_low < last);
    CHECK(w.p_low + w.p_high == doctest::Approx(1.0));
    last = w.p_high - w.p_low;
  }
  CHECK_THROWS_AS(eval::wilson_interval(1.5, 10, 3), std::invalid_argument);
  CHECK_THROWS_AS(eval::wilson_interval(0.5, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(eval::wilson_interval(0.5, 10, 0), std::invalid_argument);
}

TEST_CASE("completeness and faithfulness") {
  CHECK(check_completeness(3, {2, 1, 0}));
  CHECK_FALSE(check_completeness(3, {0, 2}));
  CHECK(check_completeness(3, {0, 0, 1, 2}));

  CHECK(check_faithfulness({0, 1}, {0, 9, 1}));
  CHECK_FALSE(check_faithfulness({0, 1}, {1, 0}));
  CHECK_FALSE(check_faithfulness({0}, {5, 6}));
  CHECK(check_faithfulness({}, {}));
  CHECK(check_faithfulness({}, {1}));
  CHECK_FALSE(check_faithfulness({1}, {}));

  std::vector<Idx> lists;
  all_lists(4, 4, lists);
  CHECK(lists.size() == 341);
  for (const auto& g : lists) {
    for (const auto& m : lists) {
      const bool f = check_faithfulness(g, m);
      REQUIRE(f == embeds(g, m));
    }
  }
}

TEST_CASE("pattern library") {
  CHECK(patterns().size() >= 10);
  CHECK_THROWS_AS(eval::parse_patterns("a fact ([unclosed"), eval::PatternError);
  CHECK_THROWS_AS(eval::parse_patterns("a belief x"), eval::PatternError);
  CHECK_THROWS_AS(eval::parse_patterns("a fact x\na rule y"), eval::PatternError);
  auto p = eval::parse_patterns("# comment\n\nn1 rule- \\bno {antecedent}\n");
  REQUIRE(p.size() == 1);
  CHECK(p[0].negated == std::optional<bool>(true));
  CHECK(p[0].kind == eval::StepKind::rule);
}

TEST_CASE("step detection") {
  const auto chain = whiskers_chain();
  SUBCASE("bottom-up replay of the figure") {
    auto lm = eval::detect_steps(
        "Whiskers is a cat. Each cat is a mammal. Therefore Whiskers is a mammal. Every mammal is an animal. "
        "Therefore Whiskers is an animal. True.",
        chain, patterns());
    CHECK(lm == Idx{0, 1, 2});
  }
  SUBCASE("only the conclusion") {
    CHECK(eval::detect_steps("Therefore Whiskers is an animal.", chain, patterns()) == Idx{2});
  }
  SUBCASE("reverse order") {
    auto lm = eval::detect_steps(
        "True or false: Whiskers is an animal. Every mammal is an animal.\nTrue or false: Whiskers\n is a mammal. "
        "Each cat is a mammal. Whiskers is a cat.",
        chain, patterns());
    CHECK(lm == Idx{2, 1, 0});
  }
  SUBCASE("phrasing variants") {
    CHECK(eval::detect_steps("all cats are MAMMALS", chain, patterns()) == Idx{1});
    CHECK(eval::detect_steps("Whiskers is a dog. Dogs are mammals.", chain, patterns()).empty());
  }
  SUBCASE("negated rules and adjectives") {
    GoldenChain g({FactStep{Literal::fact("Cat", "alex")}, RuleStep{Rule::make("Cat", "Luminous", true)}});
    CHECK(eval::detect_steps("Alex is a cat. No cat is luminous. So Alex is not luminous.", g, patterns()) ==
          Idx{0, 1});
    CHECK(eval::detect_steps("Cats are not luminous.", g, patterns()) == Idx{1});
    CHECK(eval::detect_steps("Cats are luminous.", g, patterns()).empty());
  }
}

TEST_CASE("scoring a response") {
  logic::Problem p;
  p.id = "fig1";
  p.answer = true;
  p.chain = whiskers_chain();
  const std::string bottom_up =
      "Whiskers is a cat. Each cat is a mammal. Therefore Whiskers is a mammal. Every mammal is an animal. "
      "Therefore Whiskers is an animal. The answer is True.";
  auto r = eval::score_response(p, {.condition = "bottom_up", .response = bottom_up, .prompt_tokens = 100, .completion_tokens = 50}, patterns());
  CHECK(r.correct);
  CHECK(r.complete == std::optional<bool>(true));
  CHECK(r.faithful == std::optional<bool>(true));

  auto td = eval::score_response(p, {.condition = "top_down", .response = bottom_up}, patterns());
  CHECK(td.complete == std::optional<bool>(true));
  CHECK(td.faithful == std::optional<bool>(false));

  auto cot = eval::score_response(p, {.condition = "cot", .response = bottom_up}, patterns());
  CHECK_FALSE(cot.faithful.has_value());

  p.chain.reset();
  auto bare = eval::score_response(p, {.condition = "bottom_up", .response = bottom_up}, patterns());
  CHECK_FALSE(bare.complete.has_value());
  CHECK_FALSE(bare.faithful.has_value());
}

TEST_CASE("overrides") {
  std::vector<eval::EvalRecord> rs(3);
  for (int i = 0; i < 3; ++i) {
    rs[i].id = "p" + std::to_string(i);
    rs[i].condition = "bottom_up";
    rs[i].complete = false;
    rs[i].faithful = false;
  }
  auto out = eval::apply_overrides(rs, {{"p1", std::nullopt, std::nullopt, true}});
  CHECK(out[1].faithful == std::optional<bool>(true));
  CHECK(out[1].complete == std::optional<bool>(true));
  CHECK(out[1].overridden);
  CHECK_FALSE(out[0].overridden);
  CHECK_FALSE(out[2].overridden);
  CHECK(eval::to_json(eval::apply_overrides(rs, {})[0]) == eval::to_json(rs[0]));
  CHECK_THROWS_AS(eval::apply_overrides(rs, {{"nope", {}, {}, true}}), eval::OverlayError);
  CHECK_NOTHROW(eval::apply_overrides(rs, {{"nope", {}, {}, true}}, false));
}

TEST_CASE("summaries") {
  SUBCASE("half correct at n = 300") {
    std::vector<eval::EvalRecord> rs(300);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      rs[i].id = std::to_string(i);
      rs[i].condition = "normal";
      rs[i].correct = i % 2 == 0;
      rs[i].prompt_tokens = 100;
      rs[i].completion_tokens = static_cast<std::int64_t>(i);
    }
    auto s = eval::summarize(rs);
    REQUIRE(s.conditions.size() == 1);
    const auto& c = s.conditions[0];
    CHECK(c.accuracy == 0.5);
    CHECK(c.accuracy_interval.p_low == doctest::Approx(0.4146679814017138557).epsilon(1e-12));
    CHECK(c.accuracy_interval.p_high == doctest::Approx(0.5853320185982861443).epsilon(1e-12));
    CHECK(c.avg_prompt_tokens == 100);
    CHECK(c.avg_completion_tokens == 149.5);
    CHECK_FALSE(c.complete_fraction.has_value());

    std::mt19937 rng(3);
    auto shuffled = rs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(eval::to_json(eval::summarize(shuffled)) == eval::to_json(s));
  }
  SUBCASE("faithfulness is a fraction of the correct records") {
    std::vector<eval::EvalRecord> rs(20);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      rs[i].id = std::to_string(i);
      rs[i].condition = "top_down";
      rs[i].correct = i < 10;
      rs[i].complete = true;
      rs[i].faithful = i < 5;
      rs[i].attempts = i == 0 ? 3 : 1;
    }
    const auto c = eval::summarize(rs).conditions.at(0);
    CHECK(c.faithful_fraction == std::optional<double>(0.5));
    CHECK(c.complete_fraction == std::optional<double>(1.0));
    CHECK(c.repairs == 2);
    CHECK(c.repaired == 1);
    CHECK(eval::render_table(eval::summarize(rs)).find("50.0%") != std::string::npos);
  }
  SUBCASE("all correct and faithful") {
    std::vector<eval::EvalRecord> rs(4);
    for (auto& r : rs) {
      r.condition = "magic_set";
      r.correct = true;
      r.complete = r.faithful = true;
    }
    const auto c = eval::summarize(rs).conditions.at(0);
    CHECK(c.accuracy == 1.0);
    CHECK(c.faithful_fraction == std::optional<double>(1.0));
  }
  CHECK_THROWS_AS(eval::summarize({}), std::invalid_argument);
}

TEST_CASE("problem ingestion") {
  logic::GeneratorOptions o;
  o.count = 12;
  o.hops = 2;
  o.seed = 5;
  const auto generated = logic::generate_problems(o);
  std::stringstream file;
  logic::write_problems(file, generated);
  const auto back = eval::ingest_problems(file);
  REQUIRE(back.size() == generated.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(logic::to_json(back[i]) == logic::to_json(generated[i]));
  }

  std::stringstream external(
      R"({"example_id": "x1", "item": {"context": "Every cat is a mammal. Alex is a cat.", "q": "True or false: Alex is a mammal."}, "label": "True"})"
      "\n");
  const auto mapped = eval::ingest_problems(
      external, {{"id", "example_id"}, {"question", "/item/context"}, {"query", "/item/q"}, {"answer", "label"}});
  REQUIRE(mapped.size() == 1);
  CHECK(mapped[0].id == "x1");
  CHECK(mapped[0].answer);
  REQUIRE(mapped[0].kb.has_value());
  CHECK(logic::decide_query(*mapped[0].kb) == logic::Verdict::True);
  CHECK_FALSE(mapped[0].chain.has_value());

  std::stringstream missing(R"({"id": "a", "question": "Alex is a cat.", "query": "True or false: Alex is a cat.", "answer": true})"
                            "\n"
                            R"({"id": "b", "question": "Alex is a cat.", "answer": true})"
                            "\n");
  try {
    eval::ingest_problems(missing);
    FAIL("expected an error");
  } catch (const logic::ProblemFormatError& e) {
    CHECK(std::string(e.what()).find("record 1") != std::string::npos);
  }
  std::stringstream broken("{\"id\": \n");
  CHECK_THROWS_AS(eval::ingest_problems(broken), logic::ProblemFormatError);
  std::stringstream unmapped(R"({"id": "a"})" "\n");
  CHECK_THROWS_WITH_AS(eval::ingest_problems(unmapped, {{"query", "/q"}}), doctest::Contains("record 0"),
                       logic::ProblemFormatError);
}
