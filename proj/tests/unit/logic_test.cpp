#include <doctest.h>

#include <random>
#include <sstream>

#include "nesy/logic/forward_chain.hpp"
#include "nesy/logic/problem.hpp"
#include "nesy/logic/problem_io.hpp"

using namespace nesy::logic;

namespace {

KnowledgeBase whiskers_kb(std::string_view query = "Animal") {
  return KnowledgeBase({Literal::fact("Cat", "whiskers")}, {Rule::make("Cat", "Mammal"), Rule::make("Mammal", "Animal")},
                       Literal::fact(query, "whiskers"));
}

Problem whiskers_problem() {
  Problem p;
  p.id = "fig1";
  p.question = "All cats are mammals. Every mammal is an animal. Whiskers is a cat.";
  p.query = "True or false: Whiskers is an animal.";
  p.answer = true;
  p.kb = whiskers_kb();
  p.chain = GoldenChain({FactStep{Literal::fact("Cat", "whiskers")}, RuleStep{Rule::make("Cat", "Mammal")},
                         RuleStep{Rule::make("Mammal", "Animal")}});
  p.hops = 2;
  return p;
}

std::vector<std::string> names_of(const GoldenChain& c) {
  std::vector<std::string> out;
  for (const auto& s : c.steps()) {
    if (const auto* r = std::get_if<RuleStep>(&s)) {
      out.push_back(to_string(r->rule));
    } else if (const auto* f = std::get_if<FactStep>(&s)) {
      out.push_back(to_string(f->literal));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("symbols intern by spelling") {
  CHECK(predicate_symbol("luminous") == predicate_symbol("Luminous"));
  CHECK(constant_symbol("Alex") == constant_symbol("alex"));
  CHECK(predicate_symbol("Cat") != predicate_symbol("Cow"));
  CHECK(predicate_symbol("Cat") < predicate_symbol("Cow"));
  CHECK(display_name(constant_symbol("whiskers")) == "Whiskers");
  CHECK_FALSE(is_identifier("two words"));
  CHECK_THROWS_AS(Literal::fact("Two words", "alex"), InvalidKnowledgeBase);
}

TEST_CASE("forward chaining closure") {
  SUBCASE("two-step chain") {
    auto c = forward_chain(whiskers_kb());
    CHECK(c.size() == 3);
    CHECK(c.contains(Literal::fact("Mammal", "whiskers")));
    CHECK(c.contains(Literal::fact("Animal", "whiskers")));
  }
  SUBCASE("no rules") {
    KnowledgeBase kb({Literal::fact("Cat", "whiskers")}, {}, Literal::fact("Cat", "whiskers"));
    auto c = forward_chain(kb);
    CHECK(c.size() == 1);
  }
  SUBCASE("three hops to an adjective") {
    KnowledgeBase kb({Literal::fact("Sheep", "alex")},
                     {Rule::make("Sheep", "Feline"), Rule::make("Feline", "Snake"), Rule::make("Snake", "Luminous")},
                     Literal::fact("Luminous", "alex"));
    CHECK(forward_chain(kb).contains(Literal::fact("Luminous", "alex")));
    CHECK(decide_query(kb) == Verdict::True);
  }
  SUBCASE("explain yields the shortest bottom-up derivation") {
    auto chain = forward_chain(whiskers_kb()).explain(Literal::fact("Animal", "whiskers"));
    REQUIRE(chain);
    CHECK(names_of(*chain) == std::vector<std::string>{"Cat(whiskers)", "Cat(x) -> Mammal(x)", "Mammal(x) -> Animal(x)"});
    CHECK(replay(*chain) == Literal::fact("Animal", "whiskers"));
  }
}

TEST_CASE("decide_query verdicts") {
  CHECK(decide_query(whiskers_kb()) == Verdict::True);
  KnowledgeBase neg({Literal::fact("Dog", "rex")}, {Rule::make("Dog", "Luminous", true)},
                    Literal::fact("Luminous", "rex"));
  CHECK(decide_query(neg) == Verdict::False);
  KnowledgeBase open({Literal::fact("Cat", "whiskers")}, {}, Literal::fact("Luminous", "whiskers"));
  CHECK(decide_query(open) == Verdict::Undetermined);
  KnowledgeBase clash({Literal::fact("Cat", "c")}, {Rule::make("Cat", "Luminous"), Rule::make("Cat", "Luminous", true)},
                      Literal::fact("Luminous", "c"));
  CHECK(decide_query(clash) == Verdict::Inconsistent);
  CHECK(forward_chain(clash).has_clash());
}

TEST_CASE("closure is monotone and a fixpoint") {
  auto kb = whiskers_kb();
  auto base = forward_chain(kb);
  auto bigger = forward_chain(kb.with_fact(Literal::fact("Dog", "rex")));
  for (const auto& l : base) CHECK(bigger.contains(l));

  auto augmented = kb;
  for (const auto& l : base) augmented = augmented.with_fact(l);
  CHECK(forward_chain(augmented).size() == base.size());
}

TEST_CASE("golden transforms") {
  GoldenChain chain({FactStep{Literal::fact("Cat", "whiskers")}, RuleStep{Rule::make("Cat", "Mammal")},
                     RuleStep{Rule::make("Mammal", "Animal")}});
  const auto f = chain[0];
  const auto r1 = chain[1];
  const auto r2 = chain[2];
  CHECK(golden_transform(chain, Strategy::bottom_up) == chain);
  CHECK(golden_transform(chain, Strategy::top_down).steps() == std::vector<Step>{r2, r1, f});
  CHECK(golden_transform(chain, Strategy::magic_set).steps() == std::vector<Step>{r2, r1, f, f, r1, r2});
  CHECK(golden_transform(chain, Strategy::magic_set, PivotPolicy::single).steps() ==
        std::vector<Step>{r2, r1, f, r1, r2});
  CHECK(golden_transform(golden_transform(chain, Strategy::top_down), Strategy::top_down) == chain);
  CHECK_THROWS_AS(GoldenChain({}), std::invalid_argument);
  CHECK(parse_strategy("magic_set") == Strategy::magic_set);
  CHECK_FALSE(parse_strategy("sideways"));
}

TEST_CASE("english surface forms") {
  const auto& lex = Lexicon::standard();
  CHECK(describe_rule(Rule::make("Cat", "Mammal"), RulePhrasing::every, lex) == "Every cat is a mammal.");
  CHECK(describe_rule(Rule::make("Sheep", "Luminous", true), RulePhrasing::plural, lex) == "Sheep are not luminous.");
  CHECK(describe_rule(Rule::make("Mammal", "Animal"), RulePhrasing::each, lex) == "Each mammal is an animal.");
  CHECK(describe_query(Literal::fact("Luminous", "alex"), lex) == "True or false: Alex is luminous.");

  auto st = read_statement("Wolves are carnivores.", lex);
  REQUIRE(st);
  CHECK(std::get<Rule>(*st) == Rule::make("Wolf", "Carnivore"));
  st = read_statement("No dog is a bird.", lex);
  REQUIRE(st);
  CHECK(std::get<Rule>(*st) == Rule::make("Dog", "Bird", true));
  st = read_statement("Rex is not a cow.", lex);
  REQUIRE(st);
  CHECK(std::get<Literal>(*st) == Literal::fact("Cow", "rex", true));
  CHECK(read_query("True or false: Alex is luminous.", lex) == Literal::fact("Luminous", "alex"));

  auto kb = read_problem(whiskers_problem().question, whiskers_problem().query, lex);
  REQUIRE(kb);
  CHECK(decide_query(*kb) == Verdict::True);
}

TEST_CASE("generator contracts") {
  GeneratorOptions o;
  o.count = 1;
  o.hops = 1;
  o.distractors = 0;
  o.seed = 7;
  auto one = generate_problems(o);
  REQUIRE(one.size() == 1);
  CHECK(one[0].kb->rules().size() == 1);
  CHECK(one[0].kb->facts().size() == 1);
  CHECK(decide_query(*one[0].kb) != Verdict::Undetermined);

  o.count = 100;
  o.hops = 3;
  o.distractors = 2;
  o.seed = 11;
  auto many = generate_problems(o);
  CHECK(many.size() == 100);
  int trues = 0;
  for (const auto& p : many) {
    CHECK(p.chain->hops() == 3);
    CHECK(p.chain->size() == 4);
    const auto v = decide_query(*p.kb);
    CHECK(v == (p.answer ? Verdict::True : Verdict::False));
    auto reread = read_problem(p.question, p.query, Lexicon::standard());
    REQUIRE(reread);
    CHECK(decide_query(*reread) == v);
    trues += p.answer;
  }
  CHECK(trues == 50);

  std::ostringstream a, b;
  write_problems(a, many);
  write_problems(b, generate_problems(o));
  CHECK(a.str() == b.str());

  o.distractors = 200;
  CHECK_THROWS_AS(generate_problems(o), LexiconExhausted);
}

TEST_CASE("problem JSON round trip") {
  GeneratorOptions o;
  o.count = 20;
  o.hops = 2;
  o.seed = 3;
  for (const auto& p : generate_problems(o)) {
    auto back = problem_from_json(to_json(p));
    CHECK(back.id == p.id);
    CHECK(back.question == p.question);
    CHECK(back.answer == p.answer);
    CHECK(*back.kb == *p.kb);
    CHECK(*back.chain == *p.chain);
  }
  auto j = to_json(whiskers_problem());
  j.erase("kb");
  j["chain"] = {"Whiskers is a cat.", "Cats are mammals.", "Every mammal is an animal."};
  auto p = problem_from_json(j);
  CHECK(*p.kb == whiskers_kb());
  CHECK(*p.chain == *whiskers_problem().chain);
}

TEST_CASE("concept renaming") {
  const auto p = whiskers_problem();
  SUBCASE("animal becomes angel") {
    ConceptMapping m;
    m.predicates[predicate_symbol("Animal")] = predicate_symbol("Angel");
    auto r = rename_concepts(p, m);
    CHECK(r.query == "True or false: Whiskers is an angel.");
    CHECK(r.question == "All cats are mammals. Every mammal is an angel. Whiskers is a cat.");
    CHECK(decide_query(*r.kb) == decide_query(*p.kb));
    CHECK(replay(*r.chain) == Literal::fact("Angel", "whiskers"));
  }
  SUBCASE("articles and plurals follow the new word") {
    ConceptMapping m;
    m.predicates[predicate_symbol("Cat")] = predicate_symbol("Owl");
    m.predicates[predicate_symbol("Mammal")] = predicate_symbol("Wolf");
    m.names[constant_symbol("whiskers")] = constant_symbol("rex");
    auto r = rename_concepts(p, m);
    CHECK(r.question == "All owls are wolves. Every wolf is an animal. Rex is an owl.");
    CHECK(r.query == "True or false: Rex is an animal.");
  }
  SUBCASE("swap is applied simultaneously") {
    ConceptMapping m;
    m.predicates[predicate_symbol("Cat")] = predicate_symbol("Mammal");
    m.predicates[predicate_symbol("Mammal")] = predicate_symbol("Cat");
    auto r = rename_concepts(p, m);
    CHECK(r.question == "All mammals are cats. Every cat is an animal. Whiskers is a mammal.");
    CHECK(decide_query(*r.kb) == Verdict::True);
  }
  SUBCASE("identity mapping is byte-identical") {
    auto r = rename_concepts(p, ConceptMapping{});
    CHECK(to_json(r).dump() == to_json(p).dump());
  }
  SUBCASE("non-injective mapping") {
    ConceptMapping m;
    m.predicates[predicate_symbol("Cat")] = predicate_symbol("Bird");
    m.predicates[predicate_symbol("Mammal")] = predicate_symbol("Bird");
    CHECK_THROWS_AS(rename_concepts(p, m), RenameError);
    ConceptMapping collide;
    collide.predicates[predicate_symbol("Cat")] = predicate_symbol("Animal");
    CHECK_THROWS_AS(rename_concepts(p, collide), RenameError);
  }
  SUBCASE("strict mode rejects unmapped symbols") {
    ConceptMapping m;
    m.predicates[predicate_symbol("Animal")] = predicate_symbol("Angel");
    CHECK_THROWS_AS(rename_concepts(p, m, Lexicon::standard(), RenameMode::strict), RenameError);
  }
  SUBCASE("verdicts survive random injective renamings") {
    GeneratorOptions o;
    o.count = 30;
    o.hops = 3;
    o.seed = 5;
    std::mt19937 rng(9);
    const auto pool = Lexicon::standard().nouns();
    for (const auto& g : generate_problems(o)) {
      auto targets = pool;
      std::shuffle(targets.begin(), targets.end(), rng);
      ConceptMapping m;
      std::size_t k = 0;
      for (Symbol s : g.kb->predicates()) m.predicates[s] = predicate_from_words(targets[k++]);
      auto r = rename_concepts(g, m);
      CHECK(decide_query(*r.kb) == decide_query(*g.kb));
      auto reread = read_problem(r.question, r.query, Lexicon::standard());
      REQUIRE(reread);
      CHECK(decide_query(*reread) == decide_query(*g.kb));
    }
  }
}
