#include <doctest.h>

#include "nesy/logic/forward_chain.hpp"
#include "nesy/logic/problem.hpp"
#include "nesy/smt/solver.hpp"

using namespace nesy;
using logic::KnowledgeBase;
using logic::Literal;
using logic::Rule;
using logic::Verdict;

namespace {

KnowledgeBase whiskers() {
  return KnowledgeBase({Literal::fact("Cat", "whiskers")}, {Rule::make("Cat", "Mammal"), Rule::make("Mammal", "Animal")},
                       Literal::fact("Animal", "whiskers"));
}

smt::SolverResult with(smt::Status s) {
  smt::SolverResult r;
  r.status = s;
  return r;
}

}  // namespace

TEST_CASE("emitted program text") {
  auto p = smt::emit_smtlib(whiskers(), smt::Polarity::assert_negated_query);
  CHECK(p.text ==
        "(set-logic UF)\n"
        "(declare-sort U 0)\n"
        "(declare-const c_whiskers U)\n"
        "(declare-fun Cat (U) Bool)\n"
        "(declare-fun Mammal (U) Bool)\n"
        "(declare-fun Animal (U) Bool)\n"
        "(assert (Cat c_whiskers))\n"
        "(assert (forall ((x U)) (=> (Cat x) (Mammal x))))\n"
        "(assert (forall ((x U)) (=> (Mammal x) (Animal x))))\n"
        "(assert (not (Animal c_whiskers)))\n"
        "(check-sat)\n");
  CHECK(p.text == smt::emit_smtlib(whiskers(), smt::Polarity::assert_negated_query).text);

  KnowledgeBase odd({Literal::fact("U", "a")}, {Rule::make("Bool", "U")}, Literal::fact("X|y", "a"));
  auto q = smt::emit_smtlib(odd, smt::Polarity::assert_query).text;
  CHECK(q.find("(declare-fun |U| (U) Bool)") == std::string::npos);
  CHECK(q.find("(declare-fun p_55 (U) Bool)") != std::string::npos);
  CHECK(q.find("(declare-fun p_426f6f6c (U) Bool)") != std::string::npos);
  CHECK(q.find("(declare-fun p_587c79 (U) Bool)") != std::string::npos);
}

TEST_CASE("adjudication table") {
  using smt::Status;
  CHECK(smt::adjudicate(with(Status::Sat), with(Status::Unsat)).verdict == Verdict::True);
  CHECK(smt::adjudicate(with(Status::Unsat), with(Status::Sat)).verdict == Verdict::False);
  auto ss = smt::adjudicate(with(Status::Sat), with(Status::Sat));
  CHECK(ss.verdict == Verdict::Inconsistent);
  CHECK(ss.reason == smt::Reason::underdetermined);
  auto uu = smt::adjudicate(with(Status::Unsat), with(Status::Unsat));
  CHECK(uu.verdict == Verdict::Inconsistent);
  CHECK(uu.reason == smt::Reason::contradictory_kb);
  CHECK(smt::adjudicate(with(Status::Unknown), with(Status::Unsat)).reason == smt::Reason::solver_unknown);
  CHECK(smt::adjudicate(with(Status::Sat), with(Status::Unknown)).verdict == Verdict::Inconsistent);
}

TEST_CASE("polarity symmetry") {
  using smt::Status;
  for (auto a : {Status::Sat, Status::Unsat, Status::Unknown}) {
    for (auto b : {Status::Sat, Status::Unsat, Status::Unknown}) {
      auto v = smt::adjudicate(with(a), with(b)).verdict;
      auto w = smt::adjudicate(with(b), with(a)).verdict;
      if (v == Verdict::True) CHECK(w == Verdict::False);
      if (v == Verdict::False) CHECK(w == Verdict::True);
      if (v == Verdict::Inconsistent) CHECK(w == Verdict::Inconsistent);
    }
  }
}

TEST_CASE("solver runs") {
  smt::SolverConfig cfg;
  SUBCASE("entailed query") {
    auto neg = smt::check_sat(smt::emit_smtlib(whiskers(), smt::Polarity::assert_negated_query), cfg);
    CHECK(neg.status == smt::Status::Unsat);
    CHECK(neg.raw_output.find("unsat") != std::string::npos);
    CHECK(smt::check_sat(smt::emit_smtlib(whiskers(), smt::Polarity::assert_query), cfg).status == smt::Status::Sat);
    CHECK(smt::decide_with_solver(whiskers(), cfg).adjudication.verdict == Verdict::True);
  }
  SUBCASE("empty theory") {
    KnowledgeBase kb({}, {}, Literal::fact("P", "c"));
    CHECK(smt::check_sat(smt::emit_smtlib(kb, smt::Polarity::assert_negated_query), cfg).status == smt::Status::Sat);
    auto d = smt::decide_with_solver(kb, cfg, nullptr, false);
    CHECK(d.adjudication.verdict == Verdict::Inconsistent);
    CHECK(d.adjudication.reason == smt::Reason::underdetermined);
  }
  SUBCASE("contradictory knowledge base") {
    KnowledgeBase kb({Literal::fact("Cat", "c")}, {Rule::make("Cat", "Luminous"), Rule::make("Cat", "Luminous", true)},
                     Literal::fact("Luminous", "c"));
    auto d = smt::decide_with_solver(kb, cfg);
    CHECK(d.adjudication.verdict == Verdict::Inconsistent);
    CHECK(d.adjudication.reason == smt::Reason::contradictory_kb);
  }
  SUBCASE("malformed input") {
    try {
      smt::check_sat({"(check-sat", smt::Polarity::assert_query}, cfg);
      FAIL("expected an error");
    } catch (const smt::SolverError& e) {
      CHECK(e.kind() == smt::SolverError::Kind::unparseable_output);
    }
  }
  SUBCASE("error text mentioning unknown is not a status") {
    CHECK_THROWS_AS(smt::check_sat({"(assert unknown)\n", smt::Polarity::assert_query}, cfg), smt::SolverError);
  }
  SUBCASE("zero timeout") {
    auto c = cfg;
    c.timeout = std::chrono::milliseconds(0);
    auto r = smt::check_sat(smt::emit_smtlib(whiskers(), smt::Polarity::assert_query), c);
    CHECK(r.status == smt::Status::Unknown);
    CHECK(r.timed_out);
  }
  SUBCASE("missing binary") {
    auto c = cfg;
    c.path = "/nonexistent/solver-binary";
    try {
      smt::check_sat(smt::emit_smtlib(whiskers(), smt::Polarity::assert_query), c);
      FAIL("expected an error");
    } catch (const smt::SolverError& e) {
      CHECK(e.kind() == smt::SolverError::Kind::missing_binary);
    }
  }
  SUBCASE("slow solver is cut off") {
    auto c = cfg;
    c.path = "sh";
    c.args = {"-c", "cat >/dev/null; sleep 5; echo sat"};
    c.timeout = std::chrono::milliseconds(200);
    auto r = smt::check_sat(smt::emit_smtlib(whiskers(), smt::Polarity::assert_query), c);
    CHECK(r.timed_out);
    CHECK(r.status == smt::Status::Unknown);
    CHECK(r.wall_time < std::chrono::seconds(2));
  }
}

TEST_CASE("solver agrees with forward chaining on generated problems") {
  smt::SolverConfig cfg;
  smt::SolverGate gate(2);
  logic::GeneratorOptions o;
  o.count = 10;
  o.seed = 99;
  for (int hops = 1; hops <= 3; ++hops) {
    o.hops = hops;
    for (const auto& p : logic::generate_problems(o)) {
      auto d = smt::decide_with_solver(*p.kb, cfg, &gate);
      CHECK(d.adjudication.verdict == logic::decide_query(*p.kb));
    }
  }
}
