#include <httplib.h>

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "nesy/eval/scoring.hpp"
#include "nesy/llm/pipeline.hpp"
#include "nesy/llm/stub.hpp"
#include "nesy/logic/forward_chain.hpp"
#include "nesy/logic/surface.hpp"

using namespace nesy;
using llm::TemplateName;
using nlohmann::json;

namespace {

const std::string kSampleQuestion =
    "Each sheep is sunny. Each sheep is a feline. Sheep are mammals. Felines are aggressive. Every feline is a snake. "
    "Felines are carnivores. Each snake is luminous. Snakes are cats. Every dog is not luminous. Each snake is an "
    "animal. Animals are fast. Carnivores are opaque. Each mammal is floral. Each vertebrate is not feisty. Each "
    "vertebrate is a cow. Alex is a sheep. Alex is a vertebrate.";
const std::string kSampleQuery = "True or false: Alex is luminous.";

llm::EndpointConfig quick_config() {
  llm::EndpointConfig c;
  c.model = "test-model";
  c.backoff = std::chrono::milliseconds(1);
  c.max_retries = 2;
  return c;
}

std::vector<logic::Problem> problems(std::size_t count, int hops, std::uint64_t seed) {
  logic::GeneratorOptions o;
  o.count = count;
  o.hops = hops;
  o.seed = seed;
  return logic::generate_problems(o);
}

// Loopback chat-completions server scripted by a handler.
struct FakeServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  explicit FakeServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server.Post("/v1/chat/completions", std::move(handler));
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeServer() {
    server.stop();
    thread.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

std::string reply_json(const std::string& text, bool with_usage = true) {
  json j{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}};
  if (with_usage) j["usage"] = {{"prompt_tokens", 11}, {"completion_tokens", 7}};
  return j.dump();
}

}  // namespace

TEST_CASE("prompt templates") {
  const std::set<std::string, std::less<>> qa{"question", "query"};
  for (auto t : llm::reasoning_templates()) {
    const auto& p = llm::prompt_template(t);
    CHECK(llm::scan_placeholders(p.body) == qa);
    CHECK(p.placeholders == qa);
  }
  const auto& tr = llm::prompt_template(TemplateName::small_model_translate);
  CHECK(llm::scan_placeholders(tr.body) == tr.placeholders);
  const auto& rp = llm::prompt_template(TemplateName::small_model_repair);
  CHECK(llm::scan_placeholders(rp.body) == rp.placeholders);
  CHECK(rp.placeholders.contains("previous_translation"));
  CHECK(llm::prompt_template(TemplateName::normal).body == "{question} {query}");
  CHECK(tr.body.find("Simplified Logic Format:") != std::string_view::npos);
  CHECK(tr.body.find("\"Cows are Angry.\"") != std::string_view::npos);

  CHECK(llm::render(llm::prompt_template(TemplateName::normal), {{"question", "Q."}, {"query", "A?"}}) == "Q. A?");
  CHECK_THROWS_AS(llm::render(llm::prompt_template(TemplateName::normal), {{"question", "Q."}}), llm::TemplateError);
  CHECK_THROWS_AS(llm::render(llm::prompt_template(TemplateName::normal),
                              {{"question", "Q."}, {"query", "A?"}, {"extra", ""}}),
                  llm::TemplateError);
  for (auto t : {TemplateName::normal, TemplateName::magic_set, TemplateName::small_model_repair}) {
    CHECK(llm::parse_template_name(llm::to_string(t)) == t);
  }
}

TEST_CASE("translation examples") {
  const auto& ex = llm::translation_examples();
  REQUIRE(ex.size() == 3);
  for (const auto& e : ex) {
    const auto at = e.find("Simplified Logic Format:\n");
    REQUIRE(at != std::string::npos);
    auto parsed = sl::parse_program(e.substr(at + 25));
    CHECK(parsed.error_count() == 0);
    CHECK(parsed.kb.has_value());
  }
  const auto one = llm::render(llm::prompt_template(TemplateName::small_model_translate),
                               {{"examples", llm::examples_block(1)}, {"problem_nl", "P"}});
  const auto three = llm::render(llm::prompt_template(TemplateName::small_model_translate),
                                 {{"examples", llm::examples_block(3)}, {"problem_nl", "P"}});
  const auto block1 = llm::examples_block(1), block3 = llm::examples_block(3);
  CHECK(three.substr(0, three.find(block3)) == one.substr(0, one.find(block1)));
  CHECK(three.substr(three.find(block3) + block3.size()) == one.substr(one.find(block1) + block1.size()));
  CHECK_THROWS_AS(llm::examples_block(2), std::invalid_argument);
}

TEST_CASE("stub endpoint") {
  const auto cfg = quick_config();
  const std::string nl = kSampleQuestion + "\n" + kSampleQuery;
  SUBCASE("faithful translation of the sample problem") {
    llm::StubEndpoint stub(llm::StubEndpoint::Mode::faithful);
    auto ex = llm::translate(nl, 3, stub, cfg);
    CHECK_FALSE(ex.error);
    CHECK(ex.usage.estimated);
    CHECK(ex.usage.prompt_tokens > 0);
    CHECK(ex.response.find("??? Alex is Luminous. ???") != std::string::npos);
    CHECK(ex.response.find("For all x, if x is a Sheep, then x is Sunny.") != std::string::npos);
    auto parsed = sl::parse_program(ex.response);
    CHECK(parsed.error_count() == 0);
    REQUIRE(parsed.kb);
    auto expected = logic::read_problem(kSampleQuestion, kSampleQuery, logic::Lexicon::standard());
    CHECK(*parsed.kb == *expected);
    CHECK(logic::decide_query(*parsed.kb) == logic::Verdict::True);
  }
  SUBCASE("faulty translation writes a plural rule, repair fixes it") {
    llm::StubEndpoint stub(llm::StubEndpoint::Mode::faulty, 1.0, 4);
    auto ex = llm::translate(nl, 3, stub, cfg);
    CHECK(ex.response.find("Snakes are Luminous.") != std::string::npos);
    auto parsed = sl::parse_program(ex.response);
    CHECK(std::any_of(parsed.diagnostics.begin(), parsed.diagnostics.end(),
                      [](const auto& d) { return d.code == "PLURAL_RULE_FORM"; }));
    auto fixed = llm::repair(nl, ex.response, 3, stub, cfg);
    CHECK(sl::parse_program(fixed.response).error_count() == 0);
    CHECK(fixed.request.messages[0].content.find("Snakes are Luminous.") != std::string::npos);
  }
  SUBCASE("fault selection is seeded and roughly at rate") {
    auto a = llm::StubEndpoint::from_spec("faulty:0.2:7");
    auto b = llm::StubEndpoint::from_spec("faulty:0.2:7");
    int hits = 0;
    for (const auto& p : problems(500, 2, 1)) {
      CHECK(a.corrupts(p.natural_language()) == b.corrupts(p.natural_language()));
      hits += a.corrupts(p.natural_language());
    }
    CHECK(hits > 60);
    CHECK(hits < 140);
    CHECK_THROWS_AS(llm::StubEndpoint::from_spec("faulty:x:1"), llm::EndpointError);
    CHECK_THROWS_AS(llm::StubEndpoint::from_spec("faulty:1.5:1"), llm::EndpointError);
    CHECK_THROWS_AS(llm::StubEndpoint::from_spec("chatty"), llm::EndpointError);
  }
  SUBCASE("blank replies are flagged") {
    llm::StubEndpoint stub(llm::StubEndpoint::Mode::blank);
    auto ex = llm::translate(nl, 1, stub, cfg);
    CHECK(ex.blank);
    CHECK_FALSE(ex.error);
    CHECK(ex.response.empty());
  }
  SUBCASE("reasoning replies follow the proof") {
    llm::StubEndpoint stub(llm::StubEndpoint::Mode::faithful);
    for (const auto& p : problems(20, 3, 2)) {
      auto ex = llm::chat(stub, cfg, TemplateName::bottom_up, {{"question", p.question}, {"query", p.query}});
      CHECK(eval::extract_answer(ex.response) == p.answer);
    }
  }
}

TEST_CASE("http endpoint") {
  auto cfg = quick_config();
  SUBCASE("request shape and usage") {
    std::string seen_body, seen_auth;
    FakeServer server([&](const httplib::Request& req, httplib::Response& res) {
      seen_body = req.body;
      seen_auth = req.get_header_value("Authorization");
      res.set_content(reply_json("hello"), "application/json");
    });
    cfg.base_url = server.url();
    cfg.api_key_env = "NESY_TEST_API_KEY";
    ::setenv("NESY_TEST_API_KEY", "sk-test", 1);
    llm::HttpEndpoint ep(cfg);
    auto ex = llm::chat(ep, cfg, TemplateName::normal, {{"question", "Q."}, {"query", "A?"}});
    ::unsetenv("NESY_TEST_API_KEY");
    CHECK_FALSE(ex.error);
    CHECK(ex.response == "hello");
    CHECK(ex.usage.prompt_tokens == 11);
    CHECK(ex.usage.completion_tokens == 7);
    CHECK_FALSE(ex.usage.estimated);
    CHECK(seen_auth == "Bearer sk-test");
    auto body = json::parse(seen_body);
    CHECK(body["model"] == "test-model");
    CHECK(body["messages"][0]["content"] == "Q. A?");
    CHECK(body["temperature"] == 0);
  }
  SUBCASE("server errors are retried") {
    std::atomic<int> calls{0};
    FakeServer server([&](const httplib::Request&, httplib::Response& res) {
      if (++calls < 3) {
        res.status = 503;
        return;
      }
      res.set_content(reply_json("ok", false), "application/json");
    });
    cfg.base_url = server.url();
    llm::HttpEndpoint ep(cfg);
    auto ex = llm::chat(ep, cfg, TemplateName::normal, {{"question", "Q."}, {"query", "A?"}});
    CHECK(ex.tries == 3);
    CHECK(ex.response == "ok");
    CHECK(ex.usage.estimated);
  }
  SUBCASE("client errors are not retried") {
    std::atomic<int> calls{0};
    FakeServer server([&](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.status = 400;
    });
    cfg.base_url = server.url();
    llm::HttpEndpoint ep(cfg);
    auto ex = llm::chat(ep, cfg, TemplateName::normal, {{"question", "Q."}, {"query", "A?"}});
    CHECK(calls == 1);
    REQUIRE(ex.error);
    CHECK(ex.error->find("400") != std::string::npos);
  }
  SUBCASE("blank content") {
    FakeServer server([&](const httplib::Request&, httplib::Response& res) {
      res.set_content(reply_json("  \n"), "application/json");
    });
    cfg.base_url = server.url();
    llm::HttpEndpoint ep(cfg);
    auto ex = llm::chat(ep, cfg, TemplateName::normal, {{"question", "Q."}, {"query", "A?"}});
    CHECK(ex.blank);
    CHECK(ex.response == "  \n");
  }
  SUBCASE("unreachable endpoint and missing key") {
    cfg.base_url = "http://127.0.0.1:1/v1";
    cfg.timeout = std::chrono::milliseconds(500);
    llm::HttpEndpoint ep(cfg);
    auto ex = llm::chat(ep, cfg, TemplateName::normal, {{"question", "Q."}, {"query", "A?"}});
    CHECK(ex.tries == 3);
    CHECK(ex.error);

    cfg.api_key_env = "NESY_TEST_UNSET_KEY";
    ::unsetenv("NESY_TEST_UNSET_KEY");
    llm::HttpEndpoint keyed(cfg);
    auto ex2 = llm::chat(keyed, cfg, TemplateName::normal, {{"question", "Q."}, {"query", "A?"}});
    CHECK(ex2.tries == 1);
    REQUIRE(ex2.error);
    CHECK(ex2.error->find("NESY_TEST_UNSET_KEY") != std::string::npos);
  }
  CHECK_THROWS_AS(llm::HttpEndpoint(llm::EndpointConfig{}), llm::EndpointError);
  CHECK_THROWS_AS(llm::chat(*llm::make_endpoint("stub:faithful", cfg), cfg, TemplateName::cot, {{"query", "x"}}),
                  llm::TemplateError);
}

TEST_CASE("solve with repair") {
  const auto cfg = quick_config();
  llm::PipelineOptions opts;
  smt::SolverGate gate(4);
  opts.gate = &gate;
  const auto ps = problems(8, 2, 11);

  SUBCASE("faithful stub settles in one attempt") {
    llm::StubEndpoint stub(llm::StubEndpoint::Mode::faithful);
    for (const auto& p : ps) {
      auto t = llm::solve_with_repair(p, opts, stub, cfg);
      CHECK(t.attempts.size() == 1);
      CHECK(t.final_answer == p.answer);
      CHECK(t.final_verdict == (p.answer ? logic::Verdict::True : logic::Verdict::False));
      CHECK(t.usage.prompt_tokens == t.attempts[0].exchange.usage.prompt_tokens);
    }
  }
  SUBCASE("one faulty translation costs one repair") {
    llm::StubEndpoint stub(llm::StubEndpoint::Mode::faulty, 1.0, 3);
    opts.max_repairs = 2;
    for (const auto& p : ps) {
      auto t = llm::solve_with_repair(p, opts, stub, cfg);
      REQUIRE(t.attempts.size() == 2);
      CHECK(t.attempts[0].verdict == logic::Verdict::Inconsistent);
      CHECK(t.attempts[0].reason == smt::Reason::underdetermined);
      CHECK(t.final_answer == p.answer);
      CHECK(t.usage.completion_tokens ==
            t.attempts[0].exchange.usage.completion_tokens + t.attempts[1].exchange.usage.completion_tokens);
    }
  }
  SUBCASE("broken stub without repair uses the negated run") {
    llm::StubEndpoint stub(llm::StubEndpoint::Mode::broken);
    opts.condition = llm::Condition::no_repair_3shot;
    for (const auto& p : ps) {
      auto t = llm::solve_with_repair(p, opts, stub, cfg);
      REQUIRE(t.attempts.size() == 1);
      REQUIRE(t.attempts[0].neg);
      CHECK(t.attempts[0].neg->status == smt::Status::Sat);
      CHECK(t.attempts[0].reason == smt::Reason::underdetermined);
      CHECK(t.final_verdict == logic::Verdict::False);
      CHECK_FALSE(t.final_answer);
    }
  }
  SUBCASE("repairs are bounded") {
    llm::StubEndpoint stub(llm::StubEndpoint::Mode::broken);
    opts.max_repairs = 2;
    auto t = llm::solve_with_repair(ps[0], opts, stub, cfg);
    CHECK(t.attempts.size() == 3);
    CHECK(t.final_verdict == logic::Verdict::Inconsistent);
    CHECK_FALSE(t.final_answer);

    llm::StubEndpoint blank(llm::StubEndpoint::Mode::blank);
    auto b = llm::solve_with_repair(ps[0], opts, blank, cfg);
    CHECK(b.attempts.size() == 3);
    CHECK(b.attempts[0].error == std::optional<std::string>("blank response"));
    CHECK_FALSE(b.final_answer);
  }
  SUBCASE("solver and endpoint failures are recorded") {
    llm::StubEndpoint stub(llm::StubEndpoint::Mode::faithful);
    opts.solver.path = "/nonexistent/solver";
    auto t = llm::solve_with_repair(ps[0], opts, stub, cfg);
    CHECK(t.solver_failed);
    CHECK(t.attempts.size() == 1);
    CHECK_FALSE(t.final_answer);

    auto c = cfg;
    c.base_url = "http://127.0.0.1:1";
    c.max_retries = 0;
    c.timeout = std::chrono::milliseconds(300);
    llm::HttpEndpoint dead(c);
    auto d = llm::solve_with_repair(ps[0], llm::PipelineOptions{}, dead, c);
    CHECK(d.endpoint_failed);
    CHECK(d.attempts.size() == 1);
    CHECK_FALSE(d.final_answer);
    CHECK(llm::to_json(d)["attempts"][0]["error"].is_string());
  }
  CHECK(llm::parse_condition("repair_1shot") == llm::Condition::repair_1shot);
  CHECK(llm::shots(llm::Condition::repair_1shot) == 1);
  CHECK_FALSE(llm::parse_condition("repair_2shot"));
}
