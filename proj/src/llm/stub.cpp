#include "nesy/llm/stub.hpp"

#include <charconv>

#include <fmt/format.h>

#include "nesy/logic/forward_chain.hpp"
#include "nesy/logic/surface.hpp"
#include "nesy/sl/program.hpp"

namespace nesy::llm {

using logic::KnowledgeBase;
using logic::Lexicon;

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::string binding(const ChatRequest& r, std::string_view name) {
  auto it = r.bindings.find(name);
  return it == r.bindings.end() ? std::string() : it->second;
}

std::optional<KnowledgeBase> read_kb(std::string_view problem_nl) {
  const Lexicon& lex = Lexicon::standard();
  auto [question, query] = split_problem_text(problem_nl);
  auto kb = logic::read_problem(question, query, lex);
  if (!kb) return std::nullopt;
  std::set<logic::Symbol> bare;
  for (auto p : kb->predicates()) {
    if (lex.is_adjective(logic::predicate_words(p))) bare.insert(p);
  }
  return KnowledgeBase(kb->facts(), kb->rules(), kb->query(), std::move(bare));
}

// The proof of the query or of its complement, if either is derivable.
std::optional<logic::GoldenChain> proof(const KnowledgeBase& kb) {
  const auto closure = logic::forward_chain(kb);
  if (auto c = closure.explain(kb.query())) return c;
  return closure.explain(kb.query().complement());
}

std::string plural_form(logic::Symbol pred, const Lexicon& lex) {
  const auto words = logic::predicate_words(pred);
  if (lex.is_adjective(words)) return std::string(pred.str());
  return std::string(logic::predicate_from_words(lex.plural(words)).str());
}

std::string plural_rule(const logic::Rule& r, const Lexicon& lex) {
  return fmt::format("{} are {}{}.", plural_form(r.antecedent.predicate, lex), r.consequent.negated ? "not " : "",
                     plural_form(r.consequent.predicate, lex));
}

enum class Corruption { none, proof_rule, every_rule };

std::string translation(std::string_view problem_nl, Corruption corruption) {
  const auto kb = read_kb(problem_nl);
  if (!kb) return "";
  const Lexicon& lex = Lexicon::standard();
  const std::string text = sl::render_program(*kb);
  if (corruption == Corruption::none) return text;

  std::optional<std::size_t> target;
  if (corruption == Corruption::proof_rule) {
    if (auto chain = proof(*kb)) {
      for (const auto& step : chain->steps()) {
        if (const auto* r = std::get_if<logic::RuleStep>(&step)) {
          const auto& rules = kb->rules();
          target = static_cast<std::size_t>(std::find(rules.begin(), rules.end(), r->rule) - rules.begin());
        }
      }
    }
    if (!target) return text;
  }
  std::string out;
  std::size_t line = 0, start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    const bool is_rule = line < kb->rules().size();
    if (is_rule && (!target || *target == line)) {
      out += plural_rule(kb->rules()[line], lex);
    } else {
      out += text.substr(start, nl - start);
    }
    out += '\n';
    ++line;
    start = nl + 1;
  }
  return out;
}

std::string reasoning(const ChatRequest& r) {
  const Lexicon& lex = Lexicon::standard();
  auto kb = logic::read_problem(binding(r, "question"), binding(r, "query"), lex);
  if (!kb) return "I cannot determine this.";
  auto chain = proof(*kb);
  if (!chain) return "The statements do not settle the query, so I cannot determine this.";
  std::string out;
  std::optional<logic::Literal> current;
  for (const auto& step : chain->steps()) {
    if (const auto* f = std::get_if<logic::FactStep>(&step)) {
      current = f->literal;
      out += logic::describe_fact(f->literal, lex) + " ";
    } else if (const auto* rs = std::get_if<logic::RuleStep>(&step); rs && current) {
      out += logic::describe_rule(rs->rule, logic::RulePhrasing::every, lex) + " ";
      current = rs->rule.consequent.ground(current->subject.name());
      out += "Therefore " + logic::describe_fact(*current, lex) + " ";
    }
  }
  const bool holds = current && *current == kb->query();
  out += fmt::format("So the answer is {}.", holds ? "True" : "False");
  return out;
}

}  // namespace

std::pair<std::string, std::string> split_problem_text(std::string_view problem_nl) {
  auto end = problem_nl.find_last_not_of(" \t\r\n");
  if (end == std::string_view::npos) return {};
  problem_nl = problem_nl.substr(0, end + 1);
  const auto nl = problem_nl.rfind('\n');
  if (nl == std::string_view::npos) return {"", std::string(problem_nl)};
  return {std::string(problem_nl.substr(0, nl)), std::string(problem_nl.substr(nl + 1))};
}

StubEndpoint::StubEndpoint(Mode mode, double rate, std::uint64_t seed) : mode_(mode), rate_(rate), seed_(seed) {
  if (!(rate >= 0 && rate <= 1)) throw EndpointError(EndpointError::Kind::config, "stub fault rate must lie in [0, 1]");
}

StubEndpoint StubEndpoint::from_spec(std::string_view spec) {
  auto bad = [&] {
    return EndpointError(EndpointError::Kind::config,
                         fmt::format("unknown stub '{}'; expected faithful, faulty:<rate>:<seed>, broken or blank", spec));
  };
  if (spec == "faithful") return StubEndpoint(Mode::faithful);
  if (spec == "broken") return StubEndpoint(Mode::broken);
  if (spec == "blank") return StubEndpoint(Mode::blank);
  if (spec.rfind("faulty:", 0) != 0) throw bad();
  const auto rest = spec.substr(7);
  const auto colon = rest.find(':');
  if (colon == std::string_view::npos) throw bad();
  double rate = 0;
  std::uint64_t seed = 0;
  try {
    std::size_t used = 0;
    const std::string rate_text(rest.substr(0, colon));
    rate = std::stod(rate_text, &used);
    if (used != rate_text.size()) throw bad();
  } catch (const std::logic_error&) {
    throw bad();
  }
  const auto seed_text = rest.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
  if (ec != std::errc() || ptr != seed_text.data() + seed_text.size()) throw bad();
  return StubEndpoint(Mode::faulty, rate, seed);
}

std::string StubEndpoint::describe() const {
  switch (mode_) {
    case Mode::faithful: return "stub:faithful";
    case Mode::faulty: return fmt::format("stub:faulty:{}:{}", rate_, seed_);
    case Mode::broken: return "stub:broken";
    case Mode::blank: return "stub:blank";
  }
  return "stub";
}

bool StubEndpoint::corrupts(std::string_view problem_nl) const {
  if (mode_ != Mode::faulty) return mode_ == Mode::broken;
  const double u = static_cast<double>(splitmix(fnv1a(problem_nl) ^ splitmix(seed_)) >> 11) * 0x1.0p-53;
  return u < rate_;
}

ChatReply StubEndpoint::complete(const ChatRequest& request) {
  std::string text;
  if (mode_ != Mode::blank && request.template_name) {
    switch (*request.template_name) {
      case TemplateName::small_model_translate: {
        const auto nl = binding(request, "problem_nl");
        text = translation(nl, mode_ == Mode::broken ? Corruption::every_rule
                               : corrupts(nl)        ? Corruption::proof_rule
                                                     : Corruption::none);
        break;
      }
      case TemplateName::small_model_repair:
        text = translation(binding(request, "problem_nl"),
                           mode_ == Mode::broken ? Corruption::every_rule : Corruption::none);
        break;
      default:
        text = mode_ == Mode::broken ? "I cannot determine this." : reasoning(request);
    }
  }
  Usage u;
  u.prompt_tokens = request.messages.empty() ? 0 : estimate_tokens(request.messages.back().content);
  u.completion_tokens = estimate_tokens(text);
  u.estimated = true;
  return {std::move(text), u};
}

}  // namespace nesy::llm
