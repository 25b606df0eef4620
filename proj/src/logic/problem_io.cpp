#include "nesy/logic/problem_io.hpp"

#include <cctype>
#include <fstream>

#include <fmt/format.h>

#include "nesy/logic/forward_chain.hpp"

namespace nesy::logic {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw ProblemFormatError(fmt::format("missing field '{}'", name));
  return *it;
}

bool flag(const json& j, const char* name) { return j.contains(name) && j.at(name).get<bool>(); }

}  // namespace

json to_json(const Literal& lit) {
  json j{{"predicate", lit.predicate.str()}, {"negated", lit.negated}};
  if (lit.is_ground()) j["subject"] = lit.subject.name().str();
  return j;
}

json to_json(const Rule& rule) {
  json j{{"antecedent", rule.antecedent.predicate.str()},
         {"consequent", rule.consequent.predicate.str()},
         {"negated", rule.consequent.negated}};
  if (rule.antecedent.negated) j["antecedent_negated"] = true;
  return j;
}

json to_json(const KnowledgeBase& kb) {
  json j{{"facts", json::array()}, {"rules", json::array()}, {"query", to_json(kb.query())}};
  for (const auto& f : kb.facts()) j["facts"].push_back(to_json(f));
  for (const auto& r : kb.rules()) j["rules"].push_back(to_json(r));
  if (!kb.bare_predicates().empty()) {
    j["bare_predicates"] = json::array();
    for (Symbol s : kb.bare_predicates()) j["bare_predicates"].push_back(s.str());
  }
  return j;
}

json to_json(const Step& step, const Lexicon& lex) {
  return std::visit(
      [&](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, RuleStep>) {
          json j = to_json(s.rule);
          j["kind"] = "rule";
          j["text"] = describe_rule(s.rule, RulePhrasing::every, lex);
          return j;
        } else {
          json j = to_json(s.literal);
          j["kind"] = std::is_same_v<T, FactStep> ? "fact" : "query";
          j["text"] = describe_fact(s.literal, lex);
          return j;
        }
      },
      step);
}

json to_json(const Problem& p, const Lexicon& lex) {
  json j{{"id", p.id}, {"question", p.question}, {"query", p.query}, {"answer", p.answer}, {"hops", p.hops}};
  if (p.kb) j["kb"] = to_json(*p.kb);
  if (p.chain) {
    j["chain"] = json::array();
    for (const auto& s : p.chain->steps()) j["chain"].push_back(to_json(s, lex));
  }
  return j;
}

Literal literal_from_json(const json& j, bool ground) {
  const auto pred = field(j, "predicate").get<std::string>();
  if (ground) return Literal::fact(pred, field(j, "subject").get<std::string>(), flag(j, "negated"));
  return Literal::pattern(pred, flag(j, "negated"));
}

Rule rule_from_json(const json& j) {
  return Rule::make(field(j, "antecedent").get<std::string>(), field(j, "consequent").get<std::string>(),
                    flag(j, "negated"), flag(j, "antecedent_negated"));
}

KnowledgeBase kb_from_json(const json& j) {
  std::vector<Literal> facts;
  std::vector<Rule> rules;
  std::set<Symbol> bare;
  for (const auto& f : field(j, "facts")) facts.push_back(literal_from_json(f, true));
  for (const auto& r : field(j, "rules")) rules.push_back(rule_from_json(r));
  if (j.contains("bare_predicates")) {
    for (const auto& b : j.at("bare_predicates")) bare.insert(predicate_symbol(b.get<std::string>()));
  }
  return KnowledgeBase(std::move(facts), std::move(rules), literal_from_json(field(j, "query"), true),
                       std::move(bare));
}

Step step_from_json(const json& j, const Lexicon& lex) {
  const bool structured = j.is_object() && (j.contains("predicate") || j.contains("antecedent"));
  if (structured) {
    const std::string kind = j.contains("kind") ? j.at("kind").get<std::string>()
                                                : (j.contains("antecedent") ? "rule" : "fact");
    if (kind == "rule") return RuleStep{rule_from_json(j)};
    if (kind == "fact") return FactStep{literal_from_json(j, true)};
    if (kind == "query") return QueryStep{literal_from_json(j, true)};
    throw ProblemFormatError("unknown chain step kind '" + kind + "'");
  }
  const std::string text = j.is_string() ? j.get<std::string>() : field(j, "text").get<std::string>();
  auto st = read_statement(text, lex);
  if (!st) throw ProblemFormatError("chain step is not a readable statement: " + text);
  if (const auto* r = std::get_if<Rule>(&*st)) return RuleStep{*r};
  const auto& lit = std::get<Literal>(*st);
  if (j.is_object() && j.contains("kind") && j.at("kind") == "query") return QueryStep{lit};
  return FactStep{lit};
}

Problem problem_from_json(const json& j, const Lexicon& lex) {
  Problem p;
  p.id = field(j, "id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
  p.question = field(j, "question").get<std::string>();
  p.query = field(j, "query").get<std::string>();
  const auto& a = field(j, "answer");
  if (a.is_boolean()) {
    p.answer = a.get<bool>();
  } else {
    std::string t = a.get<std::string>();
    for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t != "true" && t != "false") throw ProblemFormatError("answer must be true or false, got " + a.dump());
    p.answer = t == "true";
  }
  p.hops = j.value("hops", 0);
  if (j.contains("kb")) {
    p.kb = kb_from_json(j.at("kb"));
  } else {
    p.kb = read_problem(p.question, p.query, lex);
  }
  if (j.contains("chain") && j.at("chain").is_array() && !j.at("chain").empty()) {
    std::vector<Step> steps;
    for (const auto& s : j.at("chain")) steps.push_back(step_from_json(s, lex));
    p.chain.emplace(std::move(steps));
    if (p.hops == 0) p.hops = static_cast<int>(p.chain->hops());
  }
  return p;
}

void write_problems(std::ostream& out, const std::vector<Problem>& problems) {
  for (const auto& p : problems) out << to_json(p).dump() << '\n';
}

void write_problems(const std::filesystem::path& path, const std::vector<Problem>& problems) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_problems(out, problems);
}

}  // namespace nesy::logic
