#include "nesy/logic/knowledge_base.hpp"

#include <algorithm>
#include <unordered_set>

namespace nesy::logic {

namespace {

Symbol checked_predicate(Symbol predicate) {
  if (!is_identifier(predicate.str())) {
    throw InvalidKnowledgeBase("predicate must be a nonempty token without whitespace: '" +
                               std::string(predicate.str()) + "'");
  }
  return predicate;
}

Symbol checked_constant(Symbol constant) {
  if (!is_identifier(constant.str())) {
    throw InvalidKnowledgeBase("constant must be a nonempty token without whitespace: '" +
                               std::string(constant.str()) + "'");
  }
  return constant;
}

}  // namespace

Literal Literal::fact(std::string_view predicate, std::string_view constant, bool negated) {
  return fact(predicate_symbol(predicate), constant_symbol(constant), negated);
}

Literal Literal::fact(Symbol predicate, Symbol constant, bool negated) {
  return Literal{checked_predicate(predicate), Term::constant(checked_constant(constant)), negated};
}

Literal Literal::pattern(std::string_view predicate, bool negated) {
  return pattern(predicate_symbol(predicate), negated);
}

Literal Literal::pattern(Symbol predicate, bool negated) {
  return Literal{checked_predicate(predicate), Term::variable(), negated};
}

Rule Rule::make(std::string_view from, std::string_view to, bool negated_consequent, bool negated_antecedent) {
  return make(predicate_symbol(from), predicate_symbol(to), negated_consequent, negated_antecedent);
}

Rule Rule::make(Symbol from, Symbol to, bool negated_consequent, bool negated_antecedent) {
  return Rule{Literal::pattern(from, negated_antecedent), Literal::pattern(to, negated_consequent)};
}

KnowledgeBase::KnowledgeBase(std::vector<Literal> facts, std::vector<Rule> rules, Literal query,
                             std::set<Symbol> bare_predicates)
    : facts_(std::move(facts)),
      rules_(std::move(rules)),
      query_(std::move(query)),
      bare_predicates_(std::move(bare_predicates)) {
  for (const auto& f : facts_) {
    checked_predicate(f.predicate);
    if (!f.is_ground()) throw InvalidKnowledgeBase("fact " + to_string(f) + " has no named subject");
    checked_constant(f.subject.name());
  }
  for (const auto& r : rules_) {
    checked_predicate(r.antecedent.predicate);
    checked_predicate(r.consequent.predicate);
    if (r.antecedent.is_ground() || r.consequent.is_ground()) {
      throw InvalidKnowledgeBase("rule " + to_string(r) + " must range over the variable");
    }
  }
  checked_predicate(query_.predicate);
  if (!query_.is_ground()) throw InvalidKnowledgeBase("query " + to_string(query_) + " has no named subject");
  checked_constant(query_.subject.name());
}

std::vector<Symbol> KnowledgeBase::constants() const {
  std::vector<Symbol> out;
  std::unordered_set<Symbol> seen;
  auto add = [&](Symbol s) {
    if (seen.insert(s).second) out.push_back(s);
  };
  for (const auto& f : facts_) add(f.subject.name());
  add(query_.subject.name());
  return out;
}

std::vector<Symbol> KnowledgeBase::predicates() const {
  std::vector<Symbol> out;
  std::unordered_set<Symbol> seen;
  auto add = [&](Symbol s) {
    if (seen.insert(s).second) out.push_back(s);
  };
  for (const auto& f : facts_) add(f.predicate);
  for (const auto& r : rules_) {
    add(r.antecedent.predicate);
    add(r.consequent.predicate);
  }
  add(query_.predicate);
  return out;
}

KnowledgeBase KnowledgeBase::with_query(Literal query) const {
  return KnowledgeBase(facts_, rules_, std::move(query), bare_predicates_);
}

KnowledgeBase KnowledgeBase::with_fact(Literal fact) const {
  auto facts = facts_;
  facts.push_back(std::move(fact));
  return KnowledgeBase(std::move(facts), rules_, query_, bare_predicates_);
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::True: return "True";
    case Verdict::False: return "False";
    case Verdict::Undetermined: return "Undetermined";
    case Verdict::Inconsistent: return "Inconsistent";
  }
  return "?";
}

std::optional<Verdict> parse_verdict(std::string_view text) noexcept {
  for (auto v : {Verdict::True, Verdict::False, Verdict::Undetermined, Verdict::Inconsistent}) {
    if (to_string(v) == text) return v;
  }
  return std::nullopt;
}

std::string to_string(const Literal& lit) {
  std::string out = lit.negated ? "~" : "";
  out += lit.predicate.str();
  out += '(';
  out += lit.subject.is_variable() ? std::string_view("x") : lit.subject.name().str();
  out += ')';
  return out;
}

std::string to_string(const Rule& rule) { return to_string(rule.antecedent) + " -> " + to_string(rule.consequent); }

}  // namespace nesy::logic
