#pragma once

#include <compare>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nesy/logic/symbol.hpp"

namespace nesy::logic {

class InvalidKnowledgeBase : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Subject position of a literal: a named constant or the universally
/// quantified rule variable.
class Term {
 public:
  static Term variable() noexcept { return Term(); }
  static Term constant(Symbol name) noexcept { return Term(name); }

  bool is_variable() const noexcept { return !name_.has_value(); }
  /// Precondition: !is_variable().
  Symbol name() const { return *name_; }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;

 private:
  Term() = default;
  explicit Term(Symbol name) : name_(name) {}
  std::optional<Symbol> name_;
};

struct Literal {
  Symbol predicate;
  Term subject = Term::variable();
  bool negated = false;

  /// Ground literal; symbols are normalized and interned.
  static Literal fact(std::string_view predicate, std::string_view constant, bool negated = false);
  static Literal fact(Symbol predicate, Symbol constant, bool negated = false);
  /// Literal over the rule variable.
  static Literal pattern(std::string_view predicate, bool negated = false);
  static Literal pattern(Symbol predicate, bool negated = false);

  bool is_ground() const noexcept { return !subject.is_variable(); }
  Literal complement() const { return Literal{predicate, subject, !negated}; }
  /// Instantiate a variable literal at `constant`.
  Literal ground(Symbol constant) const { return Literal{predicate, Term::constant(constant), negated}; }

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

/// Universally quantified implication antecedent(x) -> consequent(x).
struct Rule {
  Literal antecedent;
  Literal consequent;

  static Rule make(std::string_view from, std::string_view to, bool negated_consequent = false,
                   bool negated_antecedent = false);
  static Rule make(Symbol from, Symbol to, bool negated_consequent = false, bool negated_antecedent = false);

  friend bool operator==(const Rule&, const Rule&) = default;
  friend auto operator<=>(const Rule&, const Rule&) = default;
};

/// Facts, rules and exactly one query. Immutable once built; the constructor
/// enforces that facts and the query are ground and rules range over the
/// variable.
class KnowledgeBase {
 public:
  KnowledgeBase(std::vector<Literal> facts, std::vector<Rule> rules, Literal query,
                std::set<Symbol> bare_predicates = {});

  const std::vector<Literal>& facts() const noexcept { return facts_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }
  const Literal& query() const noexcept { return query_; }

  /// Predicates first written without an article ("x is Fast."); a rendering
  /// hint only, not part of the logical content.
  const std::set<Symbol>& bare_predicates() const noexcept { return bare_predicates_; }

  /// Constants in first-appearance order (facts, then query).
  std::vector<Symbol> constants() const;
  /// Predicates in first-appearance order (facts, rules, query).
  std::vector<Symbol> predicates() const;

  KnowledgeBase with_query(Literal query) const;
  KnowledgeBase with_fact(Literal fact) const;

  /// Logical equality: facts, rules and query; rendering hints are ignored.
  friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
    return a.facts_ == b.facts_ && a.rules_ == b.rules_ && a.query_ == b.query_;
  }

 private:
  std::vector<Literal> facts_;
  std::vector<Rule> rules_;
  Literal query_;
  std::set<Symbol> bare_predicates_;
};

enum class Verdict { True, False, Undetermined, Inconsistent };

std::string_view to_string(Verdict v) noexcept;
std::optional<Verdict> parse_verdict(std::string_view text) noexcept;

/// "Sheep(alex)", "~Luminous(rex)", "Cat(x)" -- compact form for logs and tests.
std::string to_string(const Literal& lit);
std::string to_string(const Rule& rule);

}  // namespace nesy::logic
