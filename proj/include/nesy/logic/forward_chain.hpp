#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "nesy/logic/golden_chain.hpp"
#include "nesy/logic/knowledge_base.hpp"

namespace nesy::logic {

/// Least fixpoint of modus ponens over the ground literals of a knowledge
/// base. Literals are kept in derivation (breadth-first) order together with
/// the rule and premise that produced them, so the shortest derivation of any
/// member can be read back.
class Closure {
 public:
  struct Origin {
    std::optional<std::size_t> rule;  ///< index into kb.rules(); empty for input facts
    std::optional<Literal> premise;
  };

  bool contains(const Literal& lit) const { return index_.contains(lit); }
  std::size_t size() const noexcept { return order_.size(); }
  const std::vector<Literal>& literals() const noexcept { return order_; }
  auto begin() const noexcept { return order_.begin(); }
  auto end() const noexcept { return order_.end(); }

  /// Some literal appears together with its complement.
  bool has_clash() const;

  /// Bottom-up chain (input fact, then rules) deriving `goal`, or nullopt if
  /// goal is not in the closure.
  std::optional<GoldenChain> explain(const Literal& goal) const;

 private:
  friend Closure forward_chain(const KnowledgeBase& kb);
  std::vector<Literal> order_;
  std::vector<Origin> origin_;
  std::map<Literal, std::size_t> index_;
  std::vector<Rule> rules_;
};

Closure forward_chain(const KnowledgeBase& kb);

/// True if the closure holds the query, False if it holds the complement,
/// Inconsistent if both, Undetermined otherwise.
Verdict decide_query(const KnowledgeBase& kb);
Verdict decide_query(const Closure& closure, const Literal& query);

}  // namespace nesy::logic
