#include "nesy/logic/forward_chain.hpp"

#include <algorithm>
#include <deque>
#include <utility>

namespace nesy::logic {

Closure forward_chain(const KnowledgeBase& kb) {
  Closure c;
  c.rules_ = kb.rules();

  // Rules indexed by the (predicate, polarity) of their antecedent.
  std::map<std::pair<Symbol, bool>, std::vector<std::size_t>> by_antecedent;
  for (std::size_t i = 0; i < c.rules_.size(); ++i) {
    const auto& a = c.rules_[i].antecedent;
    by_antecedent[{a.predicate, a.negated}].push_back(i);
  }

  std::deque<std::size_t> agenda;
  auto add = [&](const Literal& lit, Closure::Origin origin) {
    if (c.index_.contains(lit)) return;
    c.index_.emplace(lit, c.order_.size());
    agenda.push_back(c.order_.size());
    c.order_.push_back(lit);
    c.origin_.push_back(std::move(origin));
  };

  for (const auto& f : kb.facts()) add(f, {});

  while (!agenda.empty()) {
    const Literal current = c.order_[agenda.front()];
    agenda.pop_front();
    auto it = by_antecedent.find({current.predicate, current.negated});
    if (it == by_antecedent.end()) continue;
    for (std::size_t r : it->second) {
      add(c.rules_[r].consequent.ground(current.subject.name()), Closure::Origin{r, current});
    }
  }
  return c;
}

bool Closure::has_clash() const {
  return std::any_of(order_.begin(), order_.end(), [&](const Literal& l) { return contains(l.complement()); });
}

std::optional<GoldenChain> Closure::explain(const Literal& goal) const {
  auto it = index_.find(goal);
  if (it == index_.end()) return std::nullopt;

  std::vector<Step> reversed;
  std::size_t at = it->second;
  while (origin_[at].rule) {
    reversed.push_back(RuleStep{rules_[*origin_[at].rule]});
    at = index_.at(*origin_[at].premise);
  }
  reversed.push_back(FactStep{order_[at]});
  return GoldenChain(std::vector<Step>(reversed.rbegin(), reversed.rend()));
}

Verdict decide_query(const Closure& closure, const Literal& query) {
  const bool pos = closure.contains(query);
  const bool neg = closure.contains(query.complement());
  if (pos && neg) return Verdict::Inconsistent;
  if (pos) return Verdict::True;
  if (neg) return Verdict::False;
  return Verdict::Undetermined;
}

Verdict decide_query(const KnowledgeBase& kb) { return decide_query(forward_chain(kb), kb.query()); }

}  // namespace nesy::logic
