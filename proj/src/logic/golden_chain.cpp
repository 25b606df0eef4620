#include "nesy/logic/golden_chain.hpp"

#include <algorithm>
#include <stdexcept>

namespace nesy::logic {

GoldenChain::GoldenChain(std::vector<Step> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) throw std::invalid_argument("golden chain must not be empty");
}

std::size_t GoldenChain::hops() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(steps_.begin(), steps_.end(), [](const Step& s) { return std::holds_alternative<RuleStep>(s); }));
}

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::bottom_up: return "bottom_up";
    case Strategy::top_down: return "top_down";
    case Strategy::magic_set: return "magic_set";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view text) noexcept {
  for (auto s : {Strategy::bottom_up, Strategy::top_down, Strategy::magic_set}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::vector<std::size_t> strategy_order(std::size_t n, Strategy strategy, PivotPolicy pivot) {
  std::vector<std::size_t> forward(n);
  for (std::size_t i = 0; i < n; ++i) forward[i] = i;
  std::vector<std::size_t> reverse(forward.rbegin(), forward.rend());

  switch (strategy) {
    case Strategy::bottom_up: return forward;
    case Strategy::top_down: return reverse;
    case Strategy::magic_set: {
      auto out = reverse;
      auto from = forward.begin();
      if (pivot == PivotPolicy::single && from != forward.end()) ++from;
      out.insert(out.end(), from, forward.end());
      return out;
    }
  }
  return forward;
}

GoldenChain golden_transform(const GoldenChain& chain, Strategy strategy, PivotPolicy pivot) {
  std::vector<Step> steps;
  for (std::size_t i : strategy_order(chain.size(), strategy, pivot)) steps.push_back(chain[i]);
  return GoldenChain(std::move(steps));
}

std::optional<Literal> replay(const GoldenChain& chain) {
  std::optional<Literal> current;
  for (const auto& step : chain.steps()) {
    if (const auto* f = std::get_if<FactStep>(&step)) {
      if (!current) {
        current = f->literal;
      } else if (*current != f->literal) {
        return std::nullopt;
      }
    } else if (const auto* r = std::get_if<RuleStep>(&step)) {
      if (!current) return std::nullopt;
      const auto& ante = r->rule.antecedent;
      if (ante.predicate != current->predicate || ante.negated != current->negated) return std::nullopt;
      current = r->rule.consequent.ground(current->subject.name());
    } else if (const auto* q = std::get_if<QueryStep>(&step)) {
      if (!current || (q->literal != *current && q->literal != current->complement())) return std::nullopt;
    }
  }
  return current;
}

}  // namespace nesy::logic
