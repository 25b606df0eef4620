#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "nesy/logic/knowledge_base.hpp"

namespace nesy::logic {

struct FactStep {
  Literal literal;
  friend bool operator==(const FactStep&, const FactStep&) = default;
};

struct RuleStep {
  Rule rule;
  friend bool operator==(const RuleStep&, const RuleStep&) = default;
};

/// The query literal itself, when an external chain lists it as the last step.
struct QueryStep {
  Literal literal;
  friend bool operator==(const QueryStep&, const QueryStep&) = default;
};

using Step = std::variant<FactStep, RuleStep, QueryStep>;

/// Ordered facts and rules sufficient to answer a query, stored bottom-up:
/// the initiating fact first, then the rules in application order.
class GoldenChain {
 public:
  explicit GoldenChain(std::vector<Step> steps);

  const std::vector<Step>& steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return steps_.size(); }
  const Step& operator[](std::size_t i) const { return steps_[i]; }

  /// Number of rule steps.
  std::size_t hops() const noexcept;

  friend bool operator==(const GoldenChain&, const GoldenChain&) = default;

 private:
  std::vector<Step> steps_;
};

enum class Strategy { bottom_up, top_down, magic_set };

/// Whether the magic-set sequence repeats the pivot (the initiating fact) at
/// the turn from the reverse pass to the forward pass.
enum class PivotPolicy { duplicate, single };

std::string_view to_string(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view text) noexcept;

/// Golden-step indices in the order a strategy visits them. For n steps:
/// bottom_up 0..n-1; top_down n-1..0; magic_set n-1..0 followed by 0..n-1
/// (or 1..n-1 under PivotPolicy::single).
std::vector<std::size_t> strategy_order(std::size_t n, Strategy strategy,
                                        PivotPolicy pivot = PivotPolicy::duplicate);

/// The chain re-ordered per strategy_order. Throws std::invalid_argument on an
/// empty chain.
GoldenChain golden_transform(const GoldenChain& chain, Strategy strategy,
                             PivotPolicy pivot = PivotPolicy::duplicate);

/// Re-derive the chain's conclusion step by step: starts from the first fact
/// step and applies each rule step in order. Returns nullopt if some rule does
/// not fire on the literal derived so far.
std::optional<Literal> replay(const GoldenChain& chain);

}  // namespace nesy::logic
