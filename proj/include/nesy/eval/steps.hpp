#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nesy/logic/golden_chain.hpp"

namespace nesy::eval {

enum class StepKind { fact, rule, query };

/// One line of the pattern library: `<id> <kind> <template>`.
///
/// kind is fact, rule or query, optionally suffixed `+` or `-` to restrict the
/// pattern to positive or negated steps. The template is ECMAScript regex text
/// matched case-insensitively. Placeholders are replaced by escaped literals
/// for the step being searched:
///
///   {subject}      the individual the chain is about ("Whiskers")
///   {predicate}    the step's predicate, or a rule's consequent ("prime number")
///   {predicates}   its plural
///   {a_predicate}  with an indefinite article, bare for adjectives
///   {antecedent}, {antecedents}, {a_antecedent}   same, for a rule's antecedent
///   {not}          "not " when the step is negated, otherwise empty
///
/// Whitespace runs in the response are collapsed to a single space before
/// matching, so templates can use plain spaces.
struct StepPattern {
  std::string id;
  StepKind kind = StepKind::fact;
  std::optional<bool> negated;  ///< nullopt: applies to either polarity
  std::string pattern;
};

class PatternError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the library text; '#' starts a comment line. Every template is
/// compiled with dummy bindings so a bad one is reported with its line.
std::vector<StepPattern> parse_patterns(std::string_view text);
std::vector<StepPattern> load_patterns(const std::filesystem::path& path);

/// Golden-step indices in order of where the response expresses them.
///
/// All applicable patterns are instantiated for every step and run over the
/// whole response. Matches are taken by start position, then pattern order in
/// the library; a match overlapping an earlier accepted one is dropped.
/// Immediate repeats of the same index are merged, since a conclusion and the
/// rule that produced it usually sit side by side.
std::vector<std::size_t> detect_steps(std::string_view response, const logic::GoldenChain& golden,
                                      const std::vector<StepPattern>& patterns);

}  // namespace nesy::eval
