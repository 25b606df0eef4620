#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nesy/logic/golden_chain.hpp"
#include "nesy/logic/knowledge_base.hpp"
#include "nesy/logic/surface.hpp"

namespace nesy::logic {

/// One deductive true/false question.
struct Problem {
  std::string id;
  std::string question;  ///< the statements, in English
  std::string query;     ///< "True or false: ..."
  bool answer = false;
  std::optional<KnowledgeBase> kb;
  std::optional<GoldenChain> chain;  ///< absent for external records without one
  int hops = 0;

  /// question and query as the text a model is shown.
  std::string natural_language() const { return question + "\n" + query; }
};

class LexiconExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratorOptions {
  std::size_t count = 1;
  int hops = 1;                 ///< 1..3
  std::size_t distractors = 2;  ///< extra statements not on the proof path
  std::uint64_t seed = 0;
  const Lexicon* lexicon = nullptr;  ///< Lexicon::standard() when null
  std::string id_prefix;             ///< ids are "<prefix>h<hops>-<index>"
};

/// Synthetic problems in the template language. Deterministic for a fixed
/// seed; answers are balanced (count/2 rounded either way); every problem's
/// forward-chaining verdict equals its answer. The golden chain is the
/// initiating fact followed by exactly `hops` rules.
std::vector<Problem> generate_problems(const GeneratorOptions& options);

class RenameError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ConceptMapping {
  std::map<Symbol, Symbol> predicates;
  std::map<Symbol, Symbol> names;  ///< keyed by interned (lower-case) constants
};

enum class RenameMode { lenient, strict };

/// Replaces concept and proper names consistently across the English text,
/// the knowledge base and the golden chain. Articles before renamed nouns are
/// re-chosen ("a cat" -> "an angel"). Throws RenameError if the mapping is not
/// injective over the symbols present, or (strict) a present symbol is
/// unmapped.
Problem rename_concepts(const Problem& problem, const ConceptMapping& mapping,
                        const Lexicon& lexicon = Lexicon::standard(), RenameMode mode = RenameMode::lenient);

}  // namespace nesy::logic
