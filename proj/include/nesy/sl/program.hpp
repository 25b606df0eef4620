#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nesy/logic/knowledge_base.hpp"

namespace nesy::sl {

/// Byte range on one line: line is 1-based, columns are 0-based and
/// half-open.
struct SourceSpan {
  int line = 1;
  int col_start = 0;
  int col_end = 0;
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class Severity { error, warning };

/// Stable diagnostic codes.
///
/// Errors:   MISSING_QUERY, MULTIPLE_QUERIES, UNTERMINATED_QUERY,
///           PLURAL_RULE_FORM, ILLEGAL_PRONOUN, MULTIWORD_PREDICATE,
///           MISSING_PERIOD, UNRECOGNIZED_STATEMENT
/// Warnings: BARE_PREDICATE, NEGATED_ANTECEDENT, ADJECTIVE_NOMINALIZATION,
///           CODE_FENCE, QUERY_MISSING_PERIOD
struct ParseDiagnostic {
  SourceSpan span;
  Severity severity = Severity::error;
  std::string code;
  std::string message;
};

struct ParseResult {
  std::optional<logic::KnowledgeBase> kb;  ///< empty only when no query could be read
  std::vector<ParseDiagnostic> diagnostics;

  std::size_t error_count() const;
};

/// Reads the standardized logic format:
///   For all x, if x is [not] [a|an] C1, then x is [not] [a|an] C2.
///   Name is [not] [a|an] C.
///   ??? Name is [a|an] C. ???
/// Lines that match no form are reported and skipped. A statement missing
/// only its final period is kept, with an error. Never throws.
ParseResult parse_program(std::string_view text);

/// Canonical text: rules, then facts, then the query, one per line.
/// Predicates listed in kb.bare_predicates() are written without article.
std::string render_program(const logic::KnowledgeBase& kb);

struct Validation {
  bool ok = false;
  std::vector<ParseDiagnostic> diagnostics;
};

Validation validate_translation(std::string_view text);

std::string_view to_string(Severity s) noexcept;
nlohmann::json to_json(const ParseDiagnostic& d);
nlohmann::json to_json(const std::vector<ParseDiagnostic>& ds);

}  // namespace nesy::sl
