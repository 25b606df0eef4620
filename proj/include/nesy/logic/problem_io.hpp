#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "nesy/logic/problem.hpp"

namespace nesy::logic {

class ProblemFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const Literal& lit);
nlohmann::json to_json(const Rule& rule);
nlohmann::json to_json(const KnowledgeBase& kb);
nlohmann::json to_json(const Step& step, const Lexicon& lex = Lexicon::standard());

/// {id, question, query, answer, hops, kb, chain}; chain entries carry a
/// `kind` ("fact", "rule" or "query"), an English `text`, and the structured
/// fields.
nlohmann::json to_json(const Problem& p, const Lexicon& lex = Lexicon::standard());

Literal literal_from_json(const nlohmann::json& j, bool ground);
Rule rule_from_json(const nlohmann::json& j);
KnowledgeBase kb_from_json(const nlohmann::json& j);
/// Structured entries are read directly; entries holding only `text` (or a
/// bare string) are read as English statements.
Step step_from_json(const nlohmann::json& j, const Lexicon& lex = Lexicon::standard());

Problem problem_from_json(const nlohmann::json& j, const Lexicon& lex = Lexicon::standard());

void write_problems(std::ostream& out, const std::vector<Problem>& problems);
void write_problems(const std::filesystem::path& path, const std::vector<Problem>& problems);

}  // namespace nesy::logic
