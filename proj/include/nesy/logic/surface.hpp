#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nesy/logic/knowledge_base.hpp"

namespace nesy::logic {

enum class WordClass { noun, adjective };

struct LexiconEntry {
  std::string singular;
  std::string plural;  ///< equal to singular for adjectives
  WordClass word_class = WordClass::noun;
};

/// Category words and proper names used to phrase problems in English, plus
/// the morphology needed to read them back. Words not in the lexicon fall back
/// to regular English inflection and are treated as nouns.
class Lexicon {
 public:
  Lexicon(std::vector<LexiconEntry> entries, std::vector<std::string> names);

  /// Built-in pools: ~40 nouns, ~30 adjectives, ~30 names.
  static const Lexicon& standard();

  const std::vector<LexiconEntry>& entries() const noexcept { return entries_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::vector<std::string> nouns() const;
  std::vector<std::string> adjectives() const;

  std::string plural(std::string_view singular) const;
  std::string singular(std::string_view word) const;
  bool is_adjective(std::string_view singular) const;
  bool knows(std::string_view singular) const;

 private:
  const LexiconEntry* find(std::string_view singular) const;
  std::vector<LexiconEntry> entries_;
  std::vector<std::string> names_;
};

/// "PrimeNumber" -> "prime number".
std::string predicate_words(Symbol predicate);
/// "prime number" -> PrimeNumber.
Symbol predicate_from_words(std::string_view words);
/// Indefinite article for a following word: "an" before a vowel letter.
std::string_view article_for(std::string_view word) noexcept;

enum class RulePhrasing { every, each, plural };

std::string describe_fact(const Literal& fact, const Lexicon& lex);
std::string describe_rule(const Rule& rule, RulePhrasing phrasing, const Lexicon& lex);
/// "True or false: Alex is luminous."
std::string describe_query(const Literal& query, const Lexicon& lex);

using Statement = std::variant<Literal, Rule>;

/// Reads one English sentence in the template language ("Every cat is a
/// mammal.", "Cats are not fast.", "Alex is a cat.", "No dog is a bird.").
std::optional<Statement> read_statement(std::string_view sentence, const Lexicon& lex);
/// Accepts an optional "True or false:" prefix.
std::optional<Literal> read_query(std::string_view sentence, const Lexicon& lex);

std::vector<std::string> split_sentences(std::string_view text);

struct ReadResult {
  std::vector<Literal> facts;
  std::vector<Rule> rules;
  std::vector<std::string> unread;  ///< sentences outside the template language
};

ReadResult read_statements(std::string_view text, const Lexicon& lex);

/// The knowledge base behind an English problem; nullopt if the query cannot
/// be read.
std::optional<KnowledgeBase> read_problem(std::string_view question, std::string_view query, const Lexicon& lex);

}  // namespace nesy::logic
