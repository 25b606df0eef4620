#include "nesy/logic/surface.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace nesy::logic {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) {
  c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

const std::map<std::string, std::string, std::less<>>& irregular_plurals() {
  static const std::map<std::string, std::string, std::less<>> table{
      {"sheep", "sheep"}, {"deer", "deer"},   {"fish", "fish"},       {"mouse", "mice"},
      {"goose", "geese"}, {"wolf", "wolves"}, {"person", "people"},   {"child", "children"},
      {"ox", "oxen"},     {"moose", "moose"}, {"octopus", "octopuses"},
  };
  return table;
}

std::string regular_plural(std::string_view w) {
  std::string s(w);
  if (auto it = irregular_plurals().find(w); it != irregular_plurals().end()) return it->second;
  if (s.size() >= 2 && s.back() == 'y' && !is_vowel(s[s.size() - 2])) return s.substr(0, s.size() - 1) + "ies";
  if (ends_with(s, "s") || ends_with(s, "x") || ends_with(s, "z") || ends_with(s, "ch") || ends_with(s, "sh")) {
    return s + "es";
  }
  return s + "s";
}

std::string regular_singular(std::string_view w) {
  std::string s(w);
  for (const auto& [sing, plur] : irregular_plurals()) {
    if (plur == s) return sing;
  }
  if (ends_with(s, "ies") && s.size() > 3) return s.substr(0, s.size() - 3) + "y";
  for (std::string_view suf : {"sses", "xes", "zes", "ches", "shes"}) {
    if (ends_with(s, suf)) return s.substr(0, s.size() - 2);
  }
  for (std::string_view suf : {"ous", "ss", "us", "is"}) {
    if (ends_with(s, suf)) return s;
  }
  if (ends_with(s, "s") && s.size() > 1) return s.substr(0, s.size() - 1);
  return s;
}

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(const std::vector<std::string>& words, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

std::string trim_sentence(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && (std::isspace(static_cast<unsigned char>(s[e - 1])) || s[e - 1] == '.')) --e;
  return std::string(s.substr(b, e - b));
}

// "phrase" of category words; the last word carries the inflection.
std::string phrase(Symbol predicate, bool plural, const Lexicon& lex) {
  std::string words = predicate_words(predicate);
  if (!plural) return words;
  auto space = words.rfind(' ');
  std::string head = space == std::string::npos ? "" : words.substr(0, space + 1);
  std::string last = space == std::string::npos ? words : words.substr(space + 1);
  if (lex.is_adjective(words)) return words;
  return head + lex.plural(last);
}

// "a cat" / "luminous" / "not a cat" / "not luminous"
std::string complement_phrase(const Literal& lit, const Lexicon& lex) {
  std::string words = predicate_words(lit.predicate);
  std::string out = lit.negated ? "not " : "";
  if (!lex.is_adjective(words)) {
    out += article_for(words);
    out += ' ';
  }
  return out + words;
}

struct Category {
  Symbol predicate;
  bool negated = false;
  bool had_article = false;
};

// Parses "[not] [a|an] words..." starting at words[from].
std::optional<Category> read_category(const std::vector<std::string>& w, std::size_t from, bool plural_form,
                                      const Lexicon& lex) {
  Category c;
  std::size_t i = from;
  if (i < w.size() && lower(w[i]) == "not") {
    c.negated = true;
    ++i;
  }
  if (i < w.size() && (lower(w[i]) == "a" || lower(w[i]) == "an")) {
    c.had_article = true;
    ++i;
  }
  if (i >= w.size()) return std::nullopt;
  std::vector<std::string> rest(w.begin() + static_cast<std::ptrdiff_t>(i), w.end());
  for (auto& r : rest) r = lower(r);
  if (plural_form) rest.back() = lex.singular(rest.back());
  c.predicate = predicate_from_words(join(rest, 0, rest.size()));
  return c;
}

std::optional<Symbol> read_subject_category(const std::vector<std::string>& w, std::size_t from, std::size_t to,
                                            bool plural_form, const Lexicon& lex) {
  if (to <= from) return std::nullopt;
  std::vector<std::string> words(w.begin() + static_cast<std::ptrdiff_t>(from),
                                 w.begin() + static_cast<std::ptrdiff_t>(to));
  for (auto& x : words) x = lower(x);
  if (plural_form) words.back() = lex.singular(words.back());
  return predicate_from_words(join(words, 0, words.size()));
}

std::size_t find_word(const std::vector<std::string>& w, std::string_view word, std::size_t from = 0) {
  for (std::size_t i = from; i < w.size(); ++i) {
    if (lower(w[i]) == word) return i;
  }
  return w.size();
}

}  // namespace

Lexicon::Lexicon(std::vector<LexiconEntry> entries, std::vector<std::string> names)
    : entries_(std::move(entries)), names_(std::move(names)) {}

const Lexicon& Lexicon::standard() {
  static const Lexicon lex = [] {
    std::vector<LexiconEntry> e;
    for (std::string_view n :
         {"cat",     "dog",      "sheep",   "cow",      "feline",       "mammal",    "animal",   "vertebrate",
          "snake",   "carnivore", "bird",   "reptile",  "insect",       "spider",    "lepidopteran", "butterfly",
          "moth",    "wolf",     "fox",     "horse",    "rabbit",       "herbivore", "amphibian", "frog",
          "whale",   "shark",    "fish",    "eagle",    "owl",          "bee",       "ant",      "beetle",
          "tiger",   "lion",     "bear",    "deer",     "goat",         "pig",       "duck",     "crab"}) {
      e.push_back({std::string(n), regular_plural(n), WordClass::noun});
    }
    for (std::string_view a :
         {"sunny", "luminous", "aggressive", "fast",   "opaque",      "floral", "feisty", "angry",
          "sweet", "fruity",   "shy",        "bright", "cold",        "happy",  "kind",   "large",
          "small", "red",      "blue",       "wooden", "metallic",    "liquid", "spicy",  "sour",
          "bitter", "loud",    "quiet",      "dull",   "transparent", "nervous"}) {
      e.push_back({std::string(a), std::string(a), WordClass::adjective});
    }
    std::vector<std::string> names{"Alex",  "Rex",   "Sally", "Fae",   "Max",   "Sam",    "Wren",  "Polly",
                                   "Stella", "Sheldon", "Wally", "Fiona", "Gary", "Hana",  "Ivan",  "Jules",
                                   "Kira",  "Leo",   "Mina",  "Nico",  "Otto",  "Pia",    "Quinn", "Rosa",
                                   "Tess",  "Uma",   "Vic",   "Yara",  "Zed",   "Bea"};
    return Lexicon(std::move(e), std::move(names));
  }();
  return lex;
}

std::vector<std::string> Lexicon::nouns() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.word_class == WordClass::noun) out.push_back(e.singular);
  }
  return out;
}

std::vector<std::string> Lexicon::adjectives() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.word_class == WordClass::adjective) out.push_back(e.singular);
  }
  return out;
}

const LexiconEntry* Lexicon::find(std::string_view singular) const {
  for (const auto& e : entries_) {
    if (e.singular == singular) return &e;
  }
  return nullptr;
}

std::string Lexicon::plural(std::string_view singular) const {
  if (const auto* e = find(singular)) return e->plural;
  return regular_plural(singular);
}

std::string Lexicon::singular(std::string_view word) const {
  for (const auto& e : entries_) {
    if (e.plural == word) return e.singular;
  }
  if (find(word)) return std::string(word);
  return regular_singular(word);
}

bool Lexicon::is_adjective(std::string_view singular) const {
  const auto* e = find(singular);
  return e && e->word_class == WordClass::adjective;
}

bool Lexicon::knows(std::string_view singular) const { return find(singular) != nullptr; }

std::string predicate_words(Symbol predicate) {
  std::string out;
  std::string_view s = predicate.str();
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (std::isupper(static_cast<unsigned char>(c))) {
      if (i > 0) out += ' ';
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      out += c;
    }
  }
  return out;
}

Symbol predicate_from_words(std::string_view words) {
  std::string out;
  for (const auto& w : words_of(words)) out += capitalize(w);
  return Symbol::intern(out);
}

std::string_view article_for(std::string_view word) noexcept {
  return (!word.empty() && is_vowel(word[0])) ? "an" : "a";
}

std::string describe_fact(const Literal& fact, const Lexicon& lex) {
  return display_name(fact.subject.name()) + " is " + complement_phrase(fact, lex) + ".";
}

std::string describe_rule(const Rule& rule, RulePhrasing phrasing, const Lexicon& lex) {
  std::string subject;
  if (rule.antecedent.negated) {
    subject = "Everything that is " + complement_phrase(rule.antecedent, lex) + " is ";
    return subject + complement_phrase(rule.consequent, lex) + ".";
  }
  switch (phrasing) {
    case RulePhrasing::every:
      return "Every " + phrase(rule.antecedent.predicate, false, lex) + " is " +
             complement_phrase(rule.consequent, lex) + ".";
    case RulePhrasing::each:
      return "Each " + phrase(rule.antecedent.predicate, false, lex) + " is " +
             complement_phrase(rule.consequent, lex) + ".";
    case RulePhrasing::plural: {
      std::string out = capitalize(phrase(rule.antecedent.predicate, true, lex)) + " are ";
      if (rule.consequent.negated) out += "not ";
      return out + phrase(rule.consequent.predicate, true, lex) + ".";
    }
  }
  return {};
}

std::string describe_query(const Literal& query, const Lexicon& lex) {
  return "True or false: " + describe_fact(query, lex);
}

std::optional<Statement> read_statement(std::string_view sentence, const Lexicon& lex) {
  const auto w = words_of(trim_sentence(sentence));
  if (w.size() < 3) return std::nullopt;
  const std::string first = lower(w[0]);

  if (first == "every" || first == "each" || first == "no") {
    std::size_t is = find_word(w, "is", 1);
    if (is >= w.size()) return std::nullopt;
    auto from = read_subject_category(w, 1, is, false, lex);
    auto to = read_category(w, is + 1, false, lex);
    if (!from || !to) return std::nullopt;
    bool negated = to->negated != (first == "no");
    return Rule::make(*from, to->predicate, negated);
  }

  std::size_t are = find_word(w, "are");
  if (are < w.size()) {
    std::size_t start = first == "all" ? 1 : 0;
    auto from = read_subject_category(w, start, are, true, lex);
    auto to = read_category(w, are + 1, true, lex);
    if (!from || !to) return std::nullopt;
    return Rule::make(*from, to->predicate, to->negated);
  }

  if (lower(w[1]) == "is" && std::isupper(static_cast<unsigned char>(w[0][0]))) {
    auto cat = read_category(w, 2, false, lex);
    if (!cat) return std::nullopt;
    return Literal::fact(cat->predicate, constant_symbol(w[0]), cat->negated);
  }
  return std::nullopt;
}

std::optional<Literal> read_query(std::string_view sentence, const Lexicon& lex) {
  std::string s = trim_sentence(sentence);
  const std::string prefix = "true or false:";
  if (lower(s).rfind(prefix, 0) == 0) s = s.substr(prefix.size());
  auto st = read_statement(s, lex);
  if (!st) return std::nullopt;
  if (const auto* lit = std::get_if<Literal>(&*st)) return *lit;
  return std::nullopt;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == '\n') c = ' ';
    current += c;
    if (c == '.') {
      auto t = trim_sentence(current);
      if (!t.empty()) out.push_back(t + ".");
      current.clear();
    }
  }
  auto t = trim_sentence(current);
  if (!t.empty()) out.push_back(t);
  return out;
}

ReadResult read_statements(std::string_view text, const Lexicon& lex) {
  ReadResult r;
  for (const auto& s : split_sentences(text)) {
    auto st = read_statement(s, lex);
    if (!st) {
      r.unread.push_back(s);
    } else if (auto* lit = std::get_if<Literal>(&*st)) {
      r.facts.push_back(*lit);
    } else {
      r.rules.push_back(std::get<Rule>(*st));
    }
  }
  return r;
}

std::optional<KnowledgeBase> read_problem(std::string_view question, std::string_view query, const Lexicon& lex) {
  auto q = read_query(query, lex);
  if (!q) return std::nullopt;
  auto r = read_statements(question, lex);
  return KnowledgeBase(std::move(r.facts), std::move(r.rules), *q);
}

}  // namespace nesy::logic
