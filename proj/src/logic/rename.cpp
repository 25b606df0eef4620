#include <algorithm>
#include <cctype>
#include <set>

#include "nesy/logic/problem.hpp"

namespace nesy::logic {

namespace {

struct Token {
  std::string text;
  bool word = false;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const bool word = std::isalpha(static_cast<unsigned char>(s[i])) != 0;
    std::size_t j = i;
    while (j < s.size() && (std::isalpha(static_cast<unsigned char>(s[j])) != 0) == word) ++j;
    out.push_back({std::string(s.substr(i, j - i)), word});
    i = j;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(s)) {
    if (t.word) out.push_back(t.text);
  }
  return out;
}

struct Replacement {
  std::vector<std::string> from;  // lower-case words
  std::string to;                 // lower-case phrase
  bool singular_noun_target = false;
  bool adjective_target = false;
  bool is_name = false;
};

// Singular and plural surface forms of a predicate.
std::pair<std::string, std::string> forms(Symbol p, const Lexicon& lex) {
  std::string s = predicate_words(p);
  if (lex.is_adjective(s)) return {s, s};
  auto space = s.rfind(' ');
  std::string head = space == std::string::npos ? "" : s.substr(0, space + 1);
  std::string last = space == std::string::npos ? s : s.substr(space + 1);
  return {s, head + lex.plural(last)};
}

std::string match_case(std::string_view like, std::string to) {
  if (!like.empty() && !to.empty() && std::isupper(static_cast<unsigned char>(like[0]))) {
    to[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(to[0])));
  }
  return to;
}

std::string rewrite(std::string_view text, const std::vector<Replacement>& reps) {
  auto tokens = tokenize(text);
  std::string out;
  // Index into `out` of the last article emitted with a single space after
  // it, so it can be re-chosen or dropped once the next phrase is known.
  std::optional<std::size_t> article_at;
  std::string prev_word;

  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!tokens[i].word) {
      if (tokens[i].text != " ") article_at.reset();
      out += tokens[i].text;
      ++i;
      continue;
    }
    const Replacement* best = nullptr;
    std::size_t best_end = i;
    for (const auto& r : reps) {
      std::size_t k = i;
      std::size_t w = 0;
      for (; w < r.from.size() && k < tokens.size(); ++w) {
        if (!tokens[k].word || lower(tokens[k].text) != r.from[w]) break;
        if (r.is_name && tokens[k].text != match_case("A", r.from[w])) break;
        ++k;
        if (w + 1 < r.from.size()) {
          if (k >= tokens.size() || tokens[k].text != " ") break;
          ++k;
        }
      }
      if (w == r.from.size() && (!best || r.from.size() > best->from.size())) {
        best = &r;
        best_end = k;
      }
    }

    if (!best) {
      const std::string lw = lower(tokens[i].text);
      if (lw == "a" || lw == "an") {
        article_at = out.size();
      } else {
        article_at.reset();
      }
      prev_word = lw;
      out += tokens[i].text;
      ++i;
      continue;
    }

    std::string replacement = best->is_name ? best->to : match_case(tokens[i].text, best->to);
    if (article_at) {
      const std::string old = out.substr(*article_at, out.size() - *article_at - 1);
      out.erase(*article_at);
      if (!best->adjective_target) {
        out += match_case(old, std::string(article_for(best->to))) + " ";
      }
    } else if (best->singular_noun_target && (prev_word == "is" || prev_word == "not")) {
      replacement = std::string(article_for(best->to)) + " " + replacement;
    }
    out += replacement;
    article_at.reset();
    prev_word = lower(best->to);
    i = best_end;
  }
  return out;
}

Symbol map_or_self(const std::map<Symbol, Symbol>& m, Symbol s) {
  auto it = m.find(s);
  return it == m.end() ? s : it->second;
}

Literal rename(const Literal& l, const ConceptMapping& m) {
  Literal out = l;
  out.predicate = map_or_self(m.predicates, l.predicate);
  if (l.is_ground()) out.subject = Term::constant(map_or_self(m.names, l.subject.name()));
  return out;
}

Rule rename(const Rule& r, const ConceptMapping& m) { return Rule{rename(r.antecedent, m), rename(r.consequent, m)}; }

void check_injective(const std::vector<Symbol>& present, const std::map<Symbol, Symbol>& m, RenameMode mode,
                     std::string_view what) {
  std::map<Symbol, Symbol> image;
  for (Symbol s : present) {
    if (mode == RenameMode::strict && !m.contains(s)) {
      throw RenameError("unmapped " + std::string(what) + " " + std::string(s.str()));
    }
    Symbol t = map_or_self(m, s);
    auto [it, fresh] = image.emplace(t, s);
    if (!fresh && it->second != s) {
      throw RenameError("mapping is not injective: " + std::string(it->second.str()) + " and " +
                        std::string(s.str()) + " both become " + std::string(t.str()));
    }
  }
}

}  // namespace

Problem rename_concepts(const Problem& problem, const ConceptMapping& mapping, const Lexicon& lexicon,
                        RenameMode mode) {
  std::vector<Symbol> predicates, names;
  if (problem.kb) {
    predicates = problem.kb->predicates();
    names = problem.kb->constants();
  } else {
    for (const auto& [k, v] : mapping.predicates) predicates.push_back(k);
    for (const auto& [k, v] : mapping.names) names.push_back(k);
  }
  check_injective(predicates, mapping.predicates, mode, "predicate");
  check_injective(names, mapping.names, mode, "name");

  std::vector<Replacement> reps;
  for (Symbol p : predicates) {
    Symbol q = map_or_self(mapping.predicates, p);
    if (p == q) continue;
    auto [ps, pp] = forms(p, lexicon);
    auto [qs, qp] = forms(q, lexicon);
    const bool p_adj = lexicon.is_adjective(ps);
    const bool q_adj = lexicon.is_adjective(qs);
    reps.push_back({split_words(ps), qs, !q_adj, q_adj && !p_adj, false});
    if (pp != ps) reps.push_back({split_words(pp), qp, false, false, false});
  }
  for (Symbol n : names) {
    Symbol m = map_or_self(mapping.names, n);
    if (n == m) continue;
    reps.push_back({split_words(n.str()), display_name(m), false, false, true});
  }

  Problem out = problem;
  if (reps.empty()) return out;
  out.question = rewrite(problem.question, reps);
  out.query = rewrite(problem.query, reps);

  if (problem.kb) {
    std::vector<Literal> facts;
    std::vector<Rule> rules;
    std::set<Symbol> bare;
    for (const auto& f : problem.kb->facts()) facts.push_back(rename(f, mapping));
    for (const auto& r : problem.kb->rules()) rules.push_back(rename(r, mapping));
    for (Symbol b : problem.kb->bare_predicates()) bare.insert(map_or_self(mapping.predicates, b));
    out.kb.emplace(std::move(facts), std::move(rules), rename(problem.kb->query(), mapping), std::move(bare));
  }
  if (problem.chain) {
    std::vector<Step> steps;
    for (const auto& s : problem.chain->steps()) {
      steps.push_back(std::visit(
          [&](const auto& step) -> Step {
            using T = std::decay_t<decltype(step)>;
            if constexpr (std::is_same_v<T, RuleStep>) {
              return RuleStep{rename(step.rule, mapping)};
            } else {
              return T{rename(step.literal, mapping)};
            }
          },
          s));
    }
    out.chain.emplace(std::move(steps));
  }
  return out;
}

}  // namespace nesy::logic
