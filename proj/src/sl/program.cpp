#include "nesy/sl/program.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <fmt/format.h>

#include "nesy/logic/surface.hpp"

namespace nesy::sl {

using logic::KnowledgeBase;
using logic::Literal;
using logic::Rule;
using logic::Symbol;

namespace {

struct Word {
  std::string text;
  std::string lower;
  int col_start = 0;
  int col_end = 0;
};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Splits on whitespace and commas; columns are relative to the line.
std::vector<Word> words_of(std::string_view line, int from, int to) {
  std::vector<Word> out;
  int i = from;
  while (i < to) {
    while (i < to && (is_space(line[static_cast<std::size_t>(i)]) || line[static_cast<std::size_t>(i)] == ',')) ++i;
    int j = i;
    while (j < to && !is_space(line[static_cast<std::size_t>(j)]) && line[static_cast<std::size_t>(j)] != ',') ++j;
    if (j > i) {
      std::string w(line.substr(static_cast<std::size_t>(i), static_cast<std::size_t>(j - i)));
      out.push_back({w, lower(w), i, j});
    }
    i = j;
  }
  return out;
}

bool is_token(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

struct Category {
  Symbol predicate;
  bool negated = false;
  bool article = false;
  SourceSpan span;
};

class Reader {
 public:
  std::vector<ParseDiagnostic> diags;
  std::vector<Literal> facts;
  std::vector<Rule> rules;
  struct Appearance {
    SourceSpan span;
    Symbol predicate;
    bool article;
  };
  std::vector<Appearance> appearances;

  void error(SourceSpan s, std::string code, std::string msg) {
    diags.push_back({s, Severity::error, std::move(code), std::move(msg)});
  }
  void warn(SourceSpan s, std::string code, std::string msg) {
    diags.push_back({s, Severity::warning, std::move(code), std::move(msg)});
  }

  void note_predicate(const Category& c) { appearances.push_back({c.span, c.predicate, c.article}); }

  // "[not] [a|an] Pred" occupying w[from, to).
  std::optional<Category> category(const std::vector<Word>& w, std::size_t from, std::size_t to, int line) {
    Category c;
    std::size_t i = from;
    if (i < to && w[i].lower == "not") {
      c.negated = true;
      ++i;
    }
    if (i < to && (w[i].lower == "a" || w[i].lower == "an")) {
      c.article = true;
      ++i;
    }
    if (i >= to) {
      SourceSpan s{line, from < w.size() ? w[from].col_start : 0, to > 0 ? w[to - 1].col_end : 1};
      error(s, "UNRECOGNIZED_STATEMENT", "expected a predicate");
      return std::nullopt;
    }
    c.span = {line, w[i].col_start, w[to - 1].col_end};
    if (to - i > 1) {
      std::string joined;
      for (std::size_t k = i; k < to; ++k) joined += w[k].text;
      error(c.span, "MULTIWORD_PREDICATE",
            fmt::format("predicate must be a single PascalCase token (e.g. {})", joined));
      return std::nullopt;
    }
    if (!is_token(w[i].text)) {
      error(c.span, "UNRECOGNIZED_STATEMENT", fmt::format("'{}' is not a predicate name", w[i].text));
      return std::nullopt;
    }
    c.predicate = logic::predicate_symbol(w[i].text);
    if (!c.article) {
      warn(c.span, "BARE_PREDICATE", fmt::format("predicate {} written without an article", c.predicate.str()));
    }
    if (ends_with(c.predicate.str(), "Thing")) {
      warn(c.span, "ADJECTIVE_NOMINALIZATION",
           fmt::format("{} looks like an adjective turned into a noun", c.predicate.str()));
    }
    return c;
  }

  std::optional<Literal> fact(const std::vector<Word>& w, int line, SourceSpan whole) {
    for (const auto& x : w) {
      if (x.lower == "are") {
        error(whole, "PLURAL_RULE_FORM", "general rules must use \"For all x, if x is a C1, then x is a C2.\"");
        return std::nullopt;
      }
    }
    if (w.size() < 3 || w[1].lower != "is") {
      error(whole, "UNRECOGNIZED_STATEMENT", "expected a rule, a fact or a query");
      return std::nullopt;
    }
    if (w[0].lower == "it") {
      error({line, w[0].col_start, w[0].col_end}, "ILLEGAL_PRONOUN", "use a proper name, not \"it\"");
      return std::nullopt;
    }
    if (!is_token(w[0].text)) {
      error({line, w[0].col_start, w[0].col_end}, "UNRECOGNIZED_STATEMENT",
            fmt::format("'{}' is not a proper name", w[0].text));
      return std::nullopt;
    }
    auto c = category(w, 2, w.size(), line);
    if (!c) return std::nullopt;
    note_predicate(*c);
    return Literal::fact(c->predicate, logic::constant_symbol(w[0].text), c->negated);
  }

  void rule(const std::vector<Word>& w, int line, SourceSpan whole) {
    for (const auto& x : w) {
      if (x.lower == "it") {
        error({line, x.col_start, x.col_end}, "ILLEGAL_PRONOUN", "use the rule variable \"x\", not \"it\"");
        return;
      }
    }
    auto bad = [&](std::string_view what) {
      error(whole, "UNRECOGNIZED_STATEMENT",
            fmt::format("expected \"For all x, if x is a C1, then x is a C2.\" ({})", what));
    };
    std::size_t i = 0;
    if (w[0].lower == "forall") {
      i = 1;
    } else if (w.size() > 1 && w[0].lower == "for" &&
               (w[1].lower == "all" || w[1].lower == "every" || w[1].lower == "each")) {
      i = 2;
    } else {
      return bad("missing quantifier");
    }
    if (i >= w.size()) return bad("missing variable");
    const std::string var = w[i++].lower;
    if (var.size() != 1 || !std::isalpha(static_cast<unsigned char>(var[0]))) return bad("missing variable");
    if (i + 2 >= w.size() || w[i].lower != "if" || w[i + 1].lower != var || w[i + 2].lower != "is") {
      return bad("missing \"if x is\"");
    }
    i += 3;
    std::size_t then = i;
    while (then < w.size() && w[then].lower != "then") ++then;
    if (then + 2 >= w.size() || w[then + 1].lower != var || w[then + 2].lower != "is") {
      return bad("missing \"then x is\"");
    }
    auto from = category(w, i, then, line);
    if (!from) return;
    auto to = category(w, then + 3, w.size(), line);
    if (!to) return;
    if (from->negated) {
      warn(from->span, "NEGATED_ANTECEDENT", "rule premise is negated");
    }
    note_predicate(*from);
    note_predicate(*to);
    rules.push_back(Rule::make(from->predicate, to->predicate, to->negated, from->negated));
  }

  void statement(std::string_view line_text, int line, int from, int to) {
    auto w = words_of(line_text, from, to);
    if (w.empty()) return;
    SourceSpan whole{line, w.front().col_start, w.back().col_end};
    const bool rule_shaped = w[0].lower == "for" || w[0].lower == "forall" ||
                             std::any_of(w.begin(), w.end(), [](const Word& x) { return x.lower == "if"; });
    if (rule_shaped) {
      rule(w, line, whole);
    } else if (auto f = fact(w, line, whole)) {
      facts.push_back(*f);
    }
  }
};

struct Line {
  std::size_t offset;
  std::string_view text;
};

std::vector<Line> lines_of(std::string_view text) {
  std::vector<Line> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto l = text.substr(start, nl - start);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    out.push_back({start, l});
    start = nl + 1;
  }
  return out;
}

SourceSpan span_at(const std::vector<Line>& lines, std::size_t pos, std::size_t len) {
  for (std::size_t i = lines.size(); i-- > 0;) {
    if (lines[i].offset <= pos) {
      const auto col = static_cast<int>(pos - lines[i].offset);
      const auto end = std::min<std::size_t>(pos - lines[i].offset + std::max<std::size_t>(len, 1),
                                             std::max<std::size_t>(lines[i].text.size(), pos - lines[i].offset + 1));
      return {static_cast<int>(i) + 1, col, static_cast<int>(end)};
    }
  }
  return {1, 0, 1};
}

}  // namespace

std::size_t ParseResult::error_count() const {
  return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(),
                                                [](const ParseDiagnostic& d) { return d.severity == Severity::error; }));
}

ParseResult parse_program(std::string_view text) {
  Reader r;
  const auto lines = lines_of(text);

  // Query blocks first; their bytes are blanked so that the surrounding
  // statements keep their columns.
  std::string masked(text);
  std::vector<std::size_t> marks;
  for (std::size_t p = text.find("???"); p != std::string_view::npos; p = text.find("???", p + 3)) marks.push_back(p);

  struct Block {
    std::size_t open, close;
  };
  std::vector<Block> blocks;
  for (std::size_t k = 0; k + 1 < marks.size(); k += 2) blocks.push_back({marks[k], marks[k + 1]});
  if (marks.size() % 2 == 1) {
    r.error(span_at(lines, marks.back(), 3), "UNTERMINATED_QUERY", "query opened with ??? but never closed");
    std::size_t end = text.find('\n', marks.back());
    blocks.push_back({marks.back(), end == std::string_view::npos ? text.size() : end});
  }

  std::vector<std::pair<Literal, SourceSpan>> queries;
  for (const auto& b : blocks) {
    const std::size_t close_len = b.close < text.size() && text.substr(b.close, 3) == "???" ? 3 : 0;
    for (std::size_t k = b.open; k < b.close + close_len; ++k) {
      if (masked[k] != '\n') masked[k] = ' ';
    }
    std::string body(text.substr(b.open + 3, b.close - b.open - 3));
    for (char& c : body) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    const SourceSpan span = span_at(lines, b.open, b.close + close_len - b.open);
    auto last = body.find_last_not_of(" \t");
    if (last == std::string::npos) {
      r.error(span, "UNRECOGNIZED_STATEMENT", "empty query block");
      continue;
    }
    if (body[last] == '.') {
      body.erase(last);
    } else {
      r.warn(span, "QUERY_MISSING_PERIOD", "query statement has no final period");
    }
    // Words are located within the query body; report at the block's span.
    Reader sub;
    auto w = words_of(body, 0, static_cast<int>(body.size()));
    if (w.empty()) {
      r.error(span, "UNRECOGNIZED_STATEMENT", "empty query block");
      continue;
    }
    auto lit = sub.fact(w, span.line, span);
    for (auto d : sub.diags) {
      d.span = span;
      r.diags.push_back(std::move(d));
    }
    if (lit) {
      queries.emplace_back(*lit, span);
      for (auto a : sub.appearances) {
        a.span = span;
        r.appearances.push_back(a);
      }
    }
  }
  for (std::size_t k = 1; k < queries.size(); ++k) {
    r.error(queries[k].second, "MULTIPLE_QUERIES", "more than one ??? query ???; the last one is used");
  }

  const auto masked_lines = lines_of(masked);
  for (std::size_t li = 0; li < masked_lines.size(); ++li) {
    const std::string_view line = masked_lines[li].text;
    const int ln = static_cast<int>(li) + 1;
    auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    if (line.substr(first, 3) == "```") {
      r.warn({ln, static_cast<int>(first), static_cast<int>(line.size())}, "CODE_FENCE", "code fence ignored");
      continue;
    }
    int start = 0;
    const int n = static_cast<int>(line.size());
    for (int k = 0; k < n; ++k) {
      if (line[static_cast<std::size_t>(k)] == '.') {
        r.statement(line, ln, start, k);
        start = k + 1;
      }
    }
    auto rest = words_of(line, start, n);
    if (!rest.empty()) {
      r.error({ln, rest.front().col_start, rest.back().col_end}, "MISSING_PERIOD", "statement has no final period");
      r.statement(line, ln, start, n);
    }
  }

  // The query was read before the other lines, so first appearances are
  // settled against document order here.
  ParseResult out;
  if (queries.empty()) {
    if (marks.empty()) r.error({1, 0, 1}, "MISSING_QUERY", "no statement enclosed in ??? ... ???");
  } else {
    std::stable_sort(r.appearances.begin(), r.appearances.end(), [](const auto& a, const auto& b) {
      return std::tie(a.span.line, a.span.col_start) < std::tie(b.span.line, b.span.col_start);
    });
    std::set<Symbol> bare;
    std::set<Symbol> seen;
    for (const auto& a : r.appearances) {
      if (seen.insert(a.predicate).second && !a.article) bare.insert(a.predicate);
    }
    try {
      out.kb.emplace(r.facts, r.rules, queries.back().first, std::move(bare));
    } catch (const logic::InvalidKnowledgeBase& e) {
      r.error(queries.back().second, "UNRECOGNIZED_STATEMENT", e.what());
    }
  }
  std::stable_sort(r.diags.begin(), r.diags.end(), [](const ParseDiagnostic& a, const ParseDiagnostic& b) {
    return std::tie(a.span.line, a.span.col_start) < std::tie(b.span.line, b.span.col_start);
  });
  out.diagnostics = std::move(r.diags);
  return out;
}

namespace {

std::string category_text(const Literal& lit, const std::set<Symbol>& bare) {
  std::string out = lit.negated ? "not " : "";
  if (!bare.contains(lit.predicate)) {
    out += logic::article_for(lit.predicate.str());
    out += ' ';
  }
  out += lit.predicate.str();
  return out;
}

}  // namespace

std::string render_program(const KnowledgeBase& kb) {
  const auto& bare = kb.bare_predicates();
  std::string out;
  for (const auto& r : kb.rules()) {
    out += fmt::format("For all x, if x is {}, then x is {}.\n", category_text(r.antecedent, bare),
                       category_text(r.consequent, bare));
  }
  for (const auto& f : kb.facts()) {
    out += fmt::format("{} is {}.\n", logic::display_name(f.subject.name()), category_text(f, bare));
  }
  out += fmt::format("??? {} is {}. ???\n", logic::display_name(kb.query().subject.name()),
                     category_text(kb.query(), bare));
  return out;
}

Validation validate_translation(std::string_view text) {
  auto r = parse_program(text);
  return {r.error_count() == 0, std::move(r.diagnostics)};
}

std::string_view to_string(Severity s) noexcept { return s == Severity::error ? "error" : "warning"; }

nlohmann::json to_json(const ParseDiagnostic& d) {
  return {{"line", d.span.line},        {"col_start", d.span.col_start}, {"col_end", d.span.col_end},
          {"severity", to_string(d.severity)}, {"code", d.code},             {"message", d.message}};
}

nlohmann::json to_json(const std::vector<ParseDiagnostic>& ds) {
  auto j = nlohmann::json::array();
  for (const auto& d : ds) j.push_back(to_json(d));
  return j;
}

}  // namespace nesy::sl
