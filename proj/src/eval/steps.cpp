#include "nesy/eval/steps.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "nesy/logic/surface.hpp"

namespace nesy::eval {

using logic::Lexicon;
using logic::Symbol;

namespace {

std::string escape_regex(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (std::strchr("\\^$.|?*+()[]{}", c) != nullptr) out += '\\';
    out += c;
  }
  return out;
}

using Bindings = std::map<std::string, std::string, std::less<>>;

// Replaces known {name} placeholders; nullopt if one is used but unbound.
std::optional<std::string> instantiate(std::string_view tmpl, const Bindings& b) {
  static const std::set<std::string, std::less<>> known{"subject",    "predicate",   "predicates", "a_predicate",
                                                        "antecedent", "antecedents", "a_antecedent", "not"};
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const auto name = tmpl.substr(i + 1, close - i - 1);
        if (known.contains(name)) {
          auto it = b.find(name);
          if (it == b.end()) return std::nullopt;
          out += escape_regex(it->second);
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

void bind_predicate(Bindings& b, const std::string& prefix, Symbol pred, const Lexicon& lex) {
  const std::string words = logic::predicate_words(pred);
  b[prefix] = words;
  b[prefix + "s"] = lex.plural(words);
  b["a_" + prefix] = lex.is_adjective(words) ? words : std::string(logic::article_for(words)) + " " + words;
}

std::optional<Symbol> chain_subject(const logic::GoldenChain& chain) {
  for (const auto& s : chain.steps()) {
    if (const auto* f = std::get_if<logic::FactStep>(&s); f && f->literal.is_ground()) return f->literal.subject.name();
  }
  for (const auto& s : chain.steps()) {
    if (const auto* q = std::get_if<logic::QueryStep>(&s); q && q->literal.is_ground()) return q->literal.subject.name();
  }
  return std::nullopt;
}

struct StepInfo {
  StepKind kind;
  bool negated;
  Bindings bindings;
};

StepInfo describe(const logic::Step& step, std::optional<Symbol> subject, const Lexicon& lex) {
  StepInfo info{};
  const logic::Literal* lit = nullptr;
  if (const auto* f = std::get_if<logic::FactStep>(&step)) {
    info.kind = StepKind::fact;
    lit = &f->literal;
  } else if (const auto* q = std::get_if<logic::QueryStep>(&step)) {
    info.kind = StepKind::query;
    lit = &q->literal;
  } else {
    const auto& r = std::get<logic::RuleStep>(step).rule;
    info.kind = StepKind::rule;
    lit = &r.consequent;
    bind_predicate(info.bindings, "antecedent", r.antecedent.predicate, lex);
  }
  info.negated = lit->negated;
  bind_predicate(info.bindings, "predicate", lit->predicate, lex);
  info.bindings["not"] = lit->negated ? "not " : "";
  if (lit->is_ground()) {
    info.bindings["subject"] = logic::display_name(lit->subject.name());
  } else if (subject) {
    info.bindings["subject"] = logic::display_name(*subject);
  }
  return info;
}

std::regex compile(const std::string& text) {
  return std::regex(text, std::regex::ECMAScript | std::regex::icase);
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

}  // namespace

std::vector<StepPattern> parse_patterns(std::string_view text) {
  std::vector<StepPattern> out;
  std::set<std::string> ids;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  const Bindings dummy{{"subject", "Alex"},         {"predicate", "cat"},     {"predicates", "cats"},
                       {"a_predicate", "a cat"},    {"antecedent", "dog"},    {"antecedents", "dogs"},
                       {"a_antecedent", "a dog"},   {"not", "not "}};
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string id, kind;
    if (!(fields >> id) || id[0] == '#') continue;
    if (!(fields >> kind)) throw PatternError(fmt::format("pattern line {}: missing kind", lineno));
    std::string rest;
    std::getline(fields, rest);
    const auto start = rest.find_first_not_of(" \t");
    if (start == std::string::npos) throw PatternError(fmt::format("pattern line {}: missing template", lineno));
    rest = rest.substr(start);
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.pop_back();

    StepPattern p;
    p.id = id;
    p.pattern = rest;
    if (kind.size() > 1 && (kind.back() == '+' || kind.back() == '-')) {
      p.negated = kind.back() == '-';
      kind.pop_back();
    }
    if (kind == "fact") {
      p.kind = StepKind::fact;
    } else if (kind == "rule") {
      p.kind = StepKind::rule;
    } else if (kind == "query") {
      p.kind = StepKind::query;
    } else {
      throw PatternError(fmt::format("pattern line {}: unknown kind '{}'", lineno, kind));
    }
    if (!ids.insert(id).second) throw PatternError(fmt::format("pattern line {}: duplicate id '{}'", lineno, id));
    try {
      compile(*instantiate(p.pattern, dummy));
    } catch (const std::regex_error& e) {
      throw PatternError(fmt::format("pattern line {} ({}): {}", lineno, id, e.what()));
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<StepPattern> load_patterns(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PatternError("cannot read pattern file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_patterns(ss.str());
}

std::vector<std::size_t> detect_steps(std::string_view response, const logic::GoldenChain& golden,
                                      const std::vector<StepPattern>& patterns) {
  struct Match {
    std::size_t start, end, pattern, step;
  };
  const Lexicon& lex = Lexicon::standard();
  const std::string text = collapse_whitespace(response);
  const auto subject = chain_subject(golden);

  std::vector<Match> matches;
  for (std::size_t s = 0; s < golden.size(); ++s) {
    const StepInfo info = describe(golden[s], subject, lex);
    for (std::size_t k = 0; k < patterns.size(); ++k) {
      const auto& p = patterns[k];
      if (p.kind != info.kind || (p.negated && *p.negated != info.negated)) continue;
      const auto expanded = instantiate(p.pattern, info.bindings);
      if (!expanded) continue;
      const std::regex re = compile(*expanded);
      for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
        if (it->length(0) == 0) continue;
        const auto pos = static_cast<std::size_t>(it->position(0));
        matches.push_back({pos, pos + static_cast<std::size_t>(it->length(0)), k, s});
      }
    }
  }
  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
    return std::tie(a.start, a.pattern, a.step) < std::tie(b.start, b.pattern, b.step);
  });

  std::vector<std::size_t> out;
  std::size_t consumed = 0;
  for (const auto& m : matches) {
    if (m.start < consumed) continue;
    consumed = m.end;
    if (out.empty() || out.back() != m.step) out.push_back(m.step);
  }
  return out;
}

}  // namespace nesy::eval
