#include "nesy/llm/prompts.hpp"

#include <array>

#include <fmt/format.h>

namespace nesy::llm {

namespace detail {
extern const std::map<std::string_view, std::string_view> prompt_assets;
}

namespace {

constexpr std::array<std::pair<TemplateName, std::string_view>, 8> kNames{{
    {TemplateName::normal, "normal"},
    {TemplateName::cot, "cot"},
    {TemplateName::one_shot_cot, "one_shot_cot"},
    {TemplateName::bottom_up, "bottom_up"},
    {TemplateName::top_down, "top_down"},
    {TemplateName::magic_set, "magic_set"},
    {TemplateName::small_model_translate, "small_model_translate"},
    {TemplateName::small_model_repair, "small_model_repair"},
}};

std::set<std::string, std::less<>> declared(TemplateName t) {
  switch (t) {
    case TemplateName::small_model_translate: return {"examples", "problem_nl"};
    case TemplateName::small_model_repair: return {"examples", "problem_nl", "previous_translation"};
    default: return {"question", "query"};
  }
}

std::string_view asset(std::string_view name) {
  auto it = detail::prompt_assets.find(name);
  if (it == detail::prompt_assets.end()) throw std::logic_error(fmt::format("prompt asset '{}' is missing", name));
  return it->second;
}

bool placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

}  // namespace

std::string_view to_string(TemplateName t) noexcept {
  for (const auto& [k, v] : kNames) {
    if (k == t) return v;
  }
  return "?";
}

std::optional<TemplateName> parse_template_name(std::string_view text) noexcept {
  for (const auto& [k, v] : kNames) {
    if (v == text) return k;
  }
  return std::nullopt;
}

const std::vector<TemplateName>& reasoning_templates() {
  static const std::vector<TemplateName> v{TemplateName::normal,    TemplateName::cot,      TemplateName::one_shot_cot,
                                           TemplateName::bottom_up, TemplateName::top_down, TemplateName::magic_set};
  return v;
}

const PromptTemplate& prompt_template(TemplateName name) {
  static const auto all = [] {
    std::map<TemplateName, PromptTemplate> m;
    for (const auto& [k, v] : kNames) m.emplace(k, PromptTemplate{k, asset(v), declared(k)});
    return m;
  }();
  return all.at(name);
}

std::set<std::string, std::less<>> scan_placeholders(std::string_view body) {
  std::set<std::string, std::less<>> out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < body.size() && placeholder_char(body[j])) ++j;
    if (j < body.size() && body[j] == '}' && j > i + 1) out.emplace(body.substr(i + 1, j - i - 1));
  }
  return out;
}

std::string render(const PromptTemplate& t, const Bindings& bindings) {
  for (const auto& name : t.placeholders) {
    if (!bindings.contains(name)) {
      throw TemplateError(fmt::format("template '{}': placeholder {{{}}} is unbound", to_string(t.name), name));
    }
  }
  for (const auto& [name, value] : bindings) {
    if (!t.placeholders.contains(name)) {
      throw TemplateError(fmt::format("template '{}' has no placeholder {{{}}}", to_string(t.name), name));
    }
  }
  std::string out;
  const std::string_view body = t.body;
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      std::size_t j = i + 1;
      while (j < body.size() && placeholder_char(body[j])) ++j;
      if (j < body.size() && body[j] == '}') {
        auto it = bindings.find(body.substr(i + 1, j - i - 1));
        if (it != bindings.end()) {
          out += it->second;
          i = j + 1;
          continue;
        }
      }
    }
    out += body[i++];
  }
  return out;
}

const std::vector<std::string>& translation_examples() {
  static const auto examples = [] {
    std::vector<std::string> out;
    const std::string_view text = asset("translation_examples");
    std::size_t start = 0;
    while (start <= text.size()) {
      auto sep = text.find("\n---\n", start);
      if (sep == std::string_view::npos) sep = text.size();
      out.emplace_back(text.substr(start, sep - start));
      start = sep + 5;
    }
    return out;
  }();
  return examples;
}

std::string examples_block(int shots) {
  if (shots != 1 && shots != 3) throw std::invalid_argument(fmt::format("shots must be 1 or 3, got {}", shots));
  const auto& ex = translation_examples();
  std::string out;
  for (int i = 0; i < shots; ++i) {
    if (i > 0) out += "\n\n";
    out += ex.at(static_cast<std::size_t>(i));
  }
  return out;
}

}  // namespace nesy::llm
