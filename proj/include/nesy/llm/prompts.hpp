#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nesy::llm {

enum class TemplateName {
  normal,
  cot,
  one_shot_cot,
  bottom_up,
  top_down,
  magic_set,
  small_model_translate,
  small_model_repair,
};

std::string_view to_string(TemplateName t) noexcept;
std::optional<TemplateName> parse_template_name(std::string_view text) noexcept;
/// The six free-text reasoning prompts, in table order.
const std::vector<TemplateName>& reasoning_templates();

struct PromptTemplate {
  TemplateName name;
  std::string_view body;
  std::set<std::string, std::less<>> placeholders;  ///< declared {names}
};

/// Shipped templates, compiled into the binary from data/prompts.
const PromptTemplate& prompt_template(TemplateName name);

/// Placeholder names that occur in `body`.
std::set<std::string, std::less<>> scan_placeholders(std::string_view body);

using Bindings = std::map<std::string, std::string, std::less<>>;

class TemplateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Substitutes every placeholder. Throws TemplateError when a declared
/// placeholder is unbound or a binding names no placeholder.
std::string render(const PromptTemplate& t, const Bindings& bindings);

/// Worked translation examples for the small-model prompts.
const std::vector<std::string>& translation_examples();
/// The {examples} block for 1 or 3 shots. Throws std::invalid_argument for
/// other counts.
std::string examples_block(int shots);

}  // namespace nesy::llm
