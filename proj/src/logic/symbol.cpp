#include "nesy/logic/symbol.hpp"

#include <cctype>
#include <mutex>
#include <shared_mutex>
#include <unordered_set>

namespace nesy::logic {

namespace {

struct InternPool {
  std::shared_mutex mutex;
  // Node-based: element addresses survive rehashing.
  std::unordered_set<std::string> strings;
};

InternPool& pool() {
  static InternPool instance;
  return instance;
}

const std::string* intern_text(std::string_view text) {
  auto& p = pool();
  {
    std::shared_lock lock(p.mutex);
    if (auto it = p.strings.find(std::string(text)); it != p.strings.end()) return &*it;
  }
  std::unique_lock lock(p.mutex);
  return &*p.strings.emplace(text).first;
}

}  // namespace

Symbol::Symbol() : text_(intern_text("")) {}

Symbol Symbol::intern(std::string_view text) { return Symbol(intern_text(text)); }

std::string normalize_predicate(std::string_view text) {
  std::string out(text);
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

std::string normalize_constant(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Symbol predicate_symbol(std::string_view text) { return Symbol::intern(normalize_predicate(text)); }

Symbol constant_symbol(std::string_view text) { return Symbol::intern(normalize_constant(text)); }

bool is_identifier(std::string_view text) noexcept {
  if (text.empty()) return false;
  for (unsigned char c : text) {
    if (c < 0x80 && (std::isspace(c) || std::iscntrl(c))) return false;
  }
  return true;
}

std::string display_name(Symbol constant) {
  std::string out(constant.str());
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

}  // namespace nesy::logic
