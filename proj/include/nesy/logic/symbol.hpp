#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace nesy::logic {

/// Interned identifier for predicates and constants.
///
/// Symbols are compared by identity of the interned storage, so equality is a
/// pointer comparison. Ordering is lexicographic on the underlying text, which
/// keeps every container keyed by Symbol deterministic across runs.
class Symbol {
 public:
  Symbol();

  static Symbol intern(std::string_view text);

  std::string_view str() const noexcept { return *text_; }
  bool empty() const noexcept { return text_->empty(); }

  friend bool operator==(const Symbol& a, const Symbol& b) noexcept { return a.text_ == b.text_; }
  friend std::strong_ordering operator<=>(const Symbol& a, const Symbol& b) noexcept {
    if (a.text_ == b.text_) return std::strong_ordering::equal;
    return a.text_->compare(*b.text_) <=> 0;
  }

  std::size_t hash() const noexcept { return std::hash<const void*>{}(text_); }

 private:
  explicit Symbol(const std::string* text) : text_(text) {}
  const std::string* text_;
};

/// Predicate spelling used for interning: first ASCII letter upper-cased.
std::string normalize_predicate(std::string_view text);

/// Constant spelling used for interning: ASCII lower-cased.
std::string normalize_constant(std::string_view text);

Symbol predicate_symbol(std::string_view text);
Symbol constant_symbol(std::string_view text);

/// True for a nonempty token with no whitespace or control characters.
bool is_identifier(std::string_view text) noexcept;

/// "Alex" for the interned constant "alex".
std::string display_name(Symbol constant);

}  // namespace nesy::logic

template <>
struct std::hash<nesy::logic::Symbol> {
  std::size_t operator()(const nesy::logic::Symbol& s) const noexcept { return s.hash(); }
};
