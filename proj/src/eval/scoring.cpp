#include "nesy/eval/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace nesy::eval {

namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

bool extract_answer(std::string_view text) {
  bool answer = false;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!word_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && word_char(text[j])) ++j;
    const auto word = text.substr(i, j - i);
    if (iequals(word, "true")) answer = true;
    if (iequals(word, "false")) answer = false;
    i = j;
  }
  return answer;
}

WilsonInterval wilson_interval(double p, double n, double z) {
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("wilson_interval: p must lie in [0, 1]");
  if (!(n >= 1)) throw std::invalid_argument("wilson_interval: n must be at least 1");
  if (!(z > 0) || !std::isfinite(z)) throw std::invalid_argument("wilson_interval: Z must be positive");
  const double z2 = z * z;
  const double denom = n + z2;
  const double centre = (n * p + z2 / 2) / denom;
  const double half = z / denom * std::sqrt(p * (1 - p) * n + z2 / 4);
  WilsonInterval w;
  w.p = p;
  w.n = n;
  w.z = z;
  w.p_low = std::clamp(centre - half, 0.0, p);
  w.p_high = std::clamp(centre + half, p, 1.0);
  return w;
}

bool check_completeness(std::size_t golden_size, const std::vector<std::size_t>& detected) {
  std::vector<bool> seen(golden_size, false);
  for (std::size_t i : detected) {
    if (i < golden_size) seen[i] = true;
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

bool check_faithfulness(const std::vector<std::size_t>& golden, const std::vector<std::size_t>& detected) {
  std::deque<std::size_t> lg(golden.begin(), golden.end());
  std::deque<std::size_t> lm(detected.begin(), detected.end());
  if (lg.empty()) return true;
  while (!lm.empty()) {
    if (lm.front() == lg.front()) {
      lg.pop_front();
      lm.pop_front();
      if (lg.empty()) return true;
    } else {
      lm.pop_front();
    }
  }
  return false;
}

}  // namespace nesy::eval
