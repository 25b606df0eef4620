#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace nesy::eval {

/// Last standalone "true" or "false" (any case) in the text; false when
/// neither appears.
bool extract_answer(std::string_view response);

struct WilsonInterval {
  double p_low = 0;
  double p_high = 0;
  double p = 0;
  double n = 0;
  double z = 0;
};

/// Wilson score interval. Throws std::invalid_argument unless 0 <= p <= 1,
/// n >= 1 and z > 0.
WilsonInterval wilson_interval(double p, double n, double z);

/// Every index in [0, golden_size) occurs in detected.
bool check_completeness(std::size_t golden_size, const std::vector<std::size_t>& detected);

/// Whether `golden` occurs in order (not necessarily contiguously) within
/// `detected`. An empty golden list is trivially faithful.
bool check_faithfulness(const std::vector<std::size_t>& golden, const std::vector<std::size_t>& detected);

}  // namespace nesy::eval
