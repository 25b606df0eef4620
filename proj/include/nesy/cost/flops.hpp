#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "nesy/cost/rational.hpp"

namespace nesy::cost {

struct MoeConfig {
  std::int64_t n_active_experts = 1;  ///< routed plus shared experts run per token
  std::int64_t d_ff_expert = 0;
};

struct ModelArch {
  std::string name;
  std::int64_t d_model = 0;
  std::int64_t d_ff = 0;
  std::int64_t d_attn = 0;
  std::int64_t n_heads = 0;
  std::int64_t n_layer = 0;
  std::int64_t g = 1;  ///< query heads per key/value head
  std::int64_t n_vocab = 0;
  std::int64_t n_A = 6;  ///< FLOPs per activation: 6 SwiGLU, 10 GeGLU
  std::int64_t n_max = 0;
  std::optional<MoeConfig> moe;
  std::optional<double> n_active_params;
  nlohmann::json source;  ///< provenance, carried through untouched
};

class ArchError : public std::invalid_argument {
 public:
  ArchError(std::string field, const std::string& what) : std::invalid_argument(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Throws ArchError naming the first offending field.
void validate(const ModelArch& arch);

ModelArch arch_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelArch& arch);
ModelArch load_arch(const std::filesystem::path& path);

/// N = d*V + L*d*(2 + (2 + 2/g)*d + 3*d_ff) + d. Not defined for MoE
/// architectures (throws ArchError on "moe"); supply n_active_params instead.
Rational param_count(const ModelArch& arch);

/// Parameters used by the 2Nn approximation: n_active_params if set,
/// otherwise param_count.
long double active_params(const ModelArch& arch);

template <class T>
struct Components {
  T embedding{};
  T attention{};     ///< all layers
  T feed_forward{};  ///< all layers
  T output{};
  T total() const { return embedding + attention + feed_forward + output; }
};

/// First token with an n_ctx-token prompt (no cache).
Components<Rational> first_token(const ModelArch& arch, std::int64_t n_ctx);
/// The *_avg forms take fractional averaged token counts (e.g. 87.5).
Components<long double> first_token_avg(const ModelArch& arch, long double n_ctx);

/// C_i = C_i0 + i * C_ic for the i-th generated token (KV cache in place).
struct PerToken {
  Rational c_i0;
  Rational c_ic;
};
PerToken per_token(const ModelArch& arch, std::int64_t n_ctx);

struct PerTokenApprox {
  long double c_i0;
  long double c_ic;
};
PerTokenApprox per_token_avg(const ModelArch& arch, long double n_ctx);

/// Precondition i >= 2, otherwise std::invalid_argument.
Rational ith_token(const ModelArch& arch, std::int64_t n_ctx, std::int64_t i);

/// C_total = C1 + (n_out - 1) C_i0 + ((n_out + 2)(n_out - 1) / 2) C_ic.
Rational total(const ModelArch& arch, std::int64_t n_ctx, std::int64_t n_out);
long double total_avg(const ModelArch& arch, long double n_ctx, long double n_out);

/// 2 N (n_ctx + n_out).
long double approx(long double n_active_params, long double n_ctx, long double n_out);

/// 100 |approx - theoretical| / theoretical; theoretical must be positive.
long double discrepancy(long double theoretical, long double approx);

struct TokenCount {
  long double n_ctx = 1;
  long double n_out = 1;
};

struct CostBreakdown {
  Components<long double> first;
  long double c_i0 = 0;
  long double c_ic = 0;
  long double c1 = 0;
  long double c_total = 0;
  long double approx_2nn = 0;
  long double discrepancy_percent = 0;
  bool exact = false;  ///< integer token counts, evaluated in exact arithmetic
};

/// Exact when both counts are whole numbers, long double otherwise.
CostBreakdown breakdown(const ModelArch& arch, TokenCount tokens);

nlohmann::json to_json(const CostBreakdown& b);

}  // namespace nesy::cost
