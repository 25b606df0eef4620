#include "nesy/cost/flops.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace nesy::cost {

using nlohmann::json;

namespace {

template <class T>
T frac(std::int64_t a, std::int64_t b) {
  if constexpr (std::is_same_v<T, Rational>) {
    return Rational(a, b);
  } else {
    return static_cast<T>(a) / static_cast<T>(b);
  }
}

template <class T>
T num(std::int64_t v) {
  return T(v);
}

// Per-layer FFN dimension and multiplicity.
std::pair<std::int64_t, std::int64_t> ffn_shape(const ModelArch& a) {
  if (a.moe) return {a.moe->d_ff_expert, a.moe->n_active_experts};
  return {a.d_ff, 1};
}

template <class T>
Components<T> first_token_impl(const ModelArch& a, T n) {
  validate(a);
  const T d = num<T>(a.d_model), h = num<T>(a.n_heads), L = num<T>(a.n_layer), V = num<T>(a.n_vocab);
  const auto [ff_dim, experts] = ffn_shape(a);
  const T ff = num<T>(ff_dim);
  const T g4 = num<T>(4) + frac<T>(4, a.g);
  const T g8 = num<T>(8) + frac<T>(3, a.g);

  Components<T> c;
  const T attention_layer = g4 * n * d * d + g8 * n * d + num<T>(2) * n * (n + num<T>(1)) * d +
                            frac<T>(11, 2) * h * n * (n + num<T>(1));
  const T ffn_layer = num<T>(experts) * (num<T>(5) * n * d + num<T>(6) * n * d * ff + num<T>(a.n_A + 1) * n * ff);
  c.embedding = num<T>(0);
  c.attention = L * attention_layer;
  c.feed_forward = L * ffn_layer;
  c.output = num<T>(4) * d + num<T>(2) * d * V + num<T>(10) * V;
  return c;
}

template <class T>
std::pair<T, T> per_token_impl(const ModelArch& a, T n) {
  validate(a);
  const T d = num<T>(a.d_model), h = num<T>(a.n_heads), L = num<T>(a.n_layer), V = num<T>(a.n_vocab);
  const auto [ff_dim, experts] = ffn_shape(a);
  const T ff = num<T>(ff_dim);
  // Printed constant part, with the 5d + 6 d d_ff + (n_A + 1) d_ff FFN share
  // split out so that it can be repeated per active expert.
  const T attention = (num<T>(8) + frac<T>(3, a.g)) * d + (num<T>(4) + frac<T>(4, a.g)) * d * d +
                      num<T>(4) * d * n + num<T>(11) * h * n;
  const T ffn = num<T>(experts) * (num<T>(5) * d + num<T>(6) * d * ff + num<T>(a.n_A + 1) * ff);
  const T c_i0 = L * (attention + ffn) + num<T>(4) * d + num<T>(2) * d * V + num<T>(10) * V;
  const T c_ic = (num<T>(4) * d + num<T>(11) * h) * L;
  return {c_i0, c_ic};
}

template <class T>
T total_impl(const ModelArch& a, T n_ctx, T n_out) {
  const T c1 = first_token_impl<T>(a, n_ctx).total();
  const auto [c_i0, c_ic] = per_token_impl<T>(a, n_ctx);
  const T steps = n_out - num<T>(1);
  return c1 + steps * c_i0 + (n_out + num<T>(2)) * steps * frac<T>(1, 2) * c_ic;
}

void require_positive(std::int64_t v, const char* field) {
  if (v <= 0) throw ArchError(field, fmt::format("{} must be positive, got {}", field, v));
}

std::int64_t get_int(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw ArchError(field, fmt::format("arch file is missing field '{}'", field));
  if (!it->is_number_integer()) throw ArchError(field, fmt::format("field '{}' must be an integer", field));
  return it->get<std::int64_t>();
}

}  // namespace

void validate(const ModelArch& a) {
  require_positive(a.d_model, "d_model");
  require_positive(a.d_attn, "d_attn");
  require_positive(a.n_heads, "n_heads");
  if (a.n_layer < 0) throw ArchError("n_layer", "n_layer must not be negative");
  require_positive(a.g, "g");
  require_positive(a.n_vocab, "n_vocab");
  if (a.n_A < 0) throw ArchError("n_A", "n_A must not be negative");
  if (a.moe) {
    require_positive(a.moe->n_active_experts, "moe.n_active_experts");
    require_positive(a.moe->d_ff_expert, "moe.d_ff_expert");
  } else {
    require_positive(a.d_ff, "d_ff");
  }
  if (a.d_model != a.n_heads * a.d_attn) {
    throw ArchError("d_attn", fmt::format("d_model ({}) must equal n_heads ({}) * d_attn ({})", a.d_model, a.n_heads,
                                          a.d_attn));
  }
  if (a.n_heads % a.g != 0) {
    throw ArchError("g", fmt::format("n_heads ({}) must be divisible by g ({})", a.n_heads, a.g));
  }
  if (a.n_active_params && !(*a.n_active_params > 0)) {
    throw ArchError("n_active_params", "n_active_params must be positive");
  }
}

ModelArch arch_from_json(const json& j) {
  ModelArch a;
  a.name = j.value("name", "");
  a.d_model = get_int(j, "d_model");
  a.d_attn = get_int(j, "d_attn");
  a.n_heads = get_int(j, "n_heads");
  a.n_layer = get_int(j, "n_layer");
  a.g = get_int(j, "g");
  a.n_vocab = get_int(j, "n_vocab");
  a.n_A = get_int(j, "n_A");
  a.n_max = j.contains("n_max") ? get_int(j, "n_max") : 0;
  if (j.contains("moe") && !j.at("moe").is_null()) {
    const auto& m = j.at("moe");
    MoeConfig moe;
    try {
      moe.n_active_experts = get_int(m, "n_active_experts");
      moe.d_ff_expert = get_int(m, "d_ff_expert");
    } catch (const ArchError& e) {
      throw ArchError("moe." + e.field(), fmt::format("arch file is missing field 'moe.{}'", e.field()));
    }
    a.moe = moe;
    a.d_ff = j.contains("d_ff") ? get_int(j, "d_ff") : 0;
  } else {
    a.d_ff = get_int(j, "d_ff");
  }
  if (j.contains("n_active_params") && !j.at("n_active_params").is_null()) {
    if (!j.at("n_active_params").is_number()) throw ArchError("n_active_params", "n_active_params must be a number");
    a.n_active_params = j.at("n_active_params").get<double>();
  }
  if (j.contains("source")) a.source = j.at("source");
  validate(a);
  return a;
}

json to_json(const ModelArch& a) {
  json j{{"name", a.name},       {"d_model", a.d_model}, {"d_ff", a.d_ff},       {"d_attn", a.d_attn},
         {"n_heads", a.n_heads}, {"n_layer", a.n_layer}, {"g", a.g},             {"n_vocab", a.n_vocab},
         {"n_A", a.n_A},         {"n_max", a.n_max}};
  if (a.moe) j["moe"] = {{"n_active_experts", a.moe->n_active_experts}, {"d_ff_expert", a.moe->d_ff_expert}};
  if (a.n_active_params) j["n_active_params"] = *a.n_active_params;
  if (!a.source.is_null()) j["source"] = a.source;
  return j;
}

ModelArch load_arch(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArchError("path", "cannot read arch file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ArchError("json", "arch file " + path.string() + " is not valid JSON: " + e.what());
  }
  return arch_from_json(j);
}

Rational param_count(const ModelArch& a) {
  validate(a);
  if (a.moe) throw ArchError("moe", "parameter count is not modelled for MoE architectures; set n_active_params");
  const Rational d(a.d_model);
  const Rational per_layer = Rational(2) + (Rational(2) + Rational(2, a.g)) * d + Rational(3) * Rational(a.d_ff);
  return d * Rational(a.n_vocab) + Rational(a.n_layer) * d * per_layer + d;
}

long double active_params(const ModelArch& a) {
  if (a.n_active_params) return static_cast<long double>(*a.n_active_params);
  return param_count(a).to_long_double();
}

Components<Rational> first_token(const ModelArch& a, std::int64_t n_ctx) {
  if (n_ctx < 1) throw std::invalid_argument("n_ctx must be at least 1");
  return first_token_impl<Rational>(a, Rational(n_ctx));
}

Components<long double> first_token_avg(const ModelArch& a, long double n_ctx) {
  if (!(n_ctx >= 1)) throw std::invalid_argument("n_ctx must be at least 1");
  return first_token_impl<long double>(a, n_ctx);
}

PerToken per_token(const ModelArch& a, std::int64_t n_ctx) {
  if (n_ctx < 1) throw std::invalid_argument("n_ctx must be at least 1");
  auto [c0, cc] = per_token_impl<Rational>(a, Rational(n_ctx));
  return {c0, cc};
}

PerTokenApprox per_token_avg(const ModelArch& a, long double n_ctx) {
  if (!(n_ctx >= 1)) throw std::invalid_argument("n_ctx must be at least 1");
  auto [c0, cc] = per_token_impl<long double>(a, n_ctx);
  return {c0, cc};
}

Rational ith_token(const ModelArch& a, std::int64_t n_ctx, std::int64_t i) {
  if (i < 2) throw std::invalid_argument("token index must be at least 2");
  auto p = per_token(a, n_ctx);
  return p.c_i0 + Rational(i) * p.c_ic;
}

Rational total(const ModelArch& a, std::int64_t n_ctx, std::int64_t n_out) {
  if (n_ctx < 1 || n_out < 1) throw std::invalid_argument("token counts must be at least 1");
  return total_impl<Rational>(a, Rational(n_ctx), Rational(n_out));
}

long double total_avg(const ModelArch& a, long double n_ctx, long double n_out) {
  if (!(n_ctx >= 1) || !(n_out >= 1)) throw std::invalid_argument("token counts must be at least 1");
  return total_impl<long double>(a, n_ctx, n_out);
}

long double approx(long double n_active_params, long double n_ctx, long double n_out) {
  if (!(n_active_params > 0) || !(n_ctx > 0) || !(n_out > 0)) throw std::invalid_argument("inputs must be positive");
  return 2 * n_active_params * (n_ctx + n_out);
}

long double discrepancy(long double theoretical, long double approx) {
  if (!(theoretical > 0)) throw std::invalid_argument("theoretical FLOPs must be positive");
  return 100 * std::fabs(approx - theoretical) / theoretical;
}

CostBreakdown breakdown(const ModelArch& a, TokenCount t) {
  CostBreakdown b;
  const bool whole = t.n_ctx == std::floor(t.n_ctx) && t.n_out == std::floor(t.n_out) && t.n_ctx >= 1 &&
                     t.n_out >= 1 && t.n_ctx < 1e12L && t.n_out < 1e12L;
  if (whole) {
    const auto n_ctx = static_cast<std::int64_t>(t.n_ctx);
    const auto n_out = static_cast<std::int64_t>(t.n_out);
    const auto c = first_token(a, n_ctx);
    b.first = {c.embedding.to_long_double(), c.attention.to_long_double(), c.feed_forward.to_long_double(),
               c.output.to_long_double()};
    const auto p = per_token(a, n_ctx);
    b.c_i0 = p.c_i0.to_long_double();
    b.c_ic = p.c_ic.to_long_double();
    b.c1 = c.total().to_long_double();
    b.c_total = total(a, n_ctx, n_out).to_long_double();
    b.exact = true;
  } else {
    b.first = first_token_avg(a, t.n_ctx);
    const auto p = per_token_avg(a, t.n_ctx);
    b.c_i0 = p.c_i0;
    b.c_ic = p.c_ic;
    b.c1 = b.first.total();
    b.c_total = total_avg(a, t.n_ctx, t.n_out);
  }
  b.approx_2nn = approx(active_params(a), t.n_ctx, t.n_out);
  b.discrepancy_percent = discrepancy(b.c_total, b.approx_2nn);
  return b;
}

json to_json(const CostBreakdown& b) {
  auto d = [](long double v) { return static_cast<double>(v); };
  return {{"first_token",
           {{"embedding", d(b.first.embedding)},
            {"attention", d(b.first.attention)},
            {"feed_forward", d(b.first.feed_forward)},
            {"output", d(b.first.output)},
            {"total", d(b.c1)}}},
          {"per_token", {{"c_i0", d(b.c_i0)}, {"c_ic", d(b.c_ic)}}},
          {"c_total", d(b.c_total)},
          {"approx_2nn", d(b.approx_2nn)},
          {"discrepancy_percent", d(b.discrepancy_percent)},
          {"exact", b.exact}};
}

}  // namespace nesy::cost
