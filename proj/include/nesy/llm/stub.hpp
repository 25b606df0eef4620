#pragma once

#include <cstdint>
#include <string>

#include "nesy/llm/endpoint.hpp"

namespace nesy::llm {

/// Deterministic offline endpoint.
///
///   faithful             correct translations; bottom-up proofs for reasoning prompts
///   faulty:<rate>:<seed> like faithful, but a `rate` share of first translations
///                        write the rule that concludes the query in plural form
///                        ("Cats are Mammals."); repairs are always correct
///   broken               every rule in plural form, repairs included
///   blank                empty replies
///
/// Whether a problem is hit by `faulty` depends only on the seed and the
/// problem text, so runs are reproducible under any scheduling.
class StubEndpoint : public Endpoint {
 public:
  enum class Mode { faithful, faulty, broken, blank };

  explicit StubEndpoint(Mode mode, double rate = 0, std::uint64_t seed = 0);
  /// Parses the part after "stub:". Throws EndpointError(config).
  static StubEndpoint from_spec(std::string_view spec);

  ChatReply complete(const ChatRequest& request) override;
  std::string describe() const override;

  /// Whether `faulty` corrupts the first translation of this problem text.
  bool corrupts(std::string_view problem_nl) const;

 private:
  Mode mode_;
  double rate_;
  std::uint64_t seed_;
};

/// Splits "statements\nTrue or false: query" at the last line.
std::pair<std::string, std::string> split_problem_text(std::string_view problem_nl);

}  // namespace nesy::llm
