#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nesy/llm/endpoint.hpp"
#include "nesy/logic/problem.hpp"
#include "nesy/sl/program.hpp"
#include "nesy/smt/solver.hpp"

namespace nesy::llm {

enum class Condition { no_repair_3shot, repair_3shot, repair_1shot };

std::string_view to_string(Condition c) noexcept;
std::optional<Condition> parse_condition(std::string_view text) noexcept;
int shots(Condition c) noexcept;
bool allows_repair(Condition c) noexcept;

/// Sends the translation prompt for a problem.
ChatExchange translate(const std::string& problem_nl, int shots, Endpoint& endpoint, const EndpointConfig& config);
/// Sends the repair prompt with the failed translation embedded.
ChatExchange repair(const std::string& problem_nl, const std::string& previous, int shots, Endpoint& endpoint,
                    const EndpointConfig& config);

struct Attempt {
  ChatExchange exchange;
  std::vector<sl::ParseDiagnostic> diagnostics;
  logic::Verdict verdict = logic::Verdict::Undetermined;
  smt::Reason reason = smt::Reason::none;
  std::optional<smt::SolverResult> pos;
  std::optional<smt::SolverResult> neg;
  std::optional<std::string> smt_pos;  ///< program text, kept for audit
  std::optional<std::string> smt_neg;
  std::optional<std::string> error;
};

struct PipelineTranscript {
  std::string problem_id;
  Condition condition = Condition::repair_3shot;
  std::vector<Attempt> attempts;
  logic::Verdict final_verdict = logic::Verdict::Undetermined;
  bool final_answer = false;
  Usage usage;  ///< summed over attempts
  bool endpoint_failed = false;
  bool solver_failed = false;
};

struct PipelineOptions {
  Condition condition = Condition::repair_3shot;
  int max_repairs = 1;
  smt::SolverConfig solver;
  smt::SolverGate* gate = nullptr;
};

/// Translate, dual-solve and, where the condition allows, repair while the
/// verdict is Inconsistent. Under no_repair_3shot the verdict comes from the
/// negated-query run alone (Unsat -> True, Sat -> False); the other run is
/// still made and recorded. The final answer is True only for a True verdict.
PipelineTranscript solve_with_repair(const logic::Problem& problem, const PipelineOptions& options, Endpoint& endpoint,
                                     const EndpointConfig& config);

nlohmann::json to_json(const Attempt& a);
nlohmann::json to_json(const PipelineTranscript& t);

}  // namespace nesy::llm
