#include "nesy/llm/pipeline.hpp"

#include <fmt/format.h>

namespace nesy::llm {

using logic::Verdict;
using nlohmann::json;

std::string_view to_string(Condition c) noexcept {
  switch (c) {
    case Condition::no_repair_3shot: return "no_repair_3shot";
    case Condition::repair_3shot: return "repair_3shot";
    case Condition::repair_1shot: return "repair_1shot";
  }
  return "?";
}

std::optional<Condition> parse_condition(std::string_view text) noexcept {
  for (auto c : {Condition::no_repair_3shot, Condition::repair_3shot, Condition::repair_1shot}) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

int shots(Condition c) noexcept { return c == Condition::repair_1shot ? 1 : 3; }
bool allows_repair(Condition c) noexcept { return c != Condition::no_repair_3shot; }

ChatExchange translate(const std::string& problem_nl, int shots, Endpoint& endpoint, const EndpointConfig& config) {
  return chat(endpoint, config, TemplateName::small_model_translate,
              {{"examples", examples_block(shots)}, {"problem_nl", problem_nl}});
}

ChatExchange repair(const std::string& problem_nl, const std::string& previous, int shots, Endpoint& endpoint,
                    const EndpointConfig& config) {
  return chat(endpoint, config, TemplateName::small_model_repair,
              {{"examples", examples_block(shots)}, {"problem_nl", problem_nl}, {"previous_translation", previous}});
}

PipelineTranscript solve_with_repair(const logic::Problem& problem, const PipelineOptions& options, Endpoint& endpoint,
                                     const EndpointConfig& config) {
  PipelineTranscript t;
  t.problem_id = problem.id;
  t.condition = options.condition;
  const std::string nl = problem.natural_language();
  const int max_attempts = allows_repair(options.condition) ? 1 + std::max(0, options.max_repairs) : 1;

  std::string previous;
  for (int k = 0; k < max_attempts; ++k) {
    Attempt a;
    a.exchange = k == 0 ? translate(nl, shots(options.condition), endpoint, config)
                        : repair(nl, previous, shots(options.condition), endpoint, config);
    t.usage.prompt_tokens += a.exchange.usage.prompt_tokens;
    t.usage.completion_tokens += a.exchange.usage.completion_tokens;
    t.usage.estimated = t.usage.estimated || a.exchange.usage.estimated;
    if (a.exchange.error) {
      a.error = *a.exchange.error;
      a.verdict = Verdict::Inconsistent;
      t.endpoint_failed = true;
      t.attempts.push_back(std::move(a));
      break;
    }
    previous = a.exchange.response;

    auto parsed = sl::parse_program(a.exchange.response);
    a.diagnostics = std::move(parsed.diagnostics);
    if (!parsed.kb) {
      a.error = a.exchange.blank ? "blank response" : "translation has no usable program";
      a.verdict = Verdict::Inconsistent;
      t.attempts.push_back(std::move(a));
      continue;
    }

    smt::Decision d;
    try {
      d = smt::decide_with_solver(*parsed.kb, options.solver, options.gate);
    } catch (const smt::SolverError& e) {
      a.error = e.what();
      a.verdict = Verdict::Inconsistent;
      t.solver_failed = true;
      t.attempts.push_back(std::move(a));
      break;
    }
    a.pos = d.pos;
    a.neg = d.neg;
    a.smt_pos = d.pos_program.text;
    a.smt_neg = d.neg_program.text;
    a.reason = d.adjudication.reason;
    if (allows_repair(options.condition)) {
      a.verdict = d.adjudication.verdict;
    } else {
      a.verdict = d.neg.status == smt::Status::Unsat ? Verdict::True
                  : d.neg.status == smt::Status::Sat ? Verdict::False
                                                     : Verdict::Undetermined;
    }
    const bool settled = a.verdict != Verdict::Inconsistent;
    t.attempts.push_back(std::move(a));
    if (settled) break;
  }

  t.final_verdict = t.attempts.empty() ? Verdict::Undetermined : t.attempts.back().verdict;
  t.final_answer = t.final_verdict == Verdict::True;
  return t;
}

namespace {

json solver_json(const std::optional<smt::SolverResult>& r) {
  if (!r) return nullptr;
  return json{{"status", smt::to_string(r->status)},
              {"wall_time_us", r->wall_time.count()},
              {"timed_out", r->timed_out},
              {"exit_code", r->exit_code},
              {"raw_output", r->raw_output}};
}

}  // namespace

json to_json(const Attempt& a) {
  json j{{"exchange", to_json(a.exchange)},
         {"diagnostics", sl::to_json(a.diagnostics)},
         {"verdict", logic::to_string(a.verdict)},
         {"reason", smt::to_string(a.reason)},
         {"solver_pos", solver_json(a.pos)},
         {"solver_neg", solver_json(a.neg)}};
  j["error"] = a.error ? json(*a.error) : json(nullptr);
  return j;
}

json to_json(const PipelineTranscript& t) {
  json attempts = json::array();
  for (const auto& a : t.attempts) attempts.push_back(to_json(a));
  return json{{"id", t.problem_id},
              {"condition", to_string(t.condition)},
              {"attempts", attempts},
              {"final_verdict", logic::to_string(t.final_verdict)},
              {"final_answer", t.final_answer},
              {"usage",
               {{"prompt_tokens", t.usage.prompt_tokens},
                {"completion_tokens", t.usage.completion_tokens},
                {"estimated", t.usage.estimated}}},
              {"endpoint_failed", t.endpoint_failed},
              {"solver_failed", t.solver_failed}};
}

}  // namespace nesy::llm
