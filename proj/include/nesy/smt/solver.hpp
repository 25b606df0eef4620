#pragma once

#include <chrono>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

#include "nesy/logic/knowledge_base.hpp"

namespace nesy::smt {

enum class Polarity { assert_query, assert_negated_query };

struct SmtProgram {
  std::string text;
  Polarity polarity = Polarity::assert_query;
};

/// One uninterpreted sort U, a constant per named subject and a U -> Bool
/// function per predicate, all in first-appearance order; facts, then rules
/// as universally quantified implications, then the (negated) query and a
/// single (check-sat).
SmtProgram emit_smtlib(const logic::KnowledgeBase& kb, Polarity polarity);

enum class Status { Sat, Unsat, Unknown };

std::string_view to_string(Status s) noexcept;

struct SolverConfig {
  std::string path = "z3";
  std::vector<std::string> args = {"-in", "-smt2"};
  std::chrono::milliseconds timeout{10000};
};

struct SolverResult {
  Status status = Status::Unknown;
  std::chrono::microseconds wall_time{0};
  std::string raw_output;
  bool timed_out = false;
  int exit_code = 0;
};

class SolverError : public std::runtime_error {
 public:
  enum class Kind { missing_binary, unparseable_output };
  SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Runs a fresh solver process on the program text. The status is the first
/// output line that reads exactly sat, unsat or unknown. A timeout of zero or
/// less yields Unknown with timed_out set and spawns nothing.
SolverResult check_sat(const SmtProgram& program, const SolverConfig& config);

enum class Reason { none, underdetermined, contradictory_kb, solver_unknown };

std::string_view to_string(Reason r) noexcept;

struct Adjudication {
  logic::Verdict verdict = logic::Verdict::Inconsistent;
  Reason reason = Reason::none;
};

/// (Sat, Unsat) -> True, (Unsat, Sat) -> False; equal statuses or any Unknown
/// -> Inconsistent with the matching reason.
Adjudication adjudicate(const SolverResult& pos, const SolverResult& neg);

struct Decision {
  Adjudication adjudication;
  SolverResult pos;
  SolverResult neg;
  SmtProgram pos_program;
  SmtProgram neg_program;
};

/// Caps the number of live solver processes across threads.
class SolverGate {
 public:
  explicit SolverGate(std::ptrdiff_t max_parallel) : slots_(max_parallel) {}
  void acquire() { slots_.acquire(); }
  void release() { slots_.release(); }

 private:
  std::counting_semaphore<1024> slots_;
};

/// Both polarities; with `concurrent` the two solver runs overlap.
Decision decide_with_solver(const logic::KnowledgeBase& kb, const SolverConfig& config, SolverGate* gate = nullptr,
                            bool concurrent = true);

}  // namespace nesy::smt
