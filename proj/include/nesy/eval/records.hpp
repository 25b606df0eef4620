#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nesy/eval/scoring.hpp"
#include "nesy/eval/steps.hpp"
#include "nesy/logic/problem.hpp"

namespace nesy::eval {

struct EvalRecord {
  std::string id;
  std::string condition;
  bool final_answer = false;
  bool ground_truth = false;
  bool correct = false;
  std::vector<std::size_t> detected_steps;
  std::optional<bool> complete;  ///< nullopt when the problem has no golden chain
  std::optional<bool> faithful;  ///< only for strategy conditions
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  int attempts = 0;  ///< pipeline attempts; 0 when not a pipeline run
  bool failed = false;  ///< endpoint or solver failure recorded for this problem
  bool overridden = false;
};

nlohmann::json to_json(const EvalRecord& r);
EvalRecord record_from_json(const nlohmann::json& j);

/// Strategy graded for a condition name ("bottom_up", "top_down",
/// "magic_set"); nullopt for every other condition.
std::optional<logic::Strategy> strategy_for(std::string_view condition);

struct ResponseScore {
  std::string_view condition{};
  std::string_view response{};
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  /// Strategy to grade faithfulness against; defaults to strategy_for(condition).
  std::optional<logic::Strategy> strategy{};
  logic::PivotPolicy pivot = logic::PivotPolicy::duplicate;
};

/// Scores a free-text reasoning response to one problem.
EvalRecord score_response(const logic::Problem& problem, const ResponseScore& in,
                          const std::vector<StepPattern>& patterns);

struct Override {
  std::string id;
  std::optional<std::string> condition;  ///< all records with the id when absent
  std::optional<bool> complete;
  std::optional<bool> faithful;
};

class OverlayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON Lines of {id, condition?, complete?, faithful?}.
std::vector<Override> load_overrides(const std::filesystem::path& path);

/// Applies reviewer flags and marks the touched records. faithful=true also
/// sets complete; complete=false also clears faithful. In strict mode an
/// entry that matches no record throws OverlayError.
std::vector<EvalRecord> apply_overrides(std::vector<EvalRecord> records, const std::vector<Override>& overlay,
                                        bool strict = true);

struct ConditionSummary {
  std::string condition;
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0;
  WilsonInterval accuracy_interval;
  /// Completeness and faithfulness are fractions of the correct records that
  /// could be graded; nullopt when none could.
  std::optional<double> complete_fraction;
  std::optional<double> faithful_fraction;
  std::size_t graded_complete = 0;
  std::size_t graded_faithful = 0;
  double avg_prompt_tokens = 0;
  double avg_completion_tokens = 0;
  std::size_t repairs = 0;       ///< attempts beyond the first, summed
  std::size_t repaired = 0;      ///< records with more than one attempt
  std::size_t failures = 0;
  std::size_t overridden = 0;
  WilsonInterval random_guess;  ///< p = 0.5 at the same n
};

struct EvalSummary {
  double z = 3;
  std::vector<ConditionSummary> conditions;  ///< sorted by name
};

/// Throws std::invalid_argument on empty input.
EvalSummary summarize(const std::vector<EvalRecord>& records, double z = 3);

nlohmann::json to_json(const WilsonInterval& w);
nlohmann::json to_json(const ConditionSummary& s);
nlohmann::json to_json(const EvalSummary& s);
std::string render_table(const EvalSummary& s);

/// Canonical problem field -> where to find it in a source record. A target
/// starting with '/' is a JSON pointer, anything else a top-level key. Fields
/// without an entry are read under their own name.
using FieldMapping = std::map<std::string, std::string>;

/// Reads a problem file written by the generator, or an external dump through
/// `mapping`. Throws logic::ProblemFormatError naming the 0-based record index.
std::vector<logic::Problem> ingest_problems(const std::filesystem::path& path, const FieldMapping& mapping = {});
std::vector<logic::Problem> ingest_problems(std::istream& in, const FieldMapping& mapping = {});

/// Reads every line of a JSON Lines stream; blank lines are skipped.
/// Throws std::runtime_error with the 1-based line number on bad JSON.
std::vector<nlohmann::json> read_jsonl(std::istream& in);
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

}  // namespace nesy::eval
