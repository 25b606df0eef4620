#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nesy/eval/records.hpp"
#include "nesy/llm/pipeline.hpp"

namespace nesy::app {

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,
  exit_endpoint = 3,
  exit_solver = 4,
  exit_partial = 5,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a run needs. Loaded from a JSON file, then overridden by flags.
struct RunConfig {
  std::string endpoint = "stub:faithful";  ///< "stub:<mode>" or a base URL
  llm::EndpointConfig endpoint_config;
  smt::SolverConfig solver;
  llm::Condition condition = llm::Condition::repair_3shot;
  int max_repairs = 1;
  std::string prompt = "bottom_up";      ///< reasoning template for faithfulness runs
  std::optional<std::string> strategy;   ///< graded strategy; defaults to the prompt's
  bool single_pivot = false;
  int workers = 4;
  int solver_workers = 4;
  std::uint64_t seed = 0;
  double z = 3;
  bool keep_smt = false;
  std::filesystem::path problems;
  std::filesystem::path transcripts;
  std::filesystem::path patterns;
  std::filesystem::path overlay;
  std::filesystem::path run_dir;
  eval::FieldMapping field_mapping;
};

/// Reads the keys present in `j` into `c`; unknown keys are a ConfigError.
void merge_config(RunConfig& c, const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);
/// Throws ConfigError naming the first bad setting.
void validate(const RunConfig& c, bool needs_problems);

/// Directory holding the shipped data files: $NESY_DATA_DIR, else the
/// source tree's data/ at build time.
std::filesystem::path data_dir();

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Stops handing out
/// new indices once `stop` is set; returns how many indices ran.
std::size_t parallel_for(std::size_t n, int workers, const std::atomic<bool>* stop,
                         const std::function<void(std::size_t)>& fn);

/// Serialised line writer for a JSON Lines file.
class Appender {
 public:
  explicit Appender(const std::filesystem::path& path);
  void write(const nlohmann::json& j);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

struct PipelineRun {
  std::vector<std::optional<llm::PipelineTranscript>> transcripts;  ///< input order; empty if not reached
  std::vector<eval::EvalRecord> records;
  std::optional<eval::EvalSummary> summary;
  std::size_t completed = 0;
  std::size_t endpoint_failures = 0;
  std::size_t solver_failures = 0;
  bool interrupted = false;
  int exit_code = exit_ok;
};

eval::EvalRecord record_from_transcript(const llm::PipelineTranscript& t, const logic::Problem& p);

/// Runs solve_with_repair over every problem. With a run directory, the
/// transcripts are appended as they finish and the full layout is written at
/// the end.
PipelineRun run_pipeline(const std::vector<logic::Problem>& problems, const RunConfig& config, llm::Endpoint& endpoint,
                         const std::atomic<bool>* stop = nullptr,
                         const std::optional<std::filesystem::path>& run_dir = std::nullopt);

/// A free-text reasoning transcript: {id, condition, response, prompt_tokens,
/// completion_tokens, error?}.
struct ReasoningTranscript {
  std::string id;
  std::string condition;
  std::string response;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::optional<std::string> error;
};

nlohmann::json to_json(const ReasoningTranscript& t);
ReasoningTranscript reasoning_from_json(const nlohmann::json& j);

struct ReasoningRun {
  std::vector<ReasoningTranscript> transcripts;
  std::size_t failures = 0;
  bool interrupted = false;
};

ReasoningRun run_reasoning(const std::vector<logic::Problem>& problems, llm::TemplateName prompt,
                           const RunConfig& config, llm::Endpoint& endpoint, const std::atomic<bool>* stop = nullptr);

struct GradeRun {
  std::vector<eval::EvalRecord> records;
  eval::EvalSummary summary;
  std::size_t unmatched = 0;  ///< transcripts naming no known problem
};

/// Scores reasoning transcripts against their problems, then applies the
/// overlay (if any) and summarises.
GradeRun grade(const std::vector<logic::Problem>& problems, const std::vector<ReasoningTranscript>& transcripts,
               const RunConfig& config, const std::vector<eval::StepPattern>& patterns,
               const std::vector<eval::Override>& overlay);

/// Writes config.json with the resolved config and the content hashes of the
/// named input files.
void write_run_config(const std::filesystem::path& run_dir, std::string_view command, const RunConfig& config,
                      const std::vector<std::pair<std::string, std::filesystem::path>>& inputs);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace nesy::app
