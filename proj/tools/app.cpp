#include "app.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "nesy/logic/problem_io.hpp"

namespace nesy::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class T>
void take(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
    }
  }
}

void take_ms(const json& j, const char* key, std::chrono::milliseconds& out) {
  std::int64_t v = out.count();
  take(j, key, v);
  out = std::chrono::milliseconds(v);
}

void take_path(const json& j, const char* key, fs::path& out) {
  std::string s = out.string();
  take(j, key, s);
  out = s;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw ConfigError(fmt::format("unknown config key '{}{}'", where, k));
    }
  }
}

}  // namespace

void merge_config(RunConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"endpoint", "endpoint_config", "solver", "condition", "max_repairs", "prompt", "strategy",
                  "single_pivot", "workers", "solver_workers", "seed", "z", "keep_smt", "problems", "transcripts",
                  "patterns", "overlay", "run_dir", "field_mapping"},
                 "");
  take(j, "endpoint", c.endpoint);
  if (auto it = j.find("endpoint_config"); it != j.end()) {
    const auto& e = *it;
    reject_unknown(e,
                   {"base_url", "model", "api_key_env", "timeout_ms", "max_retries", "backoff_ms", "seed", "max_tokens",
                    "temperature"},
                   "endpoint_config.");
    auto& ec = c.endpoint_config;
    take(e, "base_url", ec.base_url);
    take(e, "model", ec.model);
    take(e, "api_key_env", ec.api_key_env);
    take_ms(e, "timeout_ms", ec.timeout);
    take(e, "max_retries", ec.max_retries);
    take_ms(e, "backoff_ms", ec.backoff);
    if (e.contains("seed")) ec.seed = e.at("seed").is_null() ? std::nullopt : std::optional(e.at("seed").get<std::int64_t>());
    if (e.contains("max_tokens")) {
      ec.max_tokens = e.at("max_tokens").is_null() ? std::nullopt : std::optional(e.at("max_tokens").get<std::int64_t>());
    }
    take(e, "temperature", ec.temperature);
  }
  if (auto it = j.find("solver"); it != j.end()) {
    reject_unknown(*it, {"path", "args", "timeout_ms"}, "solver.");
    take(*it, "path", c.solver.path);
    take(*it, "args", c.solver.args);
    take_ms(*it, "timeout_ms", c.solver.timeout);
  }
  if (j.contains("condition")) {
    const auto name = j.at("condition").get<std::string>();
    auto cond = llm::parse_condition(name);
    if (!cond) throw ConfigError(fmt::format("unknown condition '{}'", name));
    c.condition = *cond;
  }
  take(j, "max_repairs", c.max_repairs);
  take(j, "prompt", c.prompt);
  if (j.contains("strategy")) {
    c.strategy = j.at("strategy").is_null() ? std::nullopt : std::optional(j.at("strategy").get<std::string>());
  }
  take(j, "single_pivot", c.single_pivot);
  take(j, "workers", c.workers);
  take(j, "solver_workers", c.solver_workers);
  take(j, "seed", c.seed);
  take(j, "z", c.z);
  take(j, "keep_smt", c.keep_smt);
  take_path(j, "problems", c.problems);
  take_path(j, "transcripts", c.transcripts);
  take_path(j, "patterns", c.patterns);
  take_path(j, "overlay", c.overlay);
  take_path(j, "run_dir", c.run_dir);
  take(j, "field_mapping", c.field_mapping);
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config file {} is not valid JSON: {}", path.string(), e.what()));
  }
  RunConfig c;
  merge_config(c, j);
  return c;
}

json to_json(const RunConfig& c) {
  const auto& e = c.endpoint_config;
  return json{{"endpoint", c.endpoint},
              {"endpoint_config",
               {{"base_url", e.base_url},
                {"model", e.model},
                {"api_key_env", e.api_key_env},
                {"timeout_ms", e.timeout.count()},
                {"max_retries", e.max_retries},
                {"backoff_ms", e.backoff.count()},
                {"seed", e.seed ? json(*e.seed) : json(nullptr)},
                {"max_tokens", e.max_tokens ? json(*e.max_tokens) : json(nullptr)},
                {"temperature", e.temperature}}},
              {"solver", {{"path", c.solver.path}, {"args", c.solver.args}, {"timeout_ms", c.solver.timeout.count()}}},
              {"condition", llm::to_string(c.condition)},
              {"max_repairs", c.max_repairs},
              {"prompt", c.prompt},
              {"strategy", c.strategy ? json(*c.strategy) : json(nullptr)},
              {"single_pivot", c.single_pivot},
              {"workers", c.workers},
              {"solver_workers", c.solver_workers},
              {"seed", c.seed},
              {"z", c.z},
              {"keep_smt", c.keep_smt},
              {"problems", c.problems.string()},
              {"transcripts", c.transcripts.string()},
              {"patterns", c.patterns.string()},
              {"overlay", c.overlay.string()},
              {"run_dir", c.run_dir.string()},
              {"field_mapping", c.field_mapping}};
}

void validate(const RunConfig& c, bool needs_problems) {
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  if (c.solver_workers < 1) throw ConfigError("solver_workers must be at least 1");
  if (c.max_repairs < 0) throw ConfigError("max_repairs must not be negative");
  if (!(c.z > 0)) throw ConfigError("z must be positive");
  if (c.endpoint_config.max_retries < 0) throw ConfigError("endpoint_config.max_retries must not be negative");
  if (!llm::parse_template_name(c.prompt)) throw ConfigError(fmt::format("unknown prompt '{}'", c.prompt));
  if (c.strategy && !logic::parse_strategy(*c.strategy)) {
    throw ConfigError(fmt::format("unknown strategy '{}'; expected bottom_up, top_down or magic_set", *c.strategy));
  }
  if (needs_problems && c.problems.empty()) throw ConfigError("a problems file is required (--problems)");
  for (const auto* p : {&c.problems, &c.transcripts, &c.patterns, &c.overlay}) {
    if (!p->empty() && !fs::exists(*p)) throw ConfigError(fmt::format("file not found: {}", p->string()));
  }
}

fs::path data_dir() {
  if (const char* env = std::getenv("NESY_DATA_DIR"); env && *env) return env;
  return NESY_DATA_DIR;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

std::size_t parallel_for(std::size_t n, int workers, const std::atomic<bool>* stop,
                         const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0}, ran{0};
  auto work = [&] {
    for (;;) {
      if (stop && stop->load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
      ++ran;
    }
  };
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), std::max<std::size_t>(n, 1));
  std::vector<std::jthread> pool;
  for (std::size_t k = 1; k < count; ++k) pool.emplace_back(work);
  work();
  pool.clear();
  return ran.load();
}

Appender::Appender(const fs::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
}

void Appender::write(const json& j) {
  std::lock_guard lock(mu_);
  out_ << j.dump() << '\n';
  out_.flush();
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    for (const auto& r : rows) out << r.dump() << '\n';
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_run_config(const fs::path& run_dir, std::string_view command, const RunConfig& config,
                      const std::vector<std::pair<std::string, fs::path>>& inputs) {
  json hashes = json::object();
  for (const auto& [name, path] : inputs) {
    if (path.empty()) continue;
    hashes[name] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
  }
  write_json(run_dir / "config.json",
             {{"layout_version", 1}, {"command", command}, {"config", to_json(config)}, {"inputs", hashes}});
}

eval::EvalRecord record_from_transcript(const llm::PipelineTranscript& t, const logic::Problem& p) {
  eval::EvalRecord r;
  r.id = t.problem_id;
  r.condition = std::string(llm::to_string(t.condition));
  r.final_answer = t.final_answer;
  r.ground_truth = p.answer;
  r.correct = r.final_answer == r.ground_truth;
  r.prompt_tokens = t.usage.prompt_tokens;
  r.completion_tokens = t.usage.completion_tokens;
  r.attempts = static_cast<int>(t.attempts.size());
  r.failed = t.endpoint_failed || t.solver_failed;
  return r;
}

PipelineRun run_pipeline(const std::vector<logic::Problem>& problems, const RunConfig& config, llm::Endpoint& endpoint,
                         const std::atomic<bool>* stop, const std::optional<fs::path>& run_dir) {
  PipelineRun run;
  run.transcripts.resize(problems.size());
  smt::SolverGate gate(config.solver_workers);
  llm::PipelineOptions opts;
  opts.condition = config.condition;
  opts.max_repairs = config.max_repairs;
  opts.solver = config.solver;
  opts.gate = &gate;

  std::optional<Appender> live;
  if (run_dir) {
    fs::create_directories(*run_dir);
    if (config.keep_smt) fs::create_directories(*run_dir / "smt");
    live.emplace(*run_dir / "transcripts.jsonl");
  }
  std::atomic<std::size_t> done{0};
  parallel_for(problems.size(), config.workers, stop, [&](std::size_t i) {
    auto t = llm::solve_with_repair(problems[i], opts, endpoint, config.endpoint_config);
    if (live) live->write(llm::to_json(t));
    if (run_dir && config.keep_smt) {
      for (std::size_t k = 0; k < t.attempts.size(); ++k) {
        const auto& a = t.attempts[k];
        const auto stem = *run_dir / "smt" / fmt::format("{}-a{}", problems[i].id, k + 1);
        if (a.smt_pos) write_text(stem.string() + "-pos.smt2", *a.smt_pos);
        if (a.smt_neg) write_text(stem.string() + "-neg.smt2", *a.smt_neg);
      }
    }
    run.transcripts[i] = std::move(t);
    ++done;
  });
  run.completed = done.load();
  run.interrupted = run.completed < problems.size();

  std::vector<json> transcript_rows, record_rows;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const auto& t = run.transcripts[i];
    if (!t) continue;
    if (t->endpoint_failed) ++run.endpoint_failures;
    if (t->solver_failed) ++run.solver_failures;
    run.records.push_back(record_from_transcript(*t, problems[i]));
    transcript_rows.push_back(llm::to_json(*t));
    record_rows.push_back(eval::to_json(run.records.back()));
  }
  if (!run.records.empty()) run.summary = eval::summarize(run.records, config.z);

  const std::size_t failures = std::count_if(run.records.begin(), run.records.end(), [](const auto& r) { return r.failed; });
  if (run.completed > 0 && run.endpoint_failures == run.completed) {
    run.exit_code = exit_endpoint;
  } else if (run.completed > 0 && run.solver_failures == run.completed) {
    run.exit_code = exit_solver;
  } else if (failures > 0 || run.interrupted) {
    run.exit_code = exit_partial;
  }

  if (run_dir) {
    live.reset();
    write_jsonl(*run_dir / "transcripts.jsonl", transcript_rows);
    write_jsonl(*run_dir / "records.jsonl", record_rows);
    json summary = run.summary ? eval::to_json(*run.summary) : json::object();
    summary["completed"] = run.completed;
    summary["requested"] = problems.size();
    summary["interrupted"] = run.interrupted;
    summary["endpoint_failures"] = run.endpoint_failures;
    summary["solver_failures"] = run.solver_failures;
    summary["endpoint"] = endpoint.describe();
    write_json(*run_dir / "summary.json", summary);
    if (run.summary) write_text(*run_dir / "summary.txt", eval::render_table(*run.summary));
  }
  return run;
}

json to_json(const ReasoningTranscript& t) {
  json j{{"id", t.id},
         {"condition", t.condition},
         {"response", t.response},
         {"prompt_tokens", t.prompt_tokens},
         {"completion_tokens", t.completion_tokens}};
  j["error"] = t.error ? json(*t.error) : json(nullptr);
  return j;
}

ReasoningTranscript reasoning_from_json(const json& j) {
  ReasoningTranscript t;
  t.id = j.at("id").get<std::string>();
  t.condition = j.value("condition", "");
  t.response = j.value("response", "");
  t.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  t.completion_tokens = j.value("completion_tokens", std::int64_t{0});
  if (j.contains("error") && !j.at("error").is_null()) t.error = j.at("error").get<std::string>();
  return t;
}

ReasoningRun run_reasoning(const std::vector<logic::Problem>& problems, llm::TemplateName prompt,
                           const RunConfig& config, llm::Endpoint& endpoint, const std::atomic<bool>* stop) {
  ReasoningRun run;
  std::vector<std::optional<ReasoningTranscript>> slots(problems.size());
  parallel_for(problems.size(), config.workers, stop, [&](std::size_t i) {
    const auto& p = problems[i];
    auto ex = llm::chat(endpoint, config.endpoint_config, prompt, {{"question", p.question}, {"query", p.query}});
    ReasoningTranscript t;
    t.id = p.id;
    t.condition = std::string(llm::to_string(prompt));
    t.response = ex.response;
    t.prompt_tokens = ex.usage.prompt_tokens;
    t.completion_tokens = ex.usage.completion_tokens;
    t.error = ex.error;
    slots[i] = std::move(t);
  });
  for (auto& s : slots) {
    if (!s) {
      run.interrupted = true;
      continue;
    }
    if (s->error) ++run.failures;
    run.transcripts.push_back(std::move(*s));
  }
  return run;
}

GradeRun grade(const std::vector<logic::Problem>& problems, const std::vector<ReasoningTranscript>& transcripts,
               const RunConfig& config, const std::vector<eval::StepPattern>& patterns,
               const std::vector<eval::Override>& overlay) {
  std::map<std::string, const logic::Problem*> by_id;
  for (const auto& p : problems) by_id.emplace(p.id, &p);
  std::optional<logic::Strategy> strategy;
  if (config.strategy) strategy = logic::parse_strategy(*config.strategy);

  GradeRun out;
  std::vector<std::optional<eval::EvalRecord>> slots(transcripts.size());
  parallel_for(transcripts.size(), config.workers, nullptr, [&](std::size_t i) {
    const auto& t = transcripts[i];
    auto it = by_id.find(t.id);
    if (it == by_id.end()) return;
    eval::ResponseScore in;
    in.condition = t.condition;
    in.response = t.response;
    in.prompt_tokens = t.prompt_tokens;
    in.completion_tokens = t.completion_tokens;
    in.strategy = strategy;
    in.pivot = config.single_pivot ? logic::PivotPolicy::single : logic::PivotPolicy::duplicate;
    auto r = eval::score_response(*it->second, in, patterns);
    r.failed = t.error.has_value();
    slots[i] = std::move(r);
  });
  for (auto& s : slots) {
    if (s) {
      out.records.push_back(std::move(*s));
    } else {
      ++out.unmatched;
    }
  }
  out.records = eval::apply_overrides(std::move(out.records), overlay, true);
  out.summary = eval::summarize(out.records, config.z);
  return out;
}

}  // namespace nesy::app
