#include "nesy/eval/records.hpp"

#include <fstream>
#include <istream>

#include <fmt/format.h>

#include "nesy/logic/problem_io.hpp"

namespace nesy::eval {

using nlohmann::json;

namespace {

json optional_bool(const std::optional<bool>& b) { return b ? json(*b) : json(nullptr); }

std::optional<bool> read_optional_bool(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<bool>();
}

}  // namespace

json to_json(const EvalRecord& r) {
  return json{{"id", r.id},
              {"condition", r.condition},
              {"final_answer", r.final_answer},
              {"ground_truth", r.ground_truth},
              {"correct", r.correct},
              {"detected_steps", r.detected_steps},
              {"complete", optional_bool(r.complete)},
              {"faithful", optional_bool(r.faithful)},
              {"prompt_tokens", r.prompt_tokens},
              {"completion_tokens", r.completion_tokens},
              {"attempts", r.attempts},
              {"failed", r.failed},
              {"overridden", r.overridden}};
}

EvalRecord record_from_json(const json& j) {
  EvalRecord r;
  r.id = j.at("id").get<std::string>();
  r.condition = j.value("condition", "");
  r.final_answer = j.at("final_answer").get<bool>();
  r.ground_truth = j.at("ground_truth").get<bool>();
  r.correct = r.final_answer == r.ground_truth;
  r.detected_steps = j.value("detected_steps", std::vector<std::size_t>{});
  r.complete = read_optional_bool(j, "complete");
  r.faithful = read_optional_bool(j, "faithful");
  r.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  r.completion_tokens = j.value("completion_tokens", std::int64_t{0});
  r.attempts = j.value("attempts", 0);
  r.failed = j.value("failed", false);
  r.overridden = j.value("overridden", false);
  return r;
}

std::optional<logic::Strategy> strategy_for(std::string_view condition) { return logic::parse_strategy(condition); }

EvalRecord score_response(const logic::Problem& problem, const ResponseScore& in,
                          const std::vector<StepPattern>& patterns) {
  EvalRecord r;
  r.id = problem.id;
  r.condition = std::string(in.condition);
  r.final_answer = extract_answer(in.response);
  r.ground_truth = problem.answer;
  r.correct = r.final_answer == r.ground_truth;
  r.prompt_tokens = in.prompt_tokens;
  r.completion_tokens = in.completion_tokens;
  if (problem.chain && problem.chain->size() > 0) {
    const auto& chain = *problem.chain;
    r.detected_steps = detect_steps(in.response, chain, patterns);
    r.complete = check_completeness(chain.size(), r.detected_steps);
    const auto strategy = in.strategy ? in.strategy : strategy_for(in.condition);
    if (strategy) {
      r.faithful = check_faithfulness(logic::strategy_order(chain.size(), *strategy, in.pivot), r.detected_steps);
    }
  }
  return r;
}

std::vector<Override> load_overrides(const std::filesystem::path& path) {
  std::vector<Override> out;
  std::vector<json> rows;
  try {
    rows = read_jsonl(path);
  } catch (const std::runtime_error& e) {
    throw OverlayError(e.what());
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& j = rows[i];
    try {
      Override o;
      o.id = j.at("id").get<std::string>();
      if (j.contains("condition") && !j.at("condition").is_null()) o.condition = j.at("condition").get<std::string>();
      o.complete = read_optional_bool(j, "complete");
      o.faithful = read_optional_bool(j, "faithful");
      out.push_back(std::move(o));
    } catch (const json::exception& e) {
      throw OverlayError(fmt::format("overlay entry {}: {}", i, e.what()));
    }
  }
  return out;
}

std::vector<EvalRecord> apply_overrides(std::vector<EvalRecord> records, const std::vector<Override>& overlay,
                                        bool strict) {
  for (const auto& o : overlay) {
    bool hit = false;
    for (auto& r : records) {
      if (r.id != o.id || (o.condition && r.condition != *o.condition)) continue;
      hit = true;
      if (o.complete) {
        r.complete = *o.complete;
        if (!*o.complete && r.faithful) r.faithful = false;
      }
      if (o.faithful) {
        r.faithful = *o.faithful;
        if (*o.faithful) r.complete = true;
      }
      r.overridden = true;
    }
    if (!hit && strict) {
      throw OverlayError(o.condition ? fmt::format("overlay names unknown record '{}' ({})", o.id, *o.condition)
                                     : fmt::format("overlay names unknown record '{}'", o.id));
    }
  }
  return records;
}

EvalSummary summarize(const std::vector<EvalRecord>& records, double z) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  std::map<std::string, std::vector<const EvalRecord*>> groups;
  for (const auto& r : records) groups[r.condition].push_back(&r);

  EvalSummary out;
  out.z = z;
  for (const auto& [name, rs] : groups) {
    ConditionSummary s;
    s.condition = name;
    s.n = rs.size();
    std::size_t complete = 0, faithful = 0;
    std::int64_t prompt = 0, completion = 0;
    for (const auto* r : rs) {
      prompt += r->prompt_tokens;
      completion += r->completion_tokens;
      if (r->attempts > 1) {
        s.repairs += static_cast<std::size_t>(r->attempts - 1);
        ++s.repaired;
      }
      if (r->failed) ++s.failures;
      if (r->overridden) ++s.overridden;
      if (!r->correct) continue;
      ++s.correct;
      if (r->complete) {
        ++s.graded_complete;
        if (*r->complete) ++complete;
      }
      if (r->faithful) {
        ++s.graded_faithful;
        if (*r->faithful) ++faithful;
      }
    }
    const double n = static_cast<double>(s.n);
    s.accuracy = static_cast<double>(s.correct) / n;
    s.accuracy_interval = wilson_interval(s.accuracy, n, z);
    s.random_guess = wilson_interval(0.5, n, z);
    if (s.graded_complete > 0) s.complete_fraction = static_cast<double>(complete) / static_cast<double>(s.graded_complete);
    if (s.graded_faithful > 0) s.faithful_fraction = static_cast<double>(faithful) / static_cast<double>(s.graded_faithful);
    s.avg_prompt_tokens = static_cast<double>(prompt) / n;
    s.avg_completion_tokens = static_cast<double>(completion) / n;
    out.conditions.push_back(std::move(s));
  }
  return out;
}

json to_json(const WilsonInterval& w) {
  return json{{"p", w.p}, {"n", w.n}, {"z", w.z}, {"low", w.p_low}, {"high", w.p_high}};
}

json to_json(const ConditionSummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{{"condition", s.condition},
              {"n", s.n},
              {"correct", s.correct},
              {"accuracy", s.accuracy},
              {"accuracy_interval", to_json(s.accuracy_interval)},
              {"random_guess_interval", to_json(s.random_guess)},
              {"complete_fraction_of_correct", opt(s.complete_fraction)},
              {"faithful_fraction_of_correct", opt(s.faithful_fraction)},
              {"graded_complete", s.graded_complete},
              {"graded_faithful", s.graded_faithful},
              {"avg_prompt_tokens", s.avg_prompt_tokens},
              {"avg_completion_tokens", s.avg_completion_tokens},
              {"repairs", s.repairs},
              {"repaired_records", s.repaired},
              {"failures", s.failures},
              {"overridden", s.overridden}};
}

json to_json(const EvalSummary& s) {
  json conditions = json::array();
  for (const auto& c : s.conditions) conditions.push_back(to_json(c));
  return json{{"z", s.z}, {"conditions", conditions}};
}

std::string render_table(const EvalSummary& s) {
  auto pct = [](const std::optional<double>& v) { return v ? fmt::format("{:.1f}%", 100 * *v) : std::string("NA"); };
  std::string out = fmt::format("{:<18} {:>5} {:>8} {:>17} {:>9} {:>9} {:>8} {:>8} {:>7}\n", "condition", "n",
                                "correct", fmt::format("Z={} interval", s.z), "complete", "faithful", "prompt",
                                "complete", "repairs");
  for (const auto& c : s.conditions) {
    out += fmt::format("{:<18} {:>5} {:>7.1f}% {:>17} {:>9} {:>9} {:>8.1f} {:>8.1f} {:>7}\n", c.condition, c.n,
                       100 * c.accuracy,
                       fmt::format("[{:.3f}, {:.3f}]", c.accuracy_interval.p_low, c.accuracy_interval.p_high),
                       pct(c.complete_fraction), pct(c.faithful_fraction), c.avg_prompt_tokens,
                       c.avg_completion_tokens, c.repairs);
  }
  if (!s.conditions.empty()) {
    const auto& r = s.conditions.front().random_guess;
    out += fmt::format("random guessing at n={}: [{:.3f}, {:.3f}]\n", r.n, r.p_low, r.p_high);
  }
  return out;
}

std::vector<json> read_jsonl(std::istream& in) {
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw std::runtime_error(fmt::format("line {}: malformed JSON: {}", lineno, e.what()));
    }
  }
  return out;
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_jsonl(in);
}

std::vector<logic::Problem> ingest_problems(std::istream& in, const FieldMapping& mapping) {
  std::vector<json> rows;
  try {
    rows = read_jsonl(in);
  } catch (const std::runtime_error& e) {
    throw logic::ProblemFormatError(e.what());
  }
  std::vector<logic::Problem> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    json j = rows[i];
    for (const auto& [field, source] : mapping) {
      const json* value = nullptr;
      if (!source.empty() && source[0] == '/') {
        const json::json_pointer ptr(source);
        if (rows[i].contains(ptr)) value = &rows[i].at(ptr);
      } else if (rows[i].contains(source)) {
        value = &rows[i].at(source);
      }
      if (!value) {
        throw logic::ProblemFormatError(
            fmt::format("record {}: field '{}' mapped from '{}' is missing", i, field, source));
      }
      j[field] = *value;
    }
    try {
      out.push_back(logic::problem_from_json(j));
    } catch (const std::exception& e) {
      throw logic::ProblemFormatError(fmt::format("record {}: {}", i, e.what()));
    }
  }
  return out;
}

std::vector<logic::Problem> ingest_problems(const std::filesystem::path& path, const FieldMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw logic::ProblemFormatError("cannot read " + path.string());
  return ingest_problems(in, mapping);
}

}  // namespace nesy::eval
