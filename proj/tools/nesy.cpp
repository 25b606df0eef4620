#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "app.hpp"
#include "nesy/cost/flops.hpp"
#include "nesy/logic/problem_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nesy;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

struct Flags {
  std::string config_path;
  std::optional<std::string> run_dir;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

struct Overrides {
  std::optional<std::string> endpoint, base_url, model, api_key_env, condition, prompt, strategy;
  std::optional<std::string> problems, transcripts, patterns, overlay, solver;
  std::optional<int> max_repairs, solver_workers;
  std::optional<double> z;
  bool keep_smt = false;
  bool single_pivot = false;
};

void add_overrides(CLI::App* cmd, Overrides& o, bool endpoint, bool problems) {
  if (endpoint) {
    cmd->add_option("--endpoint", o.endpoint, "stub:faithful, stub:faulty:<rate>:<seed>, stub:broken, stub:blank or an API base URL");
    cmd->add_option("--base-url", o.base_url, "API base URL (alternative to --endpoint)");
    cmd->add_option("--model", o.model, "model name sent to the endpoint");
    cmd->add_option("--api-key-env", o.api_key_env, "environment variable holding the API key");
  }
  if (problems) cmd->add_option("--problems", o.problems, "problems file (JSON Lines)");
}

void apply(app::RunConfig& c, const Flags& f, const Overrides& o) {
  if (o.endpoint) c.endpoint = *o.endpoint;
  if (o.base_url) {
    c.endpoint_config.base_url = *o.base_url;
    if (!o.endpoint) c.endpoint = *o.base_url;
  }
  if (o.model) c.endpoint_config.model = *o.model;
  if (o.api_key_env) c.endpoint_config.api_key_env = *o.api_key_env;
  if (o.condition) {
    auto cond = llm::parse_condition(*o.condition);
    if (!cond) throw app::ConfigError(fmt::format("unknown condition '{}'", *o.condition));
    c.condition = *cond;
  }
  if (o.prompt) c.prompt = *o.prompt;
  if (o.strategy) c.strategy = *o.strategy;
  if (o.problems) c.problems = *o.problems;
  if (o.transcripts) c.transcripts = *o.transcripts;
  if (o.patterns) c.patterns = *o.patterns;
  if (o.overlay) c.overlay = *o.overlay;
  if (o.solver) c.solver.path = *o.solver;
  if (o.max_repairs) c.max_repairs = *o.max_repairs;
  if (o.solver_workers) c.solver_workers = *o.solver_workers;
  if (o.z) c.z = *o.z;
  if (o.keep_smt) c.keep_smt = true;
  if (o.single_pivot) c.single_pivot = true;
  if (f.run_dir) c.run_dir = *f.run_dir;
  if (f.workers) c.workers = *f.workers;
  if (f.seed) {
    c.seed = *f.seed;
    c.endpoint_config.seed = static_cast<std::int64_t>(*f.seed);
  }
  if (c.patterns.empty()) c.patterns = app::data_dir() / "patterns" / "steps.txt";
}

app::RunConfig resolve(const Flags& f, const Overrides& o, bool needs_problems) {
  app::RunConfig c = f.config_path.empty() ? app::RunConfig{} : app::load_config(f.config_path);
  apply(c, f, o);
  app::validate(c, needs_problems);
  return c;
}

std::vector<logic::Problem> load_problems(const app::RunConfig& c) {
  return eval::ingest_problems(c.problems, c.field_mapping);
}

std::optional<fs::path> prepare_run_dir(const app::RunConfig& c) {
  if (c.run_dir.empty()) return std::nullopt;
  fs::create_directories(c.run_dir);
  return c.run_dir;
}

void preflight_solver(const app::RunConfig& c) {
  smt::SmtProgram probe;
  probe.text = "(check-sat)\n";
  auto r = smt::check_sat(probe, c.solver);
  if (r.status != smt::Status::Sat) {
    throw smt::SolverError(smt::SolverError::Kind::unparseable_output,
                           fmt::format("solver '{}' did not answer a trivial query", c.solver.path));
  }
}

int cmd_gen(const Flags& f, std::size_t count, std::vector<int> hops, std::size_t distractors, const std::string& out) {
  if (hops.empty()) hops = {1, 2, 3};
  for (int h : hops) {
    if (h < 1 || h > 3) throw app::ConfigError("hops must be 1, 2 or 3");
  }
  std::vector<logic::Problem> all;
  const std::size_t per = count / hops.size();
  for (std::size_t k = 0; k < hops.size(); ++k) {
    logic::GeneratorOptions g;
    g.hops = hops[k];
    g.count = per + (k < count % hops.size() ? 1 : 0);
    g.distractors = distractors;
    g.seed = f.seed.value_or(0) + static_cast<std::uint64_t>(hops[k]);
    auto batch = logic::generate_problems(g);
    all.insert(all.end(), std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
  }
  if (out.empty() || out == "-") {
    logic::write_problems(std::cout, all);
  } else {
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    logic::write_problems(fs::path(out), all);
  }
  if (f.verbose) std::cerr << fmt::format("wrote {} problems\n", all.size());
  return app::exit_ok;
}

int finish_pipeline(const app::PipelineRun& run, std::size_t requested, bool verbose) {
  if (run.summary) std::cout << eval::render_table(*run.summary);
  if (verbose || run.exit_code != app::exit_ok) {
    std::cerr << fmt::format("completed {}/{}; endpoint failures {}; solver failures {}{}\n", run.completed, requested,
                             run.endpoint_failures, run.solver_failures, run.interrupted ? "; interrupted" : "");
  }
  return run.exit_code;
}

int cmd_solve(const Flags& f, const Overrides& o) {
  auto c = resolve(f, o, true);
  auto problems = load_problems(c);
  preflight_solver(c);
  auto endpoint = llm::make_endpoint(c.endpoint, c.endpoint_config);
  auto dir = prepare_run_dir(c);
  if (dir) {
    app::write_run_config(*dir, "solve", c, {{"problems", c.problems}});
    logic::write_problems(*dir / "problems.jsonl", problems);
  }
  auto run = app::run_pipeline(problems, c, *endpoint, &g_stop, dir);
  return finish_pipeline(run, problems.size(), f.verbose);
}

int cmd_translate(const Flags& f, const Overrides& o) {
  auto c = resolve(f, o, true);
  auto problems = load_problems(c);
  auto endpoint = llm::make_endpoint(c.endpoint, c.endpoint_config);
  const int shots = llm::shots(c.condition);
  std::size_t failures = 0;
  std::vector<json> rows(problems.size());
  std::vector<char> done(problems.size(), 0);
  app::parallel_for(problems.size(), c.workers, &g_stop, [&](std::size_t i) {
    auto ex = llm::translate(problems[i].natural_language(), shots, *endpoint, c.endpoint_config);
    rows[i] = {{"id", problems[i].id}, {"exchange", llm::to_json(ex)}};
    done[i] = 1;
  });
  std::vector<json> kept;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!done[i]) continue;
    if (!rows[i]["exchange"]["error"].is_null()) ++failures;
    kept.push_back(rows[i]);
  }
  if (auto dir = prepare_run_dir(c)) {
    app::write_run_config(*dir, "translate", c, {{"problems", c.problems}});
    app::write_jsonl(*dir / "translations.jsonl", kept);
  } else {
    for (const auto& r : kept) std::cout << r.dump() << '\n';
  }
  if (!kept.empty() && failures == kept.size()) return app::exit_endpoint;
  return failures > 0 || kept.size() < problems.size() ? app::exit_partial : app::exit_ok;
}

int cmd_faithfulness(const Flags& f, const Overrides& o) {
  auto c = resolve(f, o, true);
  auto problems = load_problems(c);
  auto patterns = eval::load_patterns(c.patterns);
  auto overlay = c.overlay.empty() ? std::vector<eval::Override>{} : eval::load_overrides(c.overlay);
  std::vector<app::ReasoningTranscript> transcripts;
  int code = app::exit_ok;
  auto dir = prepare_run_dir(c);
  if (dir) {
    app::write_run_config(*dir, "faithfulness", c,
                          {{"problems", c.problems}, {"transcripts", c.transcripts}, {"patterns", c.patterns},
                           {"overlay", c.overlay}});
  }
  if (!c.transcripts.empty()) {
    for (const auto& j : eval::read_jsonl(c.transcripts)) transcripts.push_back(app::reasoning_from_json(j));
  } else {
    auto endpoint = llm::make_endpoint(c.endpoint, c.endpoint_config);
    auto run = app::run_reasoning(problems, *llm::parse_template_name(c.prompt), c, *endpoint, &g_stop);
    transcripts = std::move(run.transcripts);
    if (!transcripts.empty() && run.failures == transcripts.size()) {
      code = app::exit_endpoint;
    } else if (run.failures > 0 || run.interrupted) {
      code = app::exit_partial;
    }
    if (dir) {
      std::vector<json> rows;
      for (const auto& t : transcripts) rows.push_back(app::to_json(t));
      app::write_jsonl(*dir / "transcripts.jsonl", rows);
    }
  }
  if (transcripts.empty()) {
    std::cerr << "no transcripts to grade\n";
    return code == app::exit_ok ? app::exit_partial : code;
  }
  auto graded = app::grade(problems, transcripts, c, patterns, overlay);
  if (dir) {
    std::vector<json> rows;
    for (const auto& r : graded.records) rows.push_back(eval::to_json(r));
    app::write_jsonl(*dir / "records.jsonl", rows);
    app::write_json(*dir / "summary.json", eval::to_json(graded.summary));
    app::write_text(*dir / "summary.txt", eval::render_table(graded.summary));
  }
  std::cout << eval::render_table(graded.summary);
  if (graded.unmatched > 0) std::cerr << fmt::format("{} transcripts name no known problem\n", graded.unmatched);
  return code;
}

int cmd_eval(const Flags& f, const Overrides& o, const std::string& from_run) {
  if (from_run.empty()) return cmd_solve(f, o);
  // Offline regrade of an existing run directory.
  const fs::path dir = from_run;
  auto c = resolve(f, o, false);
  auto problems = eval::ingest_problems(dir / "problems.jsonl");
  std::map<std::string, const logic::Problem*> by_id;
  for (const auto& p : problems) by_id.emplace(p.id, &p);
  std::vector<eval::EvalRecord> records;
  for (const auto& j : eval::read_jsonl(dir / "transcripts.jsonl")) {
    const auto id = j.at("id").get<std::string>();
    auto it = by_id.find(id);
    if (it == by_id.end()) throw app::ConfigError(fmt::format("transcript for unknown problem '{}'", id));
    eval::EvalRecord r;
    r.id = id;
    r.condition = j.at("condition").get<std::string>();
    r.final_answer = j.at("final_answer").get<bool>();
    r.ground_truth = it->second->answer;
    r.correct = r.final_answer == r.ground_truth;
    r.prompt_tokens = j.at("usage").at("prompt_tokens").get<std::int64_t>();
    r.completion_tokens = j.at("usage").at("completion_tokens").get<std::int64_t>();
    r.attempts = static_cast<int>(j.at("attempts").size());
    r.failed = j.value("endpoint_failed", false) || j.value("solver_failed", false);
    records.push_back(std::move(r));
  }
  if (records.empty()) throw app::ConfigError("run directory holds no transcripts");
  auto summary = eval::summarize(records, c.z);
  std::cout << eval::render_table(summary);
  return app::exit_ok;
}

int cmd_cost(const std::string& arch_arg, long double n_ctx, long double n_out, bool as_json) {
  fs::path path = arch_arg;
  if (!fs::exists(path)) path = app::data_dir() / "arch" / (arch_arg + ".json");
  if (!fs::exists(path)) throw app::ConfigError(fmt::format("no architecture file for '{}'", arch_arg));
  auto arch = cost::load_arch(path);
  auto b = cost::breakdown(arch, {n_ctx, n_out});
  json j = cost::to_json(b);
  if (as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    for (const auto& [k, v] : j.items()) std::cout << fmt::format("{:<24} {}\n", k, v.dump());
  }
  return app::exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Neurosymbolic deduction toolkit: problems, translation, solving, grading, cost."};
  cli.require_subcommand(1);
  Flags flags;
  cli.add_option("--config", flags.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cli.add_option("--run-dir", flags.run_dir, "directory for run artifacts");
  cli.add_option("--workers", flags.workers, "concurrent requests");
  cli.add_option("--seed", flags.seed, "seed for generation and sampling");
  cli.add_flag("-v,--verbose", flags.verbose, "progress on stderr");

  Overrides o;

  std::size_t gen_count = 300, distractors = 2;
  std::vector<int> hops;
  std::string gen_out;
  auto* gen = cli.add_subcommand("gen", "generate synthetic problems");
  gen->add_option("-n,--count", gen_count, "number of problems, split evenly across hops");
  gen->add_option("--hops", hops, "hop counts to include (default 1 2 3)");
  gen->add_option("--distractors", distractors, "statements off the proof path");
  gen->add_option("-o,--out", gen_out, "output file (default stdout)");

  auto* translate = cli.add_subcommand("translate", "translate problems to the logic format");
  add_overrides(translate, o, true, true);
  translate->add_option("--condition", o.condition, "no_repair_3shot | repair_3shot | repair_1shot");

  auto* solve = cli.add_subcommand("solve", "translate, solve and repair");
  add_overrides(solve, o, true, true);
  solve->add_option("--condition", o.condition, "no_repair_3shot | repair_3shot | repair_1shot");
  solve->add_option("--max-repairs", o.max_repairs, "repair rounds after the first attempt");
  solve->add_option("--solver", o.solver, "SMT solver executable");
  solve->add_option("--solver-workers", o.solver_workers, "concurrent solver processes");
  solve->add_flag("--keep-smt", o.keep_smt, "keep SMT programs under <run-dir>/smt");
  solve->add_option("--z", o.z, "interval width in standard errors");

  std::string from_run;
  auto* ev = cli.add_subcommand("eval", "solve and summarise, or regrade a finished run");
  add_overrides(ev, o, true, true);
  ev->add_option("--condition", o.condition, "no_repair_3shot | repair_3shot | repair_1shot");
  ev->add_option("--max-repairs", o.max_repairs, "repair rounds after the first attempt");
  ev->add_option("--solver", o.solver, "SMT solver executable");
  ev->add_option("--z", o.z, "interval width in standard errors");
  ev->add_option("--from-run", from_run, "regrade an existing run directory without calling the endpoint");

  auto* faith = cli.add_subcommand("faithfulness", "grade reasoning transcripts for completeness and faithfulness");
  add_overrides(faith, o, true, true);
  faith->add_option("--prompt", o.prompt, "reasoning template: normal, cot, one_shot_cot, bottom_up, top_down, magic_set");
  faith->add_option("--strategy", o.strategy, "strategy to grade against (default from the prompt)");
  faith->add_option("--transcripts", o.transcripts, "grade these transcripts instead of querying the endpoint");
  faith->add_option("--patterns", o.patterns, "step pattern file");
  faith->add_option("--overlay", o.overlay, "manual grading overlay (JSON Lines)");
  faith->add_flag("--single-pivot", o.single_pivot, "magic set visits the pivot step once");
  faith->add_option("--z", o.z, "interval width in standard errors");

  std::string arch;
  long double n_ctx = 0, n_out = 0;
  bool as_json = false;
  auto* cost_cmd = cli.add_subcommand("cost", "inference FLOP estimate");
  cost_cmd->add_option("arch", arch, "architecture file or shipped name (e.g. llama-3.1-405b)")->required();
  cost_cmd->add_option("--ctx", n_ctx, "context tokens")->required();
  cost_cmd->add_option("--out", n_out, "generated tokens")->required();
  cost_cmd->add_flag("--json", as_json, "print JSON");

  CLI11_PARSE(cli, argc, argv);
  std::signal(SIGINT, on_sigint);

  try {
    if (*gen) return cmd_gen(flags, gen_count, hops, distractors, gen_out);
    if (*translate) return cmd_translate(flags, o);
    if (*solve) return cmd_solve(flags, o);
    if (*ev) return cmd_eval(flags, o, from_run);
    if (*faith) return cmd_faithfulness(flags, o);
    if (*cost_cmd) return cmd_cost(arch, n_ctx, n_out, as_json);
  } catch (const app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return app::exit_config;
  } catch (const smt::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return app::exit_solver;
  } catch (const llm::EndpointError& e) {
    std::cerr << "endpoint error: " << e.what() << '\n';
    return app::exit_endpoint;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::exit_config;
  }
  return app::exit_ok;
}
