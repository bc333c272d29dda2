// SPDX-License-Identifier: Apache-2.0
//
// ttscale: command-line front end for runs stored as <run-dir>/events.jsonl.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "ttscale/errors.hpp"
#include "ttscale/pipeline.hpp"

namespace {

using namespace ttscale;

struct Options {
  std::string config_path;
  std::string run_dir = "run";
  std::string problems_path;
  std::string prompts_dir;
  std::optional<std::string> model;
  std::optional<int> n_candidates;
  std::optional<int> k_verif;
  std::optional<double> delta;
  std::optional<std::uint64_t> seed;
  std::string strategy = "best_of_n";
  std::vector<int> n_values;
  int resamples = 1000;
  bool offline = false;
  std::string out;
  std::string format = "text";
};

RunConfig load_config(const Options& o) {
  RunConfig config = o.config_path.empty() ? RunConfig{} : RunConfig::load(o.config_path);
  if (o.model) config.model_name = *o.model;
  if (o.n_candidates) config.n_candidates = *o.n_candidates;
  if (o.k_verif) config.k_verif = *o.k_verif;
  if (o.delta) config.delta = *o.delta;
  if (o.seed) config.seed = *o.seed;
  if (!o.problems_path.empty()) config.problems_file = o.problems_path;
  if (!o.prompts_dir.empty()) config.prompts_dir = o.prompts_dir;
  config.validate();
  return config;
}

struct Session {
  RunConfig config;
  std::vector<Problem> problems;
  PromptLibrary prompts;
  std::unique_ptr<RunLog> log;
  std::unique_ptr<Pipeline> pipeline;
};

Session open_session(const Options& o, bool need_live) {
  Session s;
  s.config = load_config(o);
  if (!s.config.problems_file) throw ConfigError("no problems file (config problems_file or --problems)");
  s.problems = load_problems(*s.config.problems_file);
  s.prompts = PromptLibrary::bundled();
  if (s.config.prompts_dir) s.prompts.load_directory(*s.config.prompts_dir);
  std::filesystem::create_directories(o.run_dir);
  s.log = std::make_unique<RunLog>((std::filesystem::path(o.run_dir) / "events.jsonl").string());
  const bool offline = o.offline || !need_live;
  std::shared_ptr<Transport> transport =
      offline ? std::shared_ptr<Transport>(std::make_shared<OfflineTransport>()) : make_transport(s.config);
  std::shared_ptr<Sandbox> sandbox = offline ? nullptr : make_sandbox(s.config.sandbox);
  s.pipeline = std::make_unique<Pipeline>(s.config, s.problems, s.prompts, *s.log, transport, sandbox);
  return s;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.out);
  if (!out) throw StorageError("cannot write '" + o.out + "'");
  out << text;
  std::cerr << "wrote " << o.out << "\n";
}

int run_stage(const Options& o, Stage stage) {
  auto s = open_session(o, true);
  const auto before = s.log->size();
  s.pipeline->run_stage(stage);
  std::cout << fmt::format("{}: {} problems, {} new events ({} total)\n", to_string(stage), s.problems.size(),
                           s.log->size() - before, s.log->size());
  return 0;
}

int run_curve(const Options& o) {
  auto s = open_session(o, false);
  const auto events = s.log->events();
  const auto runs = s.pipeline->collect();
  const auto pool = build_pool(runs, events);
  if (pool.empty()) throw EmptyRunError("curve: no evaluated candidates in the run log");

  std::size_t smallest = pool.front().candidates.size();
  for (const auto& p : pool) smallest = std::min(smallest, p.candidates.size());
  std::vector<int> n_values = o.n_values;
  if (n_values.empty())
    for (int n : {1, 2, 5, 10, 25, 50})
      if (static_cast<std::size_t>(n) <= smallest) n_values.push_back(n);

  std::vector<Strategy> strategies;
  if (o.strategy == "all") strategies.assign(std::begin(kAllStrategies), std::end(kAllStrategies));
  else strategies.push_back(strategy_from_string(o.strategy));

  std::map<int, std::vector<PoolProblem>> by_level;
  for (const auto& p : pool) by_level[p.difficulty].push_back(p);

  std::vector<ScalingCurve> curves;
  for (Strategy strategy : strategies) {
    for (const auto& [level, problems] : by_level) {
      auto curve = empirical_curve(problems, strategy, n_values, o.resamples, s.config.seed, s.config.delta);
      curve.label = fmt::format("level{}", level);
      curves.push_back(std::move(curve));
    }
    curves.push_back(empirical_curve(pool, strategy, n_values, o.resamples, s.config.seed, s.config.delta));
  }
  emit(o, curves_to_tsv(curves));
  return 0;
}

int run_report(const Options& o) {
  auto s = open_session(o, false);
  const auto events = s.log->events();
  const auto report = build_report(summarize(s.pipeline->collect(), events), events);
  if (o.format == "json") emit(o, json(report).dump(2) + "\n");
  else if (o.format == "tsv") emit(o, report_tsv(report));
  else emit(o, report_text(report));
  return 0;
}

int run_replay(const Options& o) {
  const auto config = load_config(o);
  if (!config.problems_file) throw ConfigError("no problems file (config problems_file or --problems)");
  auto prompts = PromptLibrary::bundled();
  if (config.prompts_dir) prompts.load_directory(*config.prompts_dir);
  const auto log_path = (std::filesystem::path(o.run_dir) / "events.jsonl").string();
  if (!std::filesystem::exists(log_path)) throw StorageError("no run log at " + log_path);
  const auto events = RunLog::read_file(log_path);
  const auto check = replay_check(config, load_problems(*config.problems_file), prompts, events);
  for (const auto& d : check.divergences) std::cout << "DIVERGENCE " << d << "\n";
  std::cout << fmt::format("replay: {} verdicts and {} selections re-derived, {} divergences\n",
                           check.verdicts_checked, check.selections_checked, check.divergences.size());
  return check.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test-time scaling harness"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;

  app.add_option("--config", o.config_path, "Run configuration (JSON)");
  app.add_option("--run-dir", o.run_dir, "Directory holding events.jsonl")->capture_default_str();
  app.add_option("--problems", o.problems_path, "Problems file (JSONL), overrides the config");
  app.add_option("--prompts-dir", o.prompts_dir, "Directory of <name>.txt prompt overrides");
  app.add_option("--model", o.model, "Model name; 'replay' uses the replay fixture");
  app.add_option("--n-candidates", o.n_candidates, "Parallel candidates per problem");
  app.add_option("--k-verif", o.k_verif, "Verifier repetitions per candidate");
  app.add_option("--delta", o.delta, "Best-set score tolerance");
  app.add_option("--seed", o.seed, "Base seed");
  app.add_flag("--offline", o.offline, "Serve everything from the run log; no provider or sandbox access");

  const std::vector<std::pair<Stage, const char*>> stages{
      {Stage::Generate, "Sample candidate solutions"},
      {Stage::Evaluate, "Run candidate programs on the test inputs"},
      {Stage::Verify, "Score distinct candidates with both verifiers"},
      {Stage::Select, "Apply every selection strategy"},
      {Stage::Sequential, "Multi-round reasoning runs"}};
  std::map<CLI::App*, Stage> stage_commands;
  for (const auto& [stage, help] : stages) stage_commands[app.add_subcommand(to_string(stage), help)] = stage;

  auto* curve = app.add_subcommand("curve", "Accuracy versus number of attempts (TSV)");
  curve->add_option("--strategy", o.strategy, "majority|best_of_n|simple_verifier|symbolic_verifier|all")
      ->capture_default_str();
  curve->add_option("--n", o.n_values, "Subset sizes, e.g. 1,2,5,10")->delimiter(',');
  curve->add_option("--resamples", o.resamples, "Subsets drawn per size")->capture_default_str();
  curve->add_option("--out", o.out, "Output file (default stdout)");

  auto* report = app.add_subcommand("report", "Accuracy tables and token usage");
  report->add_option("--format", o.format, "text|json|tsv")
      ->check(CLI::IsMember({"text", "json", "tsv"}))
      ->capture_default_str();
  report->add_option("--out", o.out, "Output file (default stdout)");

  auto* replay = app.add_subcommand("replay", "Re-derive verdicts and selections from the log and compare");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [command, stage] : stage_commands)
      if (command->parsed()) return run_stage(o, stage);
    if (curve->parsed()) return run_curve(o);
    if (report->parsed()) return run_report(o);
    if (replay->parsed()) return run_replay(o);
  } catch (const ttscale::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
