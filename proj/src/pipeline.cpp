// SPDX-License-Identifier: Apache-2.0
#include "ttscale/pipeline.hpp"

#include <atomic>
#include <exception>
#include <thread>

#include <fmt/core.h>

#include "ttscale/errors.hpp"
#include "ttscale/random.hpp"

namespace ttscale {

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::Generate: return "generate";
    case Stage::Evaluate: return "evaluate";
    case Stage::Verify: return "verify";
    case Stage::Select: return "select";
    case Stage::Sequential: return "sequential";
  }
  return "generate";
}

Stage stage_from_string(const std::string& text) {
  for (Stage s : {Stage::Generate, Stage::Evaluate, Stage::Verify, Stage::Select, Stage::Sequential})
    if (to_string(s) == text) return s;
  throw ConfigError("unknown stage '" + text + "'");
}

namespace {

// Runs fn(0..n-1) on up to `workers` threads; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  for (int w = 0; w < std::min<int>(workers, static_cast<int>(n)); ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

const char* verifier_name(Strategy strategy) {
  return strategy == Strategy::SimpleVerifier ? "simple" : "symbolic";
}

json comparable(const Verdict& verdict) {
  json j = verdict;
  j.erase("usage");  // cache hits report zero usage
  return j;
}

}  // namespace

struct Pipeline::Modes {
  CallMode generate = CallMode::Live;
  ExecMode evaluate = ExecMode::Live;
  CallMode verify = CallMode::Live;
  ExecMode verify_exec = ExecMode::Live;
  CallMode select = CallMode::Live;
};

Pipeline::Pipeline(RunConfig config, std::vector<Problem> problems, PromptLibrary prompts, RunLog& log,
                   std::shared_ptr<Transport> transport, std::shared_ptr<Sandbox> sandbox)
    : config_(std::move(config)),
      problems_(std::move(problems)),
      prompts_(std::move(prompts)),
      log_(log),
      client_(std::move(transport), RetryPolicy::from(config_.retry), config_.rates, config_.cache, &log),
      sandbox_(std::move(sandbox), &log) {
  warm(log_.events());
}

void Pipeline::warm(const std::vector<Event>& events) {
  client_.warm_cache(events);
  sandbox_.warm_cache(events);
}

VerifySettings Pipeline::verify_settings() const {
  return VerifySettings{config_.model_name,     config_.temperature,     config_.seed,   config_.k_verif,
                        config_.max_tool_calls, config_.max_agent_turns, eval_settings()};
}

TieBreakSettings Pipeline::tie_break_settings() const {
  return TieBreakSettings{config_.model_name, config_.temperature, config_.seed, config_.k_tie,
                          config_.randomize_tie_order, false};
}

SequentialSettings Pipeline::sequential_settings() const {
  return SequentialSettings{config_.model_name,           config_.temperature,         config_.seed,
                            config_.n_iter,               config_.general_instructions, config_.summary_char_budget,
                            eval_settings()};
}

EvalSettings Pipeline::eval_settings() const {
  return EvalSettings{config_.sandbox.timeout_s, config_.sandbox.mem_limit_mb};
}

std::vector<Candidate> Pipeline::generate(const Problem& problem, CallMode mode) {
  const int n = config_.n_candidates;
  std::vector<Candidate> candidates(static_cast<std::size_t>(n));
  const std::string prompt = prompts_.render(prompt_names::kDefaultGeneration,
                                             {{"problem_statement", problem.statement},
                                              {"code_requirements", problem.answer_requirements}});
  parallel_for(candidates.size(), config_.workers, [&](std::size_t i) {
    ChatRequest request;
    request.model_name = config_.model_name;
    request.temperature = config_.temperature;
    request.seed = static_cast<std::int64_t>(derive_seed(config_.seed, "candidate", {i}) >> 33);
    request.messages.push_back(Message{Role::User, prompt, std::nullopt, {}});
    const auto response =
        client_.complete(request, Scope::of("generate", problem.id).with_candidate(static_cast<int>(i)), mode);
    auto& c = candidates[i];
    c.index = static_cast<int>(i);
    c.reasoning = response.content.value_or("");
    c.program_source = extract_program(c.reasoning);
    c.generation_cost = response.usage;
  });
  return candidates;
}

std::vector<Candidate> Pipeline::evaluate(const Problem& problem, std::vector<Candidate> candidates, ExecMode mode) {
  const auto settings = eval_settings();
  parallel_for(candidates.size(), config_.workers, [&](std::size_t i) {
    const Scope scope = Scope::of("evaluate", problem.id).with_candidate(candidates[i].index);
    candidates[i] = evaluate_candidate(std::move(candidates[i]), problem, sandbox_, settings, scope, mode);
  });
  return candidates;
}

std::vector<ScoredCandidate> Pipeline::verify(const Problem& problem, const std::vector<Candidate>& candidates,
                                              const DistinctSet& distinct, Strategy strategy, CallMode mode,
                                              ExecMode exec_mode, bool persist) {
  const auto settings = verify_settings();
  const std::string verifier = verifier_name(strategy);
  std::vector<ScoredCandidate> scored(distinct.representatives.size());
  parallel_for(scored.size(), config_.workers, [&](std::size_t g) {
    const Candidate* c = find_candidate(candidates, distinct.representatives[g]);
    const Scope scope = Scope::of("verify", problem.id).with_candidate(c->index).with_strategy(verifier);
    scored[g] = strategy == Strategy::SimpleVerifier
                    ? simple_verify(problem, *c, settings, client_, prompts_, scope, mode)
                    : symbolic_verify(problem, *c, settings, client_, sandbox_, prompts_, scope, mode, exec_mode);
  });
  if (persist) {
    for (const auto& s : scored)
      for (std::size_t r = 0; r < s.verdicts.size(); ++r)
        log_.append_unique(VerdictEvent{Scope::of("verify", problem.id)
                                            .with_candidate(s.candidate_index)
                                            .with_strategy(verifier)
                                            .with_repetition(static_cast<int>(r)),
                                        verifier, s.verdicts[r]});
  }
  return scored;
}

SelectionOutcome Pipeline::select(const Problem& problem, const std::vector<Candidate>& candidates,
                                  const DistinctSet& distinct, Strategy strategy,
                                  const std::vector<ScoredCandidate>& scored, CallMode mode,
                                  bool missing_as_abstention) {
  switch (strategy) {
    case Strategy::Majority: return majority_vote(distinct, candidates);
    case Strategy::BestOfN: return best_of_n(candidates);
    default: break;
  }
  auto settings = tie_break_settings();
  settings.missing_as_abstention = missing_as_abstention;
  const Scope scope = Scope::of("select", problem.id).with_strategy(to_string(strategy));
  PairJudge judge = [&](int a, int b) {
    return compare_pair(problem, *find_candidate(candidates, a), *find_candidate(candidates, b), settings, client_,
                        prompts_, scope.with_pair(a, b), mode);
  };
  return select_with_scores(strategy, candidates, scored, config_.delta, judge);
}

std::vector<std::vector<RoundState>> Pipeline::sequential(const Problem& problem, CallMode mode, ExecMode exec_mode) {
  const auto settings = sequential_settings();
  std::vector<std::vector<RoundState>> attempts;
  for (int a = 0; a < config_.n_sequential_attempts; ++a)
    attempts.push_back(run_sequential(problem, settings, a, client_, sandbox_, prompts_,
                                      Scope::of("sequential", problem.id), mode, exec_mode));
  return attempts;
}

void Pipeline::run_pass(Stage last, const Modes& modes) {
  for (const auto& problem : problems_) {
    auto candidates = generate(problem, modes.generate);
    if (last == Stage::Generate) continue;
    candidates = evaluate(problem, std::move(candidates), modes.evaluate);
    if (last == Stage::Evaluate) continue;
    const auto distinct = dedup(candidates, config_.dedup_rtol, config_.dedup_atol);
    const auto simple =
        verify(problem, candidates, distinct, Strategy::SimpleVerifier, modes.verify, modes.verify_exec, true);
    const auto symbolic =
        verify(problem, candidates, distinct, Strategy::SymbolicVerifier, modes.verify, modes.verify_exec, true);
    if (last == Stage::Verify) continue;
    for (Strategy s : kAllStrategies) {
      const auto& scored = s == Strategy::SimpleVerifier ? simple : symbolic;
      auto outcome = select(problem, candidates, distinct, s, scored, modes.select);
      log_.append_unique(SelectionEvent{Scope::of("select", problem.id).with_strategy(to_string(s)), std::move(outcome)});
    }
  }
}

void Pipeline::run_stage(Stage stage) {
  if (stage == Stage::Sequential) {
    for (const auto& problem : problems_) sequential(problem, CallMode::Live, ExecMode::Live);
    return;
  }
  Modes modes;
  if (stage > Stage::Generate) modes.generate = CallMode::CacheOnly;
  if (stage > Stage::Evaluate) modes.evaluate = ExecMode::CacheOnly;
  if (stage > Stage::Verify) {
    modes.verify = CallMode::CacheOnly;
    modes.verify_exec = ExecMode::CacheOnly;
  }
  run_pass(stage, modes);
}

void Pipeline::run_all() {
  run_pass(Stage::Select, Modes{});
  run_stage(Stage::Sequential);
}

std::vector<ProblemRun> Pipeline::collect() {
  const auto events = log_.events();
  const auto selections = recorded_selections(events);
  std::vector<ProblemRun> runs;
  for (const auto& problem : problems_) {
    ProblemRun run;
    run.problem = &problem;
    try {
      run.candidates = evaluate(problem, generate(problem, CallMode::CacheOnly), ExecMode::CacheOnly);
    } catch (const FixtureMissError&) {
      run.candidates.clear();
    }
    run.distinct = dedup(run.candidates, config_.dedup_rtol, config_.dedup_atol);
    if (!run.candidates.empty()) {
      for (Strategy s : {Strategy::SimpleVerifier, Strategy::SymbolicVerifier}) {
        try {
          auto scored = verify(problem, run.candidates, run.distinct, s, CallMode::CacheOnly, ExecMode::CacheOnly,
                               false);
          (s == Strategy::SimpleVerifier ? run.simple : run.symbolic) = std::move(scored);
        } catch (const FixtureMissError&) {
        }
      }
    }
    for (Strategy s : kAllStrategies)
      if (auto it = selections.find({problem.id, s}); it != selections.end()) run.selections[s] = it->second;
    try {
      run.sequential = sequential(problem, CallMode::CacheOnly, ExecMode::CacheOnly);
    } catch (const FixtureMissError&) {
      run.sequential.clear();
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

RecordedVerdicts recorded_verdicts(const std::vector<Event>& events) {
  std::map<std::tuple<std::string, std::string, int>, std::map<int, Verdict>> by_rep;
  for (const auto& event : events) {
    const auto* v = std::get_if<VerdictEvent>(&event.payload);
    if (!v || !v->scope.candidate) continue;
    by_rep[{v->scope.problem_id, v->verifier, *v->scope.candidate}][v->scope.repetition.value_or(0)] = v->verdict;
  }
  RecordedVerdicts out;
  for (auto& [key, reps] : by_rep)
    for (auto& [_, verdict] : reps) out[key].push_back(std::move(verdict));
  return out;
}

std::map<std::pair<std::string, Strategy>, SelectionOutcome> recorded_selections(const std::vector<Event>& events) {
  std::map<std::pair<std::string, Strategy>, SelectionOutcome> out;
  for (const auto& event : events)
    if (const auto* s = std::get_if<SelectionEvent>(&event.payload))
      out[{s->scope.problem_id, s->outcome.strategy}] = s->outcome;
  return out;
}

std::vector<ScoredCandidate> scores_from_verdicts(const RecordedVerdicts& verdicts, const std::string& problem_id,
                                                  const std::string& verifier, const DistinctSet& distinct) {
  std::vector<ScoredCandidate> scored;
  for (int rep : distinct.representatives) {
    ScoredCandidate s{rep, {}, 0.0};
    if (auto it = verdicts.find({problem_id, verifier, rep}); it != verdicts.end()) s.verdicts = it->second;
    s.mean_score = mean_score(s.verdicts);
    scored.push_back(std::move(s));
  }
  return scored;
}

std::vector<ProblemSummary> summarize(const std::vector<ProblemRun>& runs, const std::vector<Event>&) {
  std::vector<ProblemSummary> out;
  for (const auto& run : runs) {
    ProblemSummary s;
    s.id = run.problem->id;
    s.difficulty = run.problem->difficulty;
    if (!run.candidates.empty()) {
      int correct = 0;
      for (const auto& c : run.candidates) correct += c.correct() ? 1 : 0;
      s.single_attempt = static_cast<double>(correct) / static_cast<double>(run.candidates.size());
    }
    if (!run.sequential.empty()) {
      const std::size_t rounds = run.sequential.front().size();
      for (std::size_t r = 0; r < rounds; ++r) {
        int correct = 0;
        for (const auto& attempt : run.sequential) correct += attempt[r].round_candidate.correct() ? 1 : 0;
        s.round_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(run.sequential.size()));
      }
    }
    s.selections = run.selections;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PoolProblem> build_pool(const std::vector<ProblemRun>& runs, const std::vector<Event>& events) {
  const auto verdicts = recorded_verdicts(events);
  std::vector<PoolProblem> pool;
  for (const auto& run : runs) {
    if (run.candidates.empty()) continue;
    PoolProblem p;
    p.id = run.problem->id;
    p.difficulty = run.problem->difficulty;
    p.candidates = run.candidates;
    p.distinct = run.distinct;
    for (const auto& s : scores_from_verdicts(verdicts, p.id, "simple", p.distinct))
      p.simple_scores[s.candidate_index] = s.mean_score;
    for (const auto& s : scores_from_verdicts(verdicts, p.id, "symbolic", p.distinct))
      p.symbolic_scores[s.candidate_index] = s.mean_score;
    if (auto it = run.selections.find(Strategy::SimpleVerifier); it != run.selections.end())
      p.simple_pairs = it->second.matchups;
    if (auto it = run.selections.find(Strategy::SymbolicVerifier); it != run.selections.end())
      p.symbolic_pairs = it->second.matchups;
    pool.push_back(std::move(p));
  }
  return pool;
}

ReplayCheck replay_check(const RunConfig& config, const std::vector<Problem>& problems, const PromptLibrary& prompts,
                         const std::vector<Event>& events) {
  RunLog scratch;
  Pipeline pipeline(config, problems, prompts, scratch, std::make_shared<OfflineTransport>(), nullptr);
  pipeline.warm(events);
  const auto recorded = recorded_verdicts(events);
  const auto selections = recorded_selections(events);

  ReplayCheck check;
  auto diverge = [&](std::string text) { check.divergences.push_back(std::move(text)); };

  for (const auto& problem : pipeline.problems()) {
    bool has_verdicts = false;
    for (const auto& [key, _] : recorded)
      if (std::get<0>(key) == problem.id) has_verdicts = true;
    bool has_selections = false;
    for (Strategy s : kAllStrategies) has_selections |= selections.count({problem.id, s}) > 0;
    if (!has_verdicts && !has_selections) continue;

    std::vector<Candidate> candidates;
    try {
      candidates = pipeline.evaluate(problem, pipeline.generate(problem, CallMode::CacheOnly), ExecMode::CacheOnly);
    } catch (const FixtureMissError& e) {
      diverge(fmt::format("problem {}: candidates cannot be re-derived: {}", problem.id, e.what()));
      continue;
    }
    const auto distinct = dedup(candidates, config.dedup_rtol, config.dedup_atol);

    for (Strategy s : {Strategy::SimpleVerifier, Strategy::SymbolicVerifier}) {
      const std::string verifier = verifier_name(s);
      std::map<int, const std::vector<Verdict>*> mine;
      for (const auto& [key, list] : recorded)
        if (std::get<0>(key) == problem.id && std::get<1>(key) == verifier) mine[std::get<2>(key)] = &list;
      if (mine.empty()) continue;
      std::vector<ScoredCandidate> rederived;
      try {
        rederived = pipeline.verify(problem, candidates, distinct, s, CallMode::CacheOnly, ExecMode::CacheOnly, false);
      } catch (const FixtureMissError& e) {
        diverge(fmt::format("problem {}: {} verdicts cannot be re-derived: {}", problem.id, verifier, e.what()));
        continue;
      }
      for (const auto& [candidate, list] : mine) {
        const ScoredCandidate* fresh = nullptr;
        for (const auto& r : rederived)
          if (r.candidate_index == candidate) fresh = &r;
        if (!fresh) {
          diverge(fmt::format("verdict problem={} verifier={} candidate={}: recorded for a non-representative",
                              problem.id, verifier, candidate));
          continue;
        }
        const std::size_t reps = std::max(list->size(), fresh->verdicts.size());
        for (std::size_t r = 0; r < reps; ++r) {
          ++check.verdicts_checked;
          if (r >= list->size() || r >= fresh->verdicts.size()) {
            diverge(fmt::format("verdict problem={} verifier={} candidate={} repetition={}: missing on one side",
                                problem.id, verifier, candidate, r));
          } else if (comparable((*list)[r]) != comparable(fresh->verdicts[r])) {
            diverge(fmt::format(
                "verdict problem={} verifier={} candidate={} repetition={}: recorded score {}, re-derived {}",
                problem.id, verifier, candidate, r, (*list)[r].overall_score, fresh->verdicts[r].overall_score));
          }
        }
      }
    }

    for (Strategy s : kAllStrategies) {
      auto it = selections.find({problem.id, s});
      if (it == selections.end()) continue;
      ++check.selections_checked;
      std::vector<ScoredCandidate> scored;
      if (s == Strategy::SimpleVerifier || s == Strategy::SymbolicVerifier)
        scored = scores_from_verdicts(recorded, problem.id, verifier_name(s), distinct);
      SelectionOutcome outcome;
      try {
        outcome = pipeline.select(problem, candidates, distinct, s, scored, CallMode::CacheOnly, true);
      } catch (const Error& e) {
        diverge(fmt::format("selection problem={} strategy={}: cannot re-derive: {}", problem.id, to_string(s),
                            e.what()));
        continue;
      }
      if (json(outcome).dump() != json(it->second).dump()) {
        auto show = [](const SelectionOutcome& o) {
          return fmt::format("chosen {} solved {}", o.chosen_index ? std::to_string(*o.chosen_index) : "none",
                             o.solved);
        };
        diverge(fmt::format("selection problem={} strategy={}: recorded {}, re-derived {}", problem.id, to_string(s),
                            show(it->second), show(outcome)));
      }
    }
  }
  return check;
}

}  // namespace ttscale
