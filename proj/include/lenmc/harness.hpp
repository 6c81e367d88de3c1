#pragma once

/**
 * Dataset ingestion, experiment execution, result persistence, and summary
 * recomputation.
 *
 * Datasets and results are newline-delimited JSON. Per-record seeds derive
 * from (root seed, record id), so execution order and interrupt/resume cannot
 * change any individual result; result lines are flushed in dataset order to
 * keep the output byte-reproducible.
 */

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "lenmc/constraint.hpp"
#include "lenmc/errors.hpp"
#include "lenmc/llm.hpp"
#include "lenmc/metrics.hpp"
#include "lenmc/mockllm.hpp"
#include "lenmc/prompts.hpp"
#include "lenmc/rng.hpp"
#include "lenmc/sampler.hpp"

namespace lenmc {

struct DatasetRecord {
  std::string id;
  TaskKind task = TaskKind::Instruction;
  std::string input;
  LengthConstraint target;
  std::optional<std::string> reference;
  std::optional<DemoTriple> demo;
  std::optional<std::string> demo_id;
};

inline Problem to_problem(const DatasetRecord& r) {
  Problem p;
  p.id = r.id;
  p.task = r.task;
  p.input = r.input;
  p.constraint = r.target;
  p.reference = r.reference;
  p.demo = r.demo;
  return p;
}

namespace detail {

inline LengthConstraint parse_target(const nlohmann::json& j,
                                     const std::optional<std::string>& reference) {
  if (j.is_number_integer()) return LengthConstraint::exact(j.get<int>());
  if (j.is_array()) {
    if (j.size() != 2) throw Error("interval target must have two entries");
    int lo = j[0].get<int>();
    std::optional<int> hi;
    if (!j[1].is_null()) hi = j[1].get<int>();
    return LengthConstraint::interval(lo, hi);
  }
  if (j.is_string() && j.get<std::string>() == "from_reference") {
    if (!reference) throw Error("target 'from_reference' without a reference");
    int n = count_words(*reference);
    if (n == 0) throw Error("reference has no words");
    return LengthConstraint::exact(n);
  }
  throw Error("unrecognized target field");
}

}  // namespace detail

inline std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset: " + path.string());
  std::vector<DatasetRecord> records;
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw MalformedRecord("line " + std::to_string(lineno) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    }
    try {
      DatasetRecord r;
      if (!j.contains("id") || !j["id"].is_string()) fail("missing id");
      r.id = j["id"].get<std::string>();
      if (!j.contains("task") || !j["task"].is_string()) fail("missing task");
      auto task = parse_task(j["task"].get<std::string>());
      if (!task) fail("unknown task: " + j["task"].get<std::string>());
      r.task = *task;
      if (!j.contains("input") || !j["input"].is_string() ||
          j["input"].get<std::string>().empty())
        fail("missing input");
      r.input = j["input"].get<std::string>();
      if (j.contains("reference") && j["reference"].is_string())
        r.reference = j["reference"].get<std::string>();
      if (!j.contains("target")) fail("missing target");
      r.target = detail::parse_target(j["target"], r.reference);
      if (j.contains("demo")) {
        const auto& d = j["demo"];
        DemoTriple demo;
        demo.document = d.at("input").get<std::string>();
        demo.summary = d.at("summary").get<std::string>();
        demo.target = d.contains("target") ? d["target"].get<int>()
                                           : count_words(demo.summary);
        r.demo = std::move(demo);
      }
      if (j.contains("demo_id") && j["demo_id"].is_string())
        r.demo_id = j["demo_id"].get<std::string>();
      if (!ids.insert(r.id).second)
        throw DuplicateId("duplicate record id: " + r.id);
      records.push_back(std::move(r));
    } catch (const MalformedRecord&) {
      throw;
    } catch (const DuplicateId&) {
      throw;
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  return records;
}

// Builds the provider used for one record. Mock providers are per-record so
// that the mock's judge knows the record's target length.
using ProviderFactory = std::function<std::shared_ptr<ChatProvider>(
    const DatasetRecord&, std::uint64_t record_seed)>;

inline ProviderFactory mock_provider_factory(MockBehavior base) {
  return [base](const DatasetRecord& record,
                std::uint64_t record_seed) -> std::shared_ptr<ChatProvider> {
    MockBehavior b = base;
    b.base_seed = record_seed;
    const auto& c = record.target;
    b.judge_target = c.kind == LengthConstraint::Kind::Exact
                         ? c.target
                         : (c.upper ? *c.upper : c.lower);
    return std::make_shared<MockProvider>(std::move(b));
  };
}

inline ProviderFactory shared_provider_factory(std::shared_ptr<ChatProvider> p) {
  return [p](const DatasetRecord&, std::uint64_t) { return p; };
}

struct RunOptions {
  SamplerConfig sampler;
  int workers = 1;
  bool include_beam_traces = false;
  std::string provider_id = "mock";
  // Optional distinct judge provider; empty means judge = generator.
  ProviderFactory judge_factory;
};

namespace detail {

inline nlohmann::json step_to_json(const StepRecord& s) {
  nlohmann::json j;
  j["step_index"] = s.step_index;
  j["proposal_deviation"] = s.proposal_deviation;
  j["f_prev"] = s.f_prev.satisfied ? nlohmann::json("satisfied")
                                   : nlohmann::json(s.f_prev.value);
  j["f_new"] = s.f_new.satisfied ? nlohmann::json("satisfied")
                                 : nlohmann::json(s.f_new.value);
  if (s.judge_ratio) j["judge_ratio"] = *s.judge_ratio;
  if (s.acceptance) j["acceptance"] = *s.acceptance;
  if (s.uniform_draw) j["uniform_draw"] = *s.uniform_draw;
  j["accepted"] = s.accepted;
  return j;
}

inline std::string result_line(const DatasetRecord& record,
                               const RunOptions& options,
                               const BeamsResult& beams) {
  nlohmann::json j;
  j["id"] = record.id;
  j["status"] = "ok";
  j["method"] = method_name(options.sampler.method);
  j["trials"] = options.sampler.max_trials;
  j["beams"] = options.sampler.beams;
  j["final_text"] = beams.best.text;
  j["word_count"] = beams.best.word_count;
  j["deviation"] = beams.best.deviation;
  const auto& best_chain = beams.beams[beams.best_beam];
  if (best_chain && best_chain->converged_at)
    j["converged_at"] = *best_chain->converged_at;
  else
    j["converged_at"] = nullptr;
  j["steps"] = best_chain ? static_cast<int>(best_chain->trace.size()) : 0;
  if (record.reference) {
    j["rouge1"] = rouge_n(beams.best.text, *record.reference, 1).f1;
    j["rouge2"] = rouge_n(beams.best.text, *record.reference, 2).f1;
    j["rougeL"] = rouge_l(beams.best.text, *record.reference).f1;
  }
  if (options.include_beam_traces) {
    nlohmann::json traces = nlohmann::json::array();
    for (const auto& beam : beams.beams) {
      if (!beam) {
        traces.push_back(nullptr);
        continue;
      }
      nlohmann::json t = nlohmann::json::array();
      for (const auto& s : beam->trace) t.push_back(step_to_json(s));
      traces.push_back(std::move(t));
    }
    j["beam_traces"] = std::move(traces);
  }
  return j.dump();
}

inline std::string error_line(const DatasetRecord& record,
                              const RunOptions& options,
                              const std::string& error) {
  nlohmann::json j;
  j["id"] = record.id;
  j["status"] = "error";
  j["method"] = method_name(options.sampler.method);
  j["trials"] = options.sampler.max_trials;
  j["beams"] = options.sampler.beams;
  j["error"] = error;
  return j.dump();
}

}  // namespace detail

// Recomputes the summary from a results file alone.
inline EvalSummary summarize(const std::filesystem::path& results_path) {
  std::ifstream in(results_path);
  if (!in) throw Error("cannot open results file: " + results_path.string());
  std::vector<int> deviations;
  std::vector<std::optional<int>> converged;
  std::vector<double> r1, r2, rl;
  int cap = 0;
  std::size_t n_errors = 0, n_lines = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ++n_lines;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw MalformedTrace("line " + std::to_string(lineno) + ": " + e.what());
    }
    try {
      if (j.at("status").get<std::string>() == "error") {
        ++n_errors;
        continue;
      }
      deviations.push_back(j.at("deviation").get<int>());
      cap = std::max(cap, j.at("trials").get<int>());
      if (j.at("converged_at").is_null())
        converged.push_back(std::nullopt);
      else
        converged.push_back(j.at("converged_at").get<int>());
      if (j.contains("rouge1")) {
        r1.push_back(j["rouge1"].get<double>());
        r2.push_back(j["rouge2"].get<double>());
        rl.push_back(j["rougeL"].get<double>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw MalformedTrace("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (n_lines == 0) throw EmptyInput("results file has no records");

  EvalSummary s;
  s.n = deviations.size();
  if (!deviations.empty()) {
    s.acc = accuracy(deviations);
    s.l1 = l1(deviations);
    s.l2 = l2(deviations);
    s.mean_steps = mean_convergence_steps(converged, cap);
  }
  auto mean = [](const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
  };
  if (!r1.empty()) {
    s.rouge1 = mean(r1);
    s.rouge2 = mean(r2);
    s.rougeL = mean(rl);
  }
  return s;
}

inline std::size_t count_errors(const std::filesystem::path& results_path) {
  std::ifstream in(results_path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.find("\"status\":\"error\"") != std::string::npos) ++n;
  }
  return n;
}

// Runs the configured method over every record not already present in the
// results file, streaming one line per record in dataset order, then writes a
// manifest and returns the recomputed summary.
inline EvalSummary run_experiment(const std::vector<DatasetRecord>& records,
                                  const RunOptions& options,
                                  const PromptLibrary& prompts,
                                  const ProviderFactory& provider_factory,
                                  const std::filesystem::path& out_path) {
  const auto started = std::chrono::system_clock::now();

  // Resume: collect ids of complete lines already present.
  std::set<std::string> done;
  if (std::filesystem::exists(out_path)) {
    std::ifstream in(out_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        done.insert(nlohmann::json::parse(line).at("id").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw MalformedTrace("resume: line " + std::to_string(lineno) + ": " +
                             e.what());
      }
    }
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!done.count(records[i].id)) todo.push_back(i);
  }

  std::ofstream out(out_path, std::ios::app);
  if (!out) throw Error("cannot open results file for append: " + out_path.string());

  std::vector<std::optional<std::string>> lines(todo.size());
  std::mutex flush_mutex;
  std::size_t next_flush = 0;
  auto flush_ready = [&] {
    while (next_flush < lines.size() && lines[next_flush]) {
      out << *lines[next_flush] << "\n";
      out.flush();
      lines[next_flush].reset();
      ++next_flush;
    }
  };

  auto run_one = [&](std::size_t slot) {
    const DatasetRecord& record = records[todo[slot]];
    const std::uint64_t record_seed =
        derive_seed(options.sampler.seed, record.id);
    std::string line;
    try {
      SamplerConfig config = options.sampler;
      config.seed = record_seed;
      auto provider = provider_factory(record, record_seed);
      std::shared_ptr<ChatProvider> judge;
      if (options.judge_factory) judge = options.judge_factory(record, record_seed);
      BeamsResult beams = run_beams(to_problem(record), config, prompts,
                                    *provider, judge.get());
      line = detail::result_line(record, options, beams);
    } catch (const std::exception& e) {
      line = detail::error_line(record, options, e.what());
    }
    std::lock_guard<std::mutex> lock(flush_mutex);
    lines[slot] = std::move(line);
    flush_ready();
  };

  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < todo.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= todo.size()) return;
          run_one(i);
        }
      });
    }
    for (auto& t : threads) t.join();
  }
  out.close();

  EvalSummary summary = summarize(out_path);

  // Manifest: enough to recompute and to audit what produced the file.
  nlohmann::json manifest;
  manifest["method"] = method_name(options.sampler.method);
  manifest["trials"] = options.sampler.max_trials;
  manifest["beams"] = options.sampler.beams;
  manifest["seed"] = options.sampler.seed;
  manifest["regime_threshold"] = options.sampler.regime_threshold;
  manifest["judge_enabled"] = options.sampler.judge_enabled;
  manifest["provider"] = options.provider_id;
  manifest["workers"] = options.workers;
  manifest["n_records"] = records.size();
  manifest["n_resumed"] = done.size();
  manifest["n_errors"] = count_errors(out_path);
  auto to_time = [](std::chrono::system_clock::time_point t) {
    return std::chrono::duration_cast<std::chrono::seconds>(
               t.time_since_epoch())
        .count();
  };
  manifest["started_unix"] = to_time(started);
  manifest["finished_unix"] = to_time(std::chrono::system_clock::now());
  {
    std::uint64_t h = 0;
    for (const auto& r : records) h = mix64(h, hash_string(r.id));
    manifest["dataset_id_hash"] = h;
  }
  std::ofstream mf(out_path.string() + ".manifest.json");
  mf << manifest.dump(2) << "\n";

  return summary;
}

}  // namespace lenmc
