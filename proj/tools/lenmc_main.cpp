// Command-line front end: run experiments, recompute summaries, and validate
// datasets. See README.md for dataset and results formats.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "lenmc/harness.hpp"
#include "lenmc/openai_client.hpp"

namespace {

std::string default_template_dir() {
#ifdef LENMC_TEMPLATE_DIR
  return LENMC_TEMPLATE_DIR;
#else
  return "templates";
#endif
}

void print_summary(const lenmc::EvalSummary& s) {
  std::printf("n          %zu\n", s.n);
  std::printf("acc        %.4f\n", s.acc);
  std::printf("l1         %.4f\n", s.l1);
  std::printf("l2         %.4f\n", s.l2);
  std::printf("mean_steps %.4f\n", s.mean_steps);
  if (s.rouge1) {
    std::printf("rouge1     %.4f\n", *s.rouge1);
    std::printf("rouge2     %.4f\n", *s.rouge2);
    std::printf("rougeL     %.4f\n", *s.rougeL);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative length-controlled sampling for chat LLMs"};
  app.require_subcommand(1);

  // --- run ---
  auto* run = app.add_subcommand("run", "Run an experiment over a dataset");
  std::string method = "mh-is";
  std::string dataset_path, out_path;
  std::string provider = "mock";
  std::string api_base = "http://localhost:8000";
  std::string model = "gpt-3.5-turbo";
  std::string judge_model;
  std::string task_filter;
  std::string template_dir = default_template_dir();
  int trials = 5, beams = 1, threshold = 3, workers = 1;
  std::uint64_t seed = 0;
  bool no_judge = false, traces = false;
  run->add_option("--method", method, "inst | rand | mh | mh-is")
      ->check(CLI::IsMember({"inst", "rand", "mh", "mh-is"}));
  run->add_option("--trials", trials, "Maximum proposal steps per chain");
  run->add_option("--beams", beams, "Independent chains per record");
  run->add_option("--seed", seed, "Root seed");
  run->add_option("--task", task_filter, "Only run records of this task")
      ->check(CLI::IsMember({"summ", "instr", "math"}));
  run->add_option("--dataset", dataset_path, "Dataset JSONL path")->required();
  run->add_option("--out", out_path, "Results JSONL path")->required();
  run->add_option("--provider", provider, "mock | openai-compat")
      ->check(CLI::IsMember({"mock", "openai-compat"}));
  run->add_option("--api-base", api_base, "Provider base URL");
  run->add_option("--model", model, "Model name");
  run->add_option("--judge-model", judge_model,
                  "Judge model name (defaults to --model)");
  run->add_flag("--no-judge", no_judge, "Disable the judge (ratio fixed at 1)");
  run->add_option("--threshold", threshold, "Importance regime threshold");
  run->add_option("--workers", workers, "Concurrent records");
  run->add_flag("--traces", traces, "Include full beam traces in results");
  run->add_option("--templates", template_dir, "Template directory");

  // --- summarize ---
  auto* summ = app.add_subcommand("summarize", "Recompute a results summary");
  std::string summarize_path;
  summ->add_option("--out", summarize_path, "Results JSONL path")
      ->required();

  // --- validate-dataset ---
  auto* validate = app.add_subcommand("validate-dataset", "Check a dataset file");
  std::string validate_path;
  validate->add_option("--dataset", validate_path, "Dataset JSONL path")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (summ->parsed()) {
      print_summary(lenmc::summarize(summarize_path));
      return 0;
    }
    if (validate->parsed()) {
      auto records = lenmc::load_dataset(validate_path);
      std::printf("ok: %zu records\n", records.size());
      return 0;
    }

    auto records = lenmc::load_dataset(dataset_path);
    if (!task_filter.empty()) {
      auto kind = *lenmc::parse_task(task_filter);
      std::erase_if(records,
                    [&](const lenmc::DatasetRecord& r) { return r.task != kind; });
    }
    auto prompts = lenmc::PromptLibrary::load(template_dir);
    prompts.regime_threshold = threshold;

    lenmc::RunOptions options;
    options.sampler.method = *lenmc::parse_method(method);
    options.sampler.max_trials = trials;
    options.sampler.beams = beams;
    options.sampler.seed = seed;
    options.sampler.regime_threshold = threshold;
    options.sampler.judge_enabled = !no_judge;
    options.workers = workers;
    options.include_beam_traces = traces;
    options.provider_id = provider;

    lenmc::ProviderFactory factory;
    if (provider == "mock") {
      factory = lenmc::mock_provider_factory(lenmc::MockBehavior::defaults());
    } else {
      lenmc::OpenAiClientConfig cfg;
      cfg.base_url = api_base;
      cfg.model = model;
      auto client = std::make_shared<lenmc::OpenAiClient>(cfg);
      factory = lenmc::shared_provider_factory(client);
      if (!judge_model.empty() && judge_model != model) {
        lenmc::OpenAiClientConfig jcfg = cfg;
        jcfg.model = judge_model;
        options.judge_factory = lenmc::shared_provider_factory(
            std::make_shared<lenmc::OpenAiClient>(jcfg));
      }
    }

    auto summary =
        lenmc::run_experiment(records, options, prompts, factory, out_path);
    print_summary(summary);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
