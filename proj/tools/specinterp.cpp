// Command-line front end: run, train, demo, validate.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specinterp/error.hpp"
#include "specinterp/harness.hpp"

namespace {

int fail(const std::string& msg) {
  std::cerr << "specinterp: " << msg << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speculative simultaneous interpretation engine"};
  app.require_subcommand(1);

  si::RunSpec spec;
  std::string backend = "scripted";
  std::string lag = "1";
  std::string context_file;
  std::string context_id;
  std::string config_path, fixtures, model, phrases, out_events, out_report, transcript;
  int budget_ms = 200;

  auto add_backend_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "engine config JSON");
    cmd->add_option("--backend", backend, "scripted | ngram | remote")
        ->check(CLI::IsMember({"scripted", "ngram", "remote"}));
    cmd->add_option("--fixtures", fixtures, "scripted prediction fixture JSON");
    cmd->add_option("--model", model, "n-gram model file");
    cmd->add_option("--phrase-table", phrases, "phrase table TSV");
    cmd->add_option("--context", context_file, "context document (whitespace-separated tokens)");
    cmd->add_option("--context-id", context_id, "context id (scripted fixture / remote server)");
    cmd->add_option("--endpoint", spec.endpoint, "remote predictor, e.g. http://127.0.0.1:8080");
    cmd->add_option("--budget-ms", budget_ms, "remote request budget in ms");
    cmd->add_option("--max-len", spec.max_len, "n-gram continuation horizon");
  };

  auto* run = app.add_subcommand("run", "replay a transcript and write the event log and report");
  run->add_option("--transcript", transcript, "transcript JSONL")->required();
  add_backend_flags(run);
  run->add_option("--lag-profile", lag, "events delivered per tick, e.g. 3 or 1,1,4");
  run->add_option("--out-events", out_events, "event log output (JSONL)");
  run->add_option("--out-report", out_report, "report output (JSON)");

  std::string corpus, model_out;
  std::size_t order = 3;
  double alpha = 0.1;
  auto* train = app.add_subcommand("train", "train an n-gram model");
  train->add_option("--corpus", corpus, "one sentence per line")->required();
  train->add_option("--order", order, "n-gram order")->check(CLI::PositiveNumber);
  train->add_option("--alpha", alpha, "additive smoothing constant")->check(CLI::PositiveNumber);
  train->add_option("--model", model_out, "output model file")->required();

  auto* demo = app.add_subcommand("demo", "type source tokens and watch the engine");
  add_backend_flags(demo);

  std::vector<std::string> v_transcripts, v_fixtures, v_phrases, v_configs;
  auto* validate = app.add_subcommand("validate", "check fixtures against their invariants");
  validate->add_option("--transcript", v_transcripts, "transcript JSONL");
  validate->add_option("--fixtures", v_fixtures, "scripted prediction fixture JSON");
  validate->add_option("--phrase-table", v_phrases, "phrase table TSV");
  validate->add_option("--config", v_configs, "engine config JSON");

  CLI11_PARSE(app, argc, argv);

  auto fill_spec = [&] {
    spec.backend = *si::parse_backend_kind(backend);
    if (!config_path.empty()) spec.config = config_path;
    if (!fixtures.empty()) spec.fixtures = fixtures;
    if (!model.empty()) spec.model = model;
    if (!phrases.empty()) spec.phrase_table = phrases;
    if (!context_file.empty()) spec.context_file = context_file;
    if (!context_id.empty()) spec.context_id = context_id;
    spec.budget = std::chrono::milliseconds(budget_ms);
  };

  try {
    if (*run) {
      fill_spec();
      spec.transcript = transcript;
      spec.lag = si::LagProfile::parse(lag);
      if (!out_events.empty()) spec.out_events = out_events;
      if (!out_report.empty()) spec.out_report = out_report;
      const auto out = si::run(spec);
      if (!spec.out_report) std::cout << out.report;
      return 0;
    }
    if (*train) {
      const auto m = si::train_model(corpus, order, alpha, model_out);
      std::cerr << "trained order-" << m.order() << " model, vocabulary " << m.vocab_size() << '\n';
      return 0;
    }
    if (*demo) {
      fill_spec();
      spec.transcript.clear();
      auto problems = si::check_run_spec(spec);
      std::erase_if(problems, [](const std::string& p) { return p.rfind("transcript", 0) == 0; });
      if (!problems.empty()) return fail(problems.front());
      si::EngineConfig config;
      if (spec.config) config = si::parse_config(si::read_file(*spec.config));
      const auto loaded = si::load_backend(spec);
      si::run_demo(std::cin, std::cout, config, loaded);
      return 0;
    }
    if (*validate) {
      si::ValidateInputs inputs;
      for (const auto& p : v_transcripts) inputs.transcripts.emplace_back(p);
      for (const auto& p : v_fixtures) inputs.fixtures.emplace_back(p);
      for (const auto& p : v_phrases) inputs.phrase_tables.emplace_back(p);
      for (const auto& p : v_configs) inputs.configs.emplace_back(p);
      const auto problems = si::validate_inputs(inputs);
      for (const auto& p : problems) std::cout << p << '\n';
      if (!problems.empty()) return 1;
      std::cout << "ok\n";
      return 0;
    }
  } catch (const si::Error& e) {
    return fail(std::string(si::to_string(e.kind())) + ": " + e.what());
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return 0;
}
