// Command-line front end: run, synth, summarize, validate.

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bioloop/client.hpp"
#include "bioloop/error.hpp"
#include "bioloop/scenario.hpp"
#include "bioloop/session.hpp"
#include "bioloop/synth.hpp"
#include "bioloop/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitInvalid = 2;

int exit_code_for(const bioloop::Error& e) {
  switch (e.code()) {
    case bioloop::ErrorCode::kConfig:
    case bioloop::ErrorCode::kParse:
    case bioloop::ErrorCode::kInvariantViolation:
      return kExitInvalid;
    default:
      return kExitFatal;
  }
}

bioloop::SessionConfig resolve_config(const bioloop::ScenarioHeader& header, const std::string& config_path,
                                      std::optional<std::uint64_t> seed) {
  auto cfg = bioloop::config_from_header(header);
  if (!config_path.empty()) cfg = bioloop::load_config(config_path, cfg);
  if (seed) cfg.rng_seed = *seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replay-driven biosensor state inference and intervention engine"};
  app.require_subcommand(1);

  std::string scenario_path, config_path, trace_path, client_mode = "mock";
  std::optional<std::uint64_t> seed;
  bool realtime = false;
  auto* run = app.add_subcommand("run", "Replay a scenario and write its trace");
  run->add_option("--scenario", scenario_path, "Scenario JSONL file")->required()->check(CLI::ExistingFile);
  run->add_option("--config", config_path, "key = value overrides")->check(CLI::ExistingFile);
  run->add_option("--trace", trace_path, "Write the trace here");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_flag("--realtime", realtime, "Sleep to honor sample timestamps");
  run->add_option("--client", client_mode, "Generation backend")->check(CLI::IsMember({"mock", "live"}));

  std::string profile_path, out_path;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate a scenario from a synthetic profile");
  synth->add_option("--profile", profile_path, "Profile JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", out_path, "Scenario JSONL output")->required();
  synth->add_option("--seed", synth_seed, "Override the profile seed");

  std::string summary_trace;
  auto* summarize = app.add_subcommand("summarize", "Decision and warning counts of a trace");
  summarize->add_option("--trace", summary_trace, "Trace JSONL")->required()->check(CLI::ExistingFile);

  std::string validate_scenario, validate_trace_path, validate_config;
  auto* validate = app.add_subcommand("validate", "Check a scenario, or a trace against the trigger contract");
  validate->add_option("--scenario", validate_scenario, "Scenario JSONL")->check(CLI::ExistingFile);
  validate->add_option("--trace", validate_trace_path, "Trace JSONL")->check(CLI::ExistingFile);
  validate->add_option("--config", validate_config, "key = value overrides")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto scenario = bioloop::load_scenario(scenario_path);
      auto cfg = resolve_config(scenario.header, config_path, seed);
      if (client_mode == "live") cfg.client = bioloop::ClientMode::kLive;

      std::unique_ptr<bioloop::GenerationClient> client;
      bioloop::RunOptions options;
      options.realtime = realtime;
      if (cfg.client == bioloop::ClientMode::kLive) {
        client = bioloop::make_live_client_from_env(
            std::chrono::milliseconds(static_cast<long long>(cfg.client_timeout_s * 1000.0)));
        options.async_client = true;
      } else {
        client = std::make_unique<bioloop::MockClient>(scenario.header.analyzer_replies);
      }

      const auto result = bioloop::run_session(scenario, cfg, *client, options);
      if (!trace_path.empty()) bioloop::save_trace(result.trace, trace_path);
      std::cout << result.summary.to_json().dump(2) << '\n';
      return kExitOk;
    }

    if (*synth) {
      auto profile = bioloop::load_profile(profile_path);
      if (synth_seed) profile.seed = *synth_seed;
      bioloop::save_scenario(bioloop::synthesize(profile), out_path);
      return kExitOk;
    }

    if (*summarize) {
      std::cout << bioloop::summarize(bioloop::load_trace(summary_trace)).to_json().dump(2) << '\n';
      return kExitOk;
    }

    if (*validate) {
      if (validate_scenario.empty() && validate_trace_path.empty()) {
        std::cerr << "validate: give --scenario and/or --trace\n";
        return kExitInvalid;
      }
      bioloop::SessionConfig cfg;
      if (!validate_scenario.empty()) {
        const auto scenario = bioloop::load_scenario(validate_scenario);
        cfg = resolve_config(scenario.header, validate_config, std::nullopt);
        const auto report = bioloop::validate_config(cfg);
        for (const auto& f : report.failures) std::cerr << "config: " << f << '\n';
        if (!report.ok()) return kExitInvalid;
        std::cout << "scenario ok: " << scenario.header.streams.size() << " streams, " << scenario.records.size()
                  << " records\n";
      } else if (!validate_config.empty()) {
        cfg = bioloop::load_config(validate_config);
      }
      if (!validate_trace_path.empty()) {
        const auto violations = bioloop::validate_trace(bioloop::load_trace(validate_trace_path), cfg);
        for (const auto& v : violations) std::cerr << "t=" << v.t << ": " << v.message << '\n';
        if (!violations.empty()) return kExitInvalid;
        std::cout << "trace ok\n";
      }
      return kExitOk;
    }
  } catch (const bioloop::Error& e) {
    std::cerr << "error [" << bioloop::error_code_name(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitOk;
}
