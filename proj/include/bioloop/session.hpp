#pragma once

// End-to-end replay: calibrate on the leading segment, then every hop cut
// one window per stream kind, extract features, infer the state vector,
// run the trigger policy and send directives to the generation client.

#include <optional>
#include <vector>

#include "bioloop/client.hpp"
#include "bioloop/config.hpp"
#include "bioloop/scenario.hpp"
#include "bioloop/state.hpp"
#include "bioloop/trace.hpp"

namespace bioloop {

// defaults <- scenario header overrides, with the header seed as rng_seed.
SessionConfig config_from_header(const ScenarioHeader& header, SessionConfig base = {});

struct RunOptions {
  bool realtime = false;      // sleep to honor sample timestamps
  bool async_client = false;  // generation runs off the loop; replies land at the tick they are collected
};

struct SessionResult {
  std::vector<TraceEvent> trace;  // in trace order
  TraceSummary summary;
  CalibrationProfile calibration;
  std::vector<Turn> history;
};

// Throws Error(kConfig) listing every failed constraint, kUncalibrated when
// the timeline ends before calibration completes, and propagates scenario
// errors (unknown streams, bad sync marks).
SessionResult run_session(const ScenarioFile& scenario, const SessionConfig& cfg, GenerationClient& client,
                          const RunOptions& options = {});

}  // namespace bioloop
