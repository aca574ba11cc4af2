#pragma once

// Scenario files: one JSON object per line. The first line is the header
//
//   {"type":"header","seed":7,"streams":[{"id":"gaze","kind":"PupilGaze","rate_hz":60}],
//    "config":{"trigger_threshold":1.5},"analyzer_replies":["score=0.8; feedback=ok"]}
//
// followed by sample records
//
//   {"type":"sample","stream":"gaze","t":1.5,"x":0.4,"y":0.6,"pupil_mm":3.4,"confidence":0.97}
//   {"type":"sample","stream":"heart","t_ms":1500,"rr_ms":812}
//   {"type":"sample","stream":"posture","t":2,"landmarks":{"shoulder_left":[0.4,0.5,0.98],...}}
//   {"type":"sample","stream":"notes","t":30,"reply":"score=0.82; feedback=..."}
//
// Timestamps are seconds (`t`) or milliseconds (`t_ms`) in producer time.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bioloop/core.hpp"
#include "bioloop/directive.hpp"
#include "bioloop/state.hpp"
#include "bioloop/stream_sync.hpp"

namespace bioloop {

struct ScenarioStream {
  StreamDescriptor descriptor;
  std::vector<SyncMark> sync_marks;
};

struct ScenarioHeader {
  std::uint64_t seed = 0;
  std::vector<ScenarioStream> streams;
  std::vector<std::pair<std::string, std::string>> config;  // key/value overrides, in file order
  std::vector<std::string> analyzer_replies;
  std::optional<CalibrationProfile> calibration;
  std::optional<PostureSample> baseline_pose;
  std::vector<Turn> history;
};

struct ScenarioRecord {
  SampleEnvelope envelope;  // note payloads are placeholders until analyzed
  std::optional<std::string> note_reply;
  std::optional<std::string> note_transcript;
  std::size_t line = 0;
};

struct ScenarioFile {
  ScenarioHeader header;
  std::vector<ScenarioRecord> records;
};

// Throws kParse (with the line number) or kInvariantViolation.
ScenarioFile parse_scenario(std::istream& in);
ScenarioFile load_scenario(const std::filesystem::path& path);

void write_scenario(const ScenarioFile& scenario, std::ostream& out);
void save_scenario(const ScenarioFile& scenario, const std::filesystem::path& path);

}  // namespace bioloop
