#pragma once

// Session trace: one JSON object per line, ordered by
// (t, kind priority, sequence number).
//
//   {"t":330.0,"kind":"Decision","seq":4121,"dimension":"CognitiveLoad",...}

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bioloop/config.hpp"
#include "bioloop/core.hpp"

namespace bioloop {

enum class TraceKind {
  kIngest,
  kWarning,
  kWindowFeatures,
  kStateVector,
  kCandidate,
  kDecision,
  kDirectiveSent,
  kClientReply,
};
inline constexpr std::size_t kTraceKindCount = 8;

std::string_view to_string(TraceKind k);
std::optional<TraceKind> parse_trace_kind(std::string_view text);

// Position of the kind among events sharing a timestamp.
constexpr int kind_priority(TraceKind k) { return static_cast<int>(k); }

struct TraceEvent {
  double t = 0.0;
  TraceKind kind = TraceKind::kWarning;
  std::uint64_t seq = 0;
  nlohmann::json payload = nlohmann::json::object();
};

bool trace_order_less(const TraceEvent& a, const TraceEvent& b);

// Accumulates events and hands them out in trace order.
class TraceLog {
 public:
  void emit(double t, TraceKind kind, nlohmann::json payload);

  const std::vector<TraceEvent>& events() const { return events_; }
  std::vector<TraceEvent> sorted() const;

 private:
  std::vector<TraceEvent> events_;
  std::uint64_t next_seq_ = 0;
};

std::string serialize_event(const TraceEvent& e);
void write_trace(const std::vector<TraceEvent>& events, std::ostream& out);
void save_trace(const std::vector<TraceEvent>& events, const std::filesystem::path& path);

// Throws kParse with the line number.
std::vector<TraceEvent> parse_trace(std::istream& in);
std::vector<TraceEvent> load_trace(const std::filesystem::path& path);

struct TraceSummary {
  std::size_t events = 0;
  std::size_t state_vectors = 0;
  std::size_t candidates = 0;
  std::size_t decisions = 0;
  std::array<std::size_t, kCategoryCount> decisions_by_category{};
  std::array<std::size_t, kDimensionCount> decisions_by_dimension{};
  std::array<double, kDimensionCount> time_above_threshold_s{};
  std::size_t dropped = 0;
  std::size_t warnings = 0;
  std::size_t client_replies = 0;
  std::size_t client_failures = 0;

  nlohmann::json to_json() const;
};

TraceSummary summarize(const std::vector<TraceEvent>& events);

struct TraceViolation {
  double t = 0.0;
  std::string message;
};

// Checks the trigger contract on a finished trace: every Decision sits on a
// supra-threshold StateVector run of the required length and duration,
// passes the score and confidence gates, is alone at its timestamp, and no
// other Decision of its category falls inside the cooldown that follows.
std::vector<TraceViolation> validate_trace(const std::vector<TraceEvent>& events, const SessionConfig& cfg);

}  // namespace bioloop
