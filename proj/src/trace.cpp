#include "bioloop/trace.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "bioloop/error.hpp"
#include "bioloop/stream_sync.hpp"

namespace bioloop {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kTraceKindCount> kKindNames = {
    "Ingest", "Warning", "WindowFeatures", "StateVector", "Candidate", "Decision", "DirectiveSent", "ClientReply"};

std::optional<double> number_at(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_number()) return std::nullopt;
  return j[key].get<double>();
}

template <typename Parse>
std::optional<std::size_t> enum_field(const json& payload, const char* key, Parse parse) {
  if (!payload.contains(key) || !payload[key].is_string()) return std::nullopt;
  const auto v = parse(payload[key].get<std::string>());
  if (!v) return std::nullopt;
  return index_of(*v);
}

struct TriggerView {
  double score = 0.0;
  double confidence = 0.0;
};

std::optional<TriggerView> trigger_of(const TraceEvent& sv, Dimension d) {
  const auto& dims = sv.payload.contains("dims") ? sv.payload["dims"] : json();
  const auto key = std::string(to_string(d));
  if (!dims.is_object() || !dims.contains(key)) return std::nullopt;
  const auto score = number_at(dims[key], "trigger");
  const auto conf = number_at(dims[key], "trigger_confidence");
  if (!score || !conf) return std::nullopt;
  return TriggerView{*score, *conf};
}

}  // namespace

std::string_view to_string(TraceKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<TraceKind> parse_trace_kind(std::string_view text) {
  for (std::size_t i = 0; i < kTraceKindCount; ++i) {
    if (kKindNames[i] == text) return static_cast<TraceKind>(i);
  }
  return std::nullopt;
}

bool trace_order_less(const TraceEvent& a, const TraceEvent& b) {
  if (a.t != b.t) return a.t < b.t;
  if (a.kind != b.kind) return kind_priority(a.kind) < kind_priority(b.kind);
  return a.seq < b.seq;
}

void TraceLog::emit(double t, TraceKind kind, nlohmann::json payload) {
  events_.push_back({t, kind, next_seq_++, std::move(payload)});
}

std::vector<TraceEvent> TraceLog::sorted() const {
  auto out = events_;
  std::sort(out.begin(), out.end(), trace_order_less);
  return out;
}

std::string serialize_event(const TraceEvent& e) {
  json j = {{"t", e.t}, {"kind", std::string(to_string(e.kind))}, {"seq", e.seq}};
  for (const auto& [k, v] : e.payload.items()) j[k] = v;
  // nlohmann orders object keys alphabetically, which keeps lines byte-stable.
  return j.dump();
}

void write_trace(const std::vector<TraceEvent>& events, std::ostream& out) {
  for (const auto& e : events) out << serialize_event(e) << '\n';
}

void save_trace(const std::vector<TraceEvent>& events, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write trace " + path.string());
  write_trace(events, out);
}

std::vector<TraceEvent> parse_trace(std::istream& in) {
  std::vector<TraceEvent> events;
  std::string text;
  std::size_t line = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kParse, "trace line " + std::to_string(line) + ": " + why);
  };
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail("not a JSON object");
    if (!j.contains("t") || !j["t"].is_number()) fail("missing numeric t");
    if (!j.contains("kind") || !j["kind"].is_string()) fail("missing kind");
    if (!j.contains("seq") || !j["seq"].is_number_unsigned()) fail("missing seq");
    const auto kind = parse_trace_kind(j["kind"].get<std::string>());
    if (!kind) fail("unknown kind '" + j["kind"].get<std::string>() + "'");
    TraceEvent e;
    e.t = j["t"].get<double>();
    e.kind = *kind;
    e.seq = j["seq"].get<std::uint64_t>();
    j.erase("t");
    j.erase("kind");
    j.erase("seq");
    e.payload = std::move(j);
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<TraceEvent> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open trace " + path.string());
  return parse_trace(in);
}

json TraceSummary::to_json() const {
  json by_category = json::object();
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    by_category[std::string(to_string(static_cast<Category>(i)))] = decisions_by_category[i];
  }
  json by_dimension = json::object();
  json above = json::object();
  for (auto d : kAllDimensions) {
    by_dimension[std::string(to_string(d))] = decisions_by_dimension[index_of(d)];
    above[std::string(to_string(d))] = time_above_threshold_s[index_of(d)];
  }
  return {{"events", events},
          {"state_vectors", state_vectors},
          {"candidates", candidates},
          {"decisions", decisions},
          {"decisions_by_category", by_category},
          {"decisions_by_dimension", by_dimension},
          {"time_above_threshold_s", above},
          {"dropped", dropped},
          {"warnings", warnings},
          {"client_replies", client_replies},
          {"client_failures", client_failures}};
}

TraceSummary summarize(const std::vector<TraceEvent>& events) {
  TraceSummary s;
  s.events = events.size();
  for (const auto& e : events) {
    switch (e.kind) {
      case TraceKind::kIngest:
        if (e.payload.value("outcome", std::string()) == to_string(IngestOutcome::kDroppedLate)) ++s.dropped;
        break;
      case TraceKind::kWarning: ++s.warnings; break;
      case TraceKind::kWindowFeatures: break;
      case TraceKind::kStateVector: {
        ++s.state_vectors;
        const double hop = e.payload.value("hop_s", 0.0);
        if (!e.payload.contains("dims")) break;
        for (auto d : kAllDimensions) {
          const auto key = std::string(to_string(d));
          if (e.payload["dims"].contains(key) && e.payload["dims"][key].value("above", false)) {
            s.time_above_threshold_s[index_of(d)] += hop;
          }
        }
        break;
      }
      case TraceKind::kCandidate: ++s.candidates; break;
      case TraceKind::kDecision: {
        ++s.decisions;
        if (auto c = enum_field(e.payload, "category", parse_category)) {
          ++s.decisions_by_category[*c];
        }
        if (auto d = enum_field(e.payload, "dimension", parse_dimension)) {
          ++s.decisions_by_dimension[*d];
        }
        break;
      }
      case TraceKind::kDirectiveSent: break;
      case TraceKind::kClientReply:
        ++s.client_replies;
        if (!e.payload.contains("text") || e.payload["text"].is_null()) ++s.client_failures;
        break;
    }
  }
  return s;
}

std::vector<TraceViolation> validate_trace(const std::vector<TraceEvent>& events, const SessionConfig& cfg) {
  std::vector<TraceViolation> out;
  auto violation = [&](double t, std::string msg) { out.push_back({t, std::move(msg)}); };

  for (std::size_t i = 1; i < events.size(); ++i) {
    if (trace_order_less(events[i], events[i - 1])) violation(events[i].t, "events out of order");
  }

  std::vector<const TraceEvent*> vectors;
  std::vector<const TraceEvent*> decisions;
  for (const auto& e : events) {
    if (e.kind == TraceKind::kStateVector) vectors.push_back(&e);
    if (e.kind == TraceKind::kDecision) decisions.push_back(&e);
  }

  std::array<std::optional<double>, kDimensionCount> last_decision_t{};
  std::optional<double> previous_t;
  for (const auto* dec : decisions) {
    const double t = dec->t;
    if (previous_t && *previous_t == t) violation(t, "more than one decision at the same timestamp");
    previous_t = t;

    const auto dim = parse_dimension(dec->payload.value("dimension", std::string()));
    if (!dim) {
      violation(t, "decision without a valid dimension");
      continue;
    }
    const auto name = std::string(to_string(*dim));
    const double score = dec->payload.value("score", 0.0);
    const double conf = dec->payload.value("confidence", 0.0);
    if (!(score > cfg.trigger_threshold)) violation(t, name + " decision score not above threshold");
    if (!(conf > cfg.confidence_min)) violation(t, name + " decision confidence not above minimum");

    // Walk back over the supra-threshold run that ends at this vector. The
    // run restarts after the previous decision on the same dimension.
    auto it = std::upper_bound(vectors.begin(), vectors.end(), t,
                               [](double v, const TraceEvent* e) { return v < e->t; });
    if (it == vectors.begin() || (*(it - 1))->t != t) {
      violation(t, name + " decision without a state vector at its timestamp");
      continue;
    }
    int run = 0;
    double first = t;
    const auto floor_t = last_decision_t[index_of(*dim)];
    for (auto r = it; r != vectors.begin();) {
      --r;
      if (floor_t && (*r)->t <= *floor_t) break;
      const auto trig = trigger_of(**r, *dim);
      if (!trig || !(trig->score > cfg.trigger_threshold) || !(trig->confidence > cfg.confidence_min)) break;
      ++run;
      first = (*r)->t;
    }
    if (run < cfg.consecutive_windows) {
      violation(t, name + " decision after only " + std::to_string(run) + " supra-threshold windows");
    }
    if (t - first < cfg.persistence_s) violation(t, name + " decision before the persistence time elapsed");
    last_decision_t[index_of(*dim)] = t;
  }

  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto cat = parse_category(decisions[i]->payload.value("category", std::string()));
    if (!cat) {
      violation(decisions[i]->t, "decision without a valid category");
      continue;
    }
    const double until = decisions[i]->t + cfg.cooldown_for(*cat);
    for (std::size_t j = i + 1; j < decisions.size() && decisions[j]->t < until; ++j) {
      if (decisions[j]->payload.value("category", std::string()) == to_string(*cat)) {
        violation(decisions[j]->t, std::string(to_string(*cat)) + " decision inside cooldown");
      }
    }
  }
  return out;
}

}  // namespace bioloop
