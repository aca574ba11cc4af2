#include "bioloop/scenario.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include <json.hpp>

#include "bioloop/error.hpp"

namespace bioloop {

namespace {

using nlohmann::json;

[[noreturn]] void parse_error(std::size_t line, const std::string& reason) {
  throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + reason);
}

[[noreturn]] void invariant_error(std::size_t line, const std::string& reason) {
  throw Error(ErrorCode::kInvariantViolation, "line " + std::to_string(line) + ": " + reason);
}

double number_field(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || !j[key].is_number()) parse_error(line, std::string("missing numeric field '") + key + "'");
  return j[key].get<double>();
}

double optional_number(const json& j, const char* key, double fallback, std::size_t line) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  if (!j[key].is_number()) parse_error(line, std::string("field '") + key + "' must be numeric");
  return j[key].get<double>();
}

PostureSample parse_pose(const json& j, std::size_t line) {
  if (!j.is_object()) parse_error(line, "landmarks must be an object");
  PostureSample pose;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const auto name = std::string(to_string(static_cast<Landmark>(i)));
    if (!j.contains(name)) continue;  // invisible
    const auto& p = j[name];
    if (!p.is_array() || p.size() < 2 || p.size() > 3 || !p[0].is_number() || !p[1].is_number()) {
      parse_error(line, "landmark '" + name + "' must be [x, y] or [x, y, visibility]");
    }
    pose.points[i] = {p[0].get<double>(), p[1].get<double>()};
    pose.visibility[i] = p.size() == 3 ? p[2].get<double>() : 1.0;
  }
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) known |= key == to_string(static_cast<Landmark>(i));
    if (!known) parse_error(line, "unknown landmark '" + key + "'");
  }
  return pose;
}

json pose_to_json(const PostureSample& pose) {
  json j = json::object();
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    j[std::string(to_string(static_cast<Landmark>(i)))] = {pose.points[i].x, pose.points[i].y, pose.visibility[i]};
  }
  return j;
}

std::string value_to_config_string(const json& v, std::size_t line) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return v.dump();
  parse_error(line, "config values must be strings, numbers or booleans");
}

ScenarioHeader parse_header(const json& j, std::size_t line) {
  ScenarioHeader h;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) parse_error(line, "seed must be a non-negative integer");
    h.seed = j["seed"].get<std::uint64_t>();
  }
  if (!j.contains("streams") || !j["streams"].is_array()) parse_error(line, "header needs a streams array");
  std::set<std::string> ids;
  for (const auto& s : j["streams"]) {
    if (!s.is_object() || !s.contains("id") || !s["id"].is_string() || !s.contains("kind") || !s["kind"].is_string()) {
      parse_error(line, "each stream needs string fields id and kind");
    }
    ScenarioStream stream;
    stream.descriptor.stream_id = s["id"].get<std::string>();
    const auto kind = parse_stream_kind(s["kind"].get<std::string>());
    if (!kind) parse_error(line, "unknown stream kind '" + s["kind"].get<std::string>() + "'");
    stream.descriptor.kind = *kind;
    stream.descriptor.nominal_rate_hz = number_field(s, "rate_hz", line);
    try {
      stream.descriptor.validate();
    } catch (const Error& e) {
      invariant_error(line, e.what());
    }
    if (!ids.insert(stream.descriptor.stream_id).second) {
      invariant_error(line, "duplicate stream id '" + stream.descriptor.stream_id + "'");
    }
    if (s.contains("sync_marks")) {
      for (const auto& m : s["sync_marks"]) {
        if (!m.is_array() || m.size() != 2 || !m[0].is_number() || !m[1].is_number()) {
          parse_error(line, "sync marks are [producer_t, session_t] pairs");
        }
        stream.sync_marks.push_back({m[0].get<double>(), m[1].get<double>()});
      }
    }
    h.streams.push_back(std::move(stream));
  }
  if (j.contains("config")) {
    if (!j["config"].is_object()) parse_error(line, "config must be an object");
    for (const auto& [key, value] : j["config"].items()) {
      h.config.emplace_back(key, value_to_config_string(value, line));
    }
  }
  if (j.contains("analyzer_replies")) {
    for (const auto& r : j["analyzer_replies"]) {
      if (!r.is_string()) parse_error(line, "analyzer replies must be strings");
      h.analyzer_replies.push_back(r.get<std::string>());
    }
  }
  if (j.contains("calibration")) {
    const auto& c = j["calibration"];
    if (!c.is_object()) parse_error(line, "calibration must be an object");
    CalibrationProfile profile;
    for (const auto& [name, stats] : c.items()) {
      const auto channel = parse_feature_channel(name);
      if (!channel) parse_error(line, "unknown calibration channel '" + name + "'");
      auto& base = profile.at(*channel);
      base.mu = number_field(stats, "mu", line);
      base.sigma = number_field(stats, "sigma", line);
      if (!(base.sigma > 0.0)) invariant_error(line, "calibration sigma must be > 0");
      base.quality_mean = 1.0;
      base.calibrated = true;
    }
    h.calibration = std::move(profile);
  }
  if (j.contains("baseline_pose")) h.baseline_pose = parse_pose(j["baseline_pose"], line);
  if (j.contains("history")) {
    for (const auto& t : j["history"]) {
      if (!t.is_object() || !t.contains("role") || !t.contains("text")) {
        parse_error(line, "history turns need role and text");
      }
      h.history.push_back({t["role"].get<std::string>(), t["text"].get<std::string>()});
    }
  }
  return h;
}

ScenarioRecord parse_sample(const json& j, std::size_t line, const std::map<std::string, StreamKind>& kinds) {
  if (!j.contains("stream") || !j["stream"].is_string()) parse_error(line, "sample needs a stream id");
  ScenarioRecord rec;
  rec.line = line;
  auto& env = rec.envelope;
  env.stream_id = j["stream"].get<std::string>();
  const auto kind = kinds.find(env.stream_id);
  if (kind == kinds.end()) invariant_error(line, "sample references undeclared stream '" + env.stream_id + "'");

  if (j.contains("t")) env.timestamp = Timestamp{number_field(j, "t", line)};
  else if (j.contains("t_ms")) env.timestamp = Timestamp{number_field(j, "t_ms", line) / 1000.0};
  else parse_error(line, "sample needs t or t_ms");
  if (!std::isfinite(env.timestamp.seconds)) parse_error(line, "timestamp must be finite");

  env.source_confidence = optional_number(j, "source_confidence", 1.0, line);
  if (!(env.source_confidence >= 0.0 && env.source_confidence <= 1.0)) {
    invariant_error(line, "source_confidence outside [0,1]");
  }

  switch (kind->second) {
    case StreamKind::kPupilGaze: {
      GazeSample g;
      g.x = number_field(j, "x", line);
      g.y = number_field(j, "y", line);
      if (j.contains("pupil_mm") && !j["pupil_mm"].is_null()) {
        g.pupil_mm = number_field(j, "pupil_mm", line);
        if (*g.pupil_mm < 0.0) invariant_error(line, "pupil diameter must be >= 0");
      }
      g.confidence = optional_number(j, "confidence", 1.0, line);
      env.payload = g;
      break;
    }
    case StreamKind::kRRInterval:
      env.payload = RRSample{number_field(j, "rr_ms", line)};
      break;
    case StreamKind::kPostureLandmarks:
      if (!j.contains("landmarks")) parse_error(line, "posture sample needs landmarks");
      env.payload = parse_pose(j["landmarks"], line);
      break;
    case StreamKind::kNoteScore: {
      NoteScoreSample note;
      if (j.contains("reply")) {
        if (!j["reply"].is_string()) parse_error(line, "reply must be a string");
        rec.note_reply = j["reply"].get<std::string>();
      } else if (j.contains("transcript")) {
        if (!j["transcript"].is_string()) parse_error(line, "transcript must be a string");
        rec.note_transcript = j["transcript"].get<std::string>();
      } else {
        note.correctness = number_field(j, "correctness", line);
        if (j.contains("feedback") && j["feedback"].is_string()) note.feedback_text = j["feedback"].get<std::string>();
      }
      if (j.contains("analyzer") && j["analyzer"].is_string()) note.analyzer_id = j["analyzer"].get<std::string>();
      env.payload = note;
      break;
    }
  }
  return rec;
}

}  // namespace

ScenarioFile parse_scenario(std::istream& in) {
  ScenarioFile scenario;
  std::map<std::string, StreamKind> kinds;
  std::map<std::string, double> last_t;
  bool have_header = false;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) parse_error(line, "not a JSON object");
    if (!j.contains("type") || !j["type"].is_string()) parse_error(line, "record needs a type");
    const auto type = j["type"].get<std::string>();
    try {
      if (type == "header") {
        if (have_header) invariant_error(line, "header must appear exactly once, first");
        scenario.header = parse_header(j, line);
        for (const auto& s : scenario.header.streams) kinds[s.descriptor.stream_id] = s.descriptor.kind;
        have_header = true;
      } else if (type == "sample") {
        if (!have_header) invariant_error(line, "header must come before samples");
        auto rec = parse_sample(j, line, kinds);
        auto [it, fresh] = last_t.try_emplace(rec.envelope.stream_id, rec.envelope.timestamp.seconds);
        if (!fresh) {
          if (rec.envelope.timestamp.seconds < it->second) {
            invariant_error(line, "timestamps decrease within stream '" + rec.envelope.stream_id + "'");
          }
          it->second = rec.envelope.timestamp.seconds;
        }
        scenario.records.push_back(std::move(rec));
      } else {
        parse_error(line, "unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      parse_error(line, e.what());
    }
  }
  if (!have_header) throw Error(ErrorCode::kInvariantViolation, "scenario has no header");
  return scenario;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open scenario " + path.string());
  return parse_scenario(in);
}

void write_scenario(const ScenarioFile& scenario, std::ostream& out) {
  const auto& h = scenario.header;
  json header = {{"type", "header"}, {"seed", h.seed}};
  json streams = json::array();
  std::map<std::string, StreamKind> kinds;
  for (const auto& s : h.streams) {
    json js = {{"id", s.descriptor.stream_id},
               {"kind", std::string(to_string(s.descriptor.kind))},
               {"rate_hz", s.descriptor.nominal_rate_hz}};
    if (!s.sync_marks.empty()) {
      json marks = json::array();
      for (const auto& m : s.sync_marks) marks.push_back({m.producer_t, m.session_t});
      js["sync_marks"] = marks;
    }
    streams.push_back(js);
    kinds[s.descriptor.stream_id] = s.descriptor.kind;
  }
  header["streams"] = streams;
  if (!h.config.empty()) {
    json cfg = json::object();
    for (const auto& [k, v] : h.config) cfg[k] = v;
    header["config"] = cfg;
  }
  if (!h.analyzer_replies.empty()) header["analyzer_replies"] = h.analyzer_replies;
  if (h.calibration) {
    json cal = json::object();
    for (std::size_t i = 0; i < kFeatureChannelCount; ++i) {
      const auto& b = h.calibration->channels[i];
      if (b.calibrated) cal[std::string(to_string(static_cast<FeatureChannel>(i)))] = {{"mu", b.mu}, {"sigma", b.sigma}};
    }
    header["calibration"] = cal;
  }
  if (h.baseline_pose) header["baseline_pose"] = pose_to_json(*h.baseline_pose);
  if (!h.history.empty()) {
    json hist = json::array();
    for (const auto& t : h.history) hist.push_back({{"role", t.role}, {"text", t.text}});
    header["history"] = hist;
  }
  out << header.dump() << '\n';

  for (const auto& rec : scenario.records) {
    const auto& env = rec.envelope;
    json j = {{"type", "sample"}, {"stream", env.stream_id}, {"t", env.timestamp.seconds}};
    if (env.source_confidence != 1.0) j["source_confidence"] = env.source_confidence;
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, GazeSample>) {
            j["x"] = p.x;
            j["y"] = p.y;
            j["pupil_mm"] = p.pupil_mm ? json(*p.pupil_mm) : json(nullptr);
            j["confidence"] = p.confidence;
          } else if constexpr (std::is_same_v<T, RRSample>) {
            j["rr_ms"] = p.rr_ms;
          } else if constexpr (std::is_same_v<T, PostureSample>) {
            j["landmarks"] = pose_to_json(p);
          } else {
            if (rec.note_reply) j["reply"] = *rec.note_reply;
            else if (rec.note_transcript) j["transcript"] = *rec.note_transcript;
            else {
              j["correctness"] = p.correctness;
              if (!p.feedback_text.empty()) j["feedback"] = p.feedback_text;
            }
            if (!p.analyzer_id.empty()) j["analyzer"] = p.analyzer_id;
          }
        },
        env.payload);
    out << j.dump() << '\n';
  }
}

void save_scenario(const ScenarioFile& scenario, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write scenario " + path.string());
  write_scenario(scenario, out);
}

}  // namespace bioloop
