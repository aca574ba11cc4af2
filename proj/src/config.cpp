#include "bioloop/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bioloop/error.hpp"

namespace bioloop {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out)) {
    throw Error(ErrorCode::kConfig,
                "key '" + std::string(key) + "': expected a number, got '" + std::string(value) + "'");
  }
  return out;
}

long long parse_integer(std::string_view key, std::string_view value) {
  long long out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::kConfig,
                "key '" + std::string(key) + "': expected an integer, got '" + std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(ErrorCode::kConfig,
              "key '" + std::string(key) + "': expected a boolean, got '" + std::string(value) + "'");
}

std::vector<std::string_view> split_dots(std::string_view key) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    parts.push_back(key.substr(pos, dot == std::string_view::npos ? dot : dot - pos));
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return parts;
}

[[noreturn]] void unknown_key(std::string_view key) {
  throw Error(ErrorCode::kConfig, "unknown key '" + std::string(key) + "'");
}

}  // namespace

WeightMatrix WeightMatrix::defaults() {
  using D = Dimension;
  using C = FeatureChannel;
  WeightMatrix w;
  w.set(D::kCognitiveLoad, C::kPupilDiameter, 0.5);
  w.set(D::kCognitiveLoad, C::kFixationDuration, 0.3);
  w.set(D::kCognitiveLoad, C::kHeartRate, 0.2);

  w.set(D::kStress, C::kPnn50, 0.4);
  w.set(D::kStress, C::kRmssd, 0.3);
  w.set(D::kStress, C::kHeartRate, 0.3);

  w.set(D::kAttention, C::kGazeVelocity, 0.4);
  w.set(D::kAttention, C::kFixationCount, 0.3);
  w.set(D::kAttention, C::kBlinkRate, 0.3);

  w.set(D::kEngagement, C::kPosture, 0.4);
  w.set(D::kEngagement, C::kPupilDiameter, 0.3);
  w.set(D::kEngagement, C::kFixationDuration, 0.3);

  w.set(D::kUnderstanding, C::kNoteError, 0.7);
  w.set(D::kUnderstanding, C::kFixationDuration, 0.3);

  w.set(D::kFatigue, C::kBlinkRate, 0.4);
  w.set(D::kFatigue, C::kGazeVelocity, 0.3);
  w.set(D::kFatigue, C::kPosture, 0.3);
  return w;
}

double WindowLengths::for_kind(StreamKind kind) const {
  switch (kind) {
    case StreamKind::kPupilGaze: return gaze_s;
    case StreamKind::kRRInterval: return cardio_s;
    case StreamKind::kPostureLandmarks: return posture_s;
    case StreamKind::kNoteScore: return notes_s;
  }
  return gaze_s;
}

std::array<double, kFeatureChannelCount> SessionConfig::sigma_floors() const {
  std::array<double, kFeatureChannelCount> out{};
  for (std::size_t i = 0; i < kFeatureChannelCount; ++i) out[i] = std::max(sigma_floor, channel_sigma_floor[i]);
  return out;
}

ValidationReport validate_config(const SessionConfig& cfg) {
  ValidationReport report;
  auto fail = [&](std::string msg) { report.failures.push_back(std::move(msg)); };
  auto positive = [&](std::string_view name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(std::string(name) + " must be > 0");
  };

  positive("calibration_duration_s", cfg.calibration_duration_s);
  if (cfg.calibration_duration_s > 0.0 && cfg.calibration_duration_s < 60.0) {
    fail("calibration_duration_s below 60 s minimum");
  }
  positive("calibration_hop_s", cfg.calibration_hop_s);
  if (cfg.calibration_min_samples < 2) fail("calibration_min_samples must be >= 2");
  positive("sigma_floor", cfg.sigma_floor);
  for (std::size_t i = 0; i < kFeatureChannelCount; ++i) {
    if (!(cfg.channel_sigma_floor[i] >= 0.0) || !std::isfinite(cfg.channel_sigma_floor[i])) {
      fail("sigma_floor." + std::string(to_string(static_cast<FeatureChannel>(i))) + " must be >= 0");
    }
  }

  positive("window.gaze_s", cfg.window_length.gaze_s);
  positive("window.cardio_s", cfg.window_length.cardio_s);
  positive("window.posture_s", cfg.window_length.posture_s);
  positive("window.notes_s", cfg.window_length.notes_s);
  positive("window_hop_s", cfg.window_hop_s);
  for (auto kind : {StreamKind::kPupilGaze, StreamKind::kRRInterval,
                    StreamKind::kPostureLandmarks, StreamKind::kNoteScore}) {
    if (cfg.window_hop_s > cfg.window_length.for_kind(kind)) {
      fail("window_hop_s exceeds the " + std::string(to_string(kind)) + " window length");
    }
  }
  if (!(cfg.jitter_tolerance_s >= 0.0)) fail("jitter_tolerance_s must be >= 0");

  positive("ivt_velocity_threshold", cfg.ivt_velocity_threshold);
  positive("min_fixation_duration_s", cfg.min_fixation_duration_s);
  if (cfg.rolling_median_width % 2 == 0) fail("rolling_median_width must be odd");
  if (cfg.rolling_median_width < 3) fail("rolling_median_width must be >= 3");
  if (!(cfg.blink_confidence_cutoff >= 0.0 && cfg.blink_confidence_cutoff <= 1.0)) {
    fail("blink_confidence_cutoff must lie in [0,1]");
  }

  positive("posture.shoulder_tilt_deg", cfg.posture.shoulder_tilt_deg);
  positive("posture.neck_offset", cfg.posture.neck_offset);
  positive("posture.trunk_angle_deg", cfg.posture.trunk_angle_deg);

  for (auto d : kAllDimensions) {
    double sum = 0.0;
    bool negative = false;
    for (double w : cfg.weights.row(d)) {
      if (w < 0.0 || !std::isfinite(w)) negative = true;
      sum += w;
    }
    if (negative) fail("weight row " + std::string(to_string(d)) + " has a negative entry");
    if (!(sum > 0.0)) fail("weight row " + std::string(to_string(d)) + " has no positive entry");
  }
  if (!(cfg.quality_floor >= 0.0 && cfg.quality_floor <= 1.0)) {
    fail("quality_floor must lie in [0,1]");
  }

  if (!(cfg.trigger_threshold >= 1.0)) {
    fail("trigger_threshold below moderate-deviation floor 1.0");
  }
  positive("persistence_s", cfg.persistence_s);
  if (cfg.consecutive_windows < 1) fail("consecutive_windows must be >= 1");
  if (!(cfg.confidence_min >= 0.0 && cfg.confidence_min < 1.0)) {
    fail("confidence_min must lie in [0,1)");
  }
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    positive("cooldown." + std::string(to_string(static_cast<Category>(i))), cfg.cooldown_s[i]);
  }
  positive("client_timeout_s", cfg.client_timeout_s);
  return report;
}

void apply_config_entry(SessionConfig& cfg, std::string_view key, std::string_view value) {
  const auto parts = split_dots(key);
  const auto real = [&] { return parse_real(key, value); };
  const auto integer = [&] { return parse_integer(key, value); };

  if (parts.size() == 1) {
    if (key == "calibration_duration_s") cfg.calibration_duration_s = real();
    else if (key == "calibration_hop_s") cfg.calibration_hop_s = real();
    else if (key == "calibration_min_samples") {
      const auto n = integer();
      if (n < 0) throw Error(ErrorCode::kConfig, "calibration_min_samples must be non-negative");
      cfg.calibration_min_samples = static_cast<std::size_t>(n);
    }
    else if (key == "sigma_floor") cfg.sigma_floor = real();
    else if (key == "window_hop_s") cfg.window_hop_s = real();
    else if (key == "jitter_tolerance_s") cfg.jitter_tolerance_s = real();
    else if (key == "ivt_velocity_threshold") cfg.ivt_velocity_threshold = real();
    else if (key == "min_fixation_duration_s") cfg.min_fixation_duration_s = real();
    else if (key == "rolling_median_width") cfg.rolling_median_width = static_cast<int>(integer());
    else if (key == "blink_confidence_cutoff") cfg.blink_confidence_cutoff = real();
    else if (key == "quality_floor") cfg.quality_floor = real();
    else if (key == "trigger_threshold") cfg.trigger_threshold = real();
    else if (key == "persistence_s") cfg.persistence_s = real();
    else if (key == "consecutive_windows") cfg.consecutive_windows = static_cast<int>(integer());
    else if (key == "confidence_min") cfg.confidence_min = real();
    else if (key == "topic") cfg.topic = std::string(value);
    else if (key == "history_turns") {
      const auto n = integer();
      if (n < 0) throw Error(ErrorCode::kConfig, "history_turns must be non-negative");
      cfg.history_turns = static_cast<std::size_t>(n);
    }
    else if (key == "client_timeout_s") cfg.client_timeout_s = real();
    else if (key == "trace_ingest") cfg.trace_ingest = parse_bool(key, value);
    else if (key == "rng_seed") {
      const auto n = integer();
      if (n < 0) throw Error(ErrorCode::kConfig, "rng_seed must be non-negative");
      cfg.rng_seed = static_cast<std::uint64_t>(n);
    }
    else if (key == "modality") {
      auto m = parse_modality(value);
      if (!m) throw Error(ErrorCode::kConfig, "unknown modality '" + std::string(value) + "'");
      cfg.modality = *m;
    }
    else if (key == "client") {
      if (value == "mock") cfg.client = ClientMode::kMock;
      else if (value == "live") cfg.client = ClientMode::kLive;
      else throw Error(ErrorCode::kConfig, "client must be 'mock' or 'live'");
    }
    else unknown_key(key);
    return;
  }

  const auto head = parts[0];
  if (head == "window" && parts.size() == 2) {
    const auto f = parts[1];
    if (f == "gaze_s") cfg.window_length.gaze_s = real();
    else if (f == "cardio_s") cfg.window_length.cardio_s = real();
    else if (f == "posture_s") cfg.window_length.posture_s = real();
    else if (f == "notes_s") cfg.window_length.notes_s = real();
    else unknown_key(key);
  } else if (head == "posture" && parts.size() == 2) {
    const auto f = parts[1];
    if (f == "shoulder_tilt_deg") cfg.posture.shoulder_tilt_deg = real();
    else if (f == "neck_offset") cfg.posture.neck_offset = real();
    else if (f == "trunk_angle_deg") cfg.posture.trunk_angle_deg = real();
    else unknown_key(key);
  } else if (head == "sigma_floor" && parts.size() == 2) {
    auto c = parse_feature_channel(parts[1]);
    if (!c) unknown_key(key);
    cfg.channel_sigma_floor[index_of(*c)] = real();
  } else if (head == "cooldown" && parts.size() == 2) {
    auto c = parse_category(parts[1]);
    if (!c) unknown_key(key);
    cfg.cooldown_s[index_of(*c)] = real();
  } else if (head == "weight" && parts.size() == 3) {
    auto d = parse_dimension(parts[1]);
    auto c = parse_feature_channel(parts[2]);
    if (!d || !c) unknown_key(key);
    cfg.weights.set(*d, *c, real());
  } else if (head == "strategy" && parts.size() == 4) {
    auto d = parse_dimension(parts[1]);
    auto s = parse_severity(parts[2]);
    auto m = parse_modality(parts[3]);
    if (!d || !s || !m || *s == Severity::kNominal) unknown_key(key);
    if (value.empty()) throw Error(ErrorCode::kConfig, "strategy template id must be non-empty");
    cfg.strategy_overrides[{*d, *s, *m}] = std::string(value);
  } else {
    unknown_key(key);
  }
}

SessionConfig parse_config(std::string_view text, SessionConfig base) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      apply_config_entry(base, key, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

SessionConfig load_config(const std::filesystem::path& path, SessionConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

}  // namespace bioloop
