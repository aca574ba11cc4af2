#include "bioloop/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "bioloop/error.hpp"
#include "bioloop/random.hpp"

namespace bioloop {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kSynthChannelCount> kChannelNames = {
    "pupil_mm", "fixation_dwell_s", "blink_rate_per_min", "rr_mean_ms",
    "rr_diff_sd_ms", "slouch", "note_correctness"};

// Random substreams.
constexpr std::uint64_t kNoiseStream = 0;  // + channel index
constexpr std::uint64_t kGazeStream = 100;
constexpr std::uint64_t kHeartStream = 101;
constexpr std::uint64_t kPostureStream = 102;

constexpr double kPosturePeriodS = 1.0;
constexpr double kNoteFirstS = 30.0;
constexpr double kNotePeriodS = 60.0;

constexpr int kSaccadeSteps = 4;
constexpr double kMinSaccadeDistance = 0.15;
constexpr double kMinDwellS = 0.15;
constexpr int kBlinkSamples = 6;
constexpr double kFixationJitter = 0.001;
constexpr double kPupilSampleNoiseMm = 0.02;
constexpr double kLandmarkNoise = 0.001;

double round_to(double v, double step) { return std::round(v / step) * step; }

double sum_durations(const std::vector<Segment>& segments) {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration_s;
  return total;
}

double eval(const Generator& g, double g0, double tau) {
  switch (g.kind) {
    case Generator::Kind::kBaseline: return 0.0;
    case Generator::Kind::kRamp: return g.target_z + (g0 - g.target_z) * std::exp(-tau / g.tau_s);
    case Generator::Kind::kOscillation:
      return g.amplitude_z * std::sin(2.0 * std::numbers::pi * tau / g.period_s);
  }
  return 0.0;
}

// g(t) for one channel, carrying the end value of each segment into the next.
double latent_z(const SyntheticProfile& p, SynthChannel c, double t) {
  double g = 0.0;
  double start = 0.0;
  for (const auto& seg : p.segments) {
    const auto& gen = seg.generators[static_cast<std::size_t>(c)];
    if (t < start + seg.duration_s) return eval(gen, g, std::max(0.0, t - start));
    g = eval(gen, g, seg.duration_s);
    start += seg.duration_s;
  }
  return g;
}

Generator parse_generator(const json& j) {
  Generator g;
  const auto type = j.value("type", std::string("baseline"));
  if (type == "baseline") {
    g.kind = Generator::Kind::kBaseline;
  } else if (type == "ramp") {
    g.kind = Generator::Kind::kRamp;
    g.target_z = j.at("target_z").get<double>();
    g.tau_s = j.value("tau_s", 1.0);
  } else if (type == "oscillation") {
    g.kind = Generator::Kind::kOscillation;
    g.amplitude_z = j.at("amplitude_z").get<double>();
    g.period_s = j.at("period_s").get<double>();
  } else {
    throw Error(ErrorCode::kParse, "unknown generator type '" + type + "'");
  }
  return g;
}

SynthChannel channel_or_throw(const std::string& name) {
  auto c = parse_synth_channel(name);
  if (!c) throw Error(ErrorCode::kParse, "unknown synthetic channel '" + name + "'");
  return *c;
}

struct Pending {
  double session_t;
  int stream_rank;
  ScenarioRecord record;
};

PostureSample ideal_pose() {
  PostureSample p;
  p.at(Landmark::kShoulderLeft) = {0.40, 0.50};
  p.at(Landmark::kShoulderRight) = {0.60, 0.50};
  p.at(Landmark::kEarLeft) = {0.45, 0.30};
  p.at(Landmark::kEarRight) = {0.55, 0.30};
  p.at(Landmark::kHipLeft) = {0.42, 0.85};
  p.at(Landmark::kHipRight) = {0.58, 0.85};
  p.visibility.fill(1.0);
  return p;
}

std::string note_feedback(double score) {
  if (score >= 0.8) return "Solid work; the reasoning is complete.";
  if (score >= 0.5) return "Partially correct; review the key step.";
  return "Several misconceptions; revisit the definitions.";
}

}  // namespace

std::string_view to_string(SynthChannel c) { return kChannelNames[static_cast<std::size_t>(c)]; }

std::optional<SynthChannel> parse_synth_channel(std::string_view text) {
  for (std::size_t i = 0; i < kSynthChannelCount; ++i) {
    if (kChannelNames[i] == text) return static_cast<SynthChannel>(i);
  }
  return std::nullopt;
}

std::array<ChannelSpec, kSynthChannelCount> default_channel_specs() {
  return {{
      {3.5, 0.25, 0.08},    // pupil_mm
      {0.35, 0.08, 0.03},   // fixation_dwell_s
      {15.0, 5.0, 2.0},     // blink_rate_per_min
      {800.0, 40.0, 10.0},  // rr_mean_ms
      {60.0, 12.0, 3.0},    // rr_diff_sd_ms
      {0.0, 0.25, 0.05},    // slouch
      {0.85, 0.05, 0.02},   // note_correctness
  }};
}

double SyntheticProfile::duration_s() const { return sum_durations(segments); }

void validate_profile(const SyntheticProfile& profile) {
  if (profile.segments.empty()) throw Error(ErrorCode::kInvalidArgument, "profile has no segments");
  for (std::size_t i = 0; i < profile.segments.size(); ++i) {
    const auto& seg = profile.segments[i];
    const auto where = "segment " + std::to_string(i) + (seg.label.empty() ? "" : " (" + seg.label + ")");
    if (!(seg.duration_s > 0.0)) throw Error(ErrorCode::kInvalidArgument, where + ": duration must be > 0");
    for (const auto& g : seg.generators) {
      if (g.kind == Generator::Kind::kRamp && !(g.tau_s > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, where + ": ramp tau must be > 0");
      }
      if (g.kind == Generator::Kind::kOscillation && !(g.period_s > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, where + ": oscillation period must be > 0");
      }
    }
  }
  for (const auto& c : profile.channels) {
    if (!(c.sd >= 0.0) || !(c.noise_sd >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "channel spreads must be >= 0");
    }
  }
  if (!(profile.sample_noise_scale >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sample_noise_scale must be >= 0");
  }
}

SyntheticProfile parse_profile(std::string_view json_text) {
  const json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kParse, "profile is not a JSON object");
  SyntheticProfile p;
  try {
    if (j.contains("seed")) p.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("channels")) {
      for (const auto& [name, spec] : j["channels"].items()) {
        auto& c = p.channels[static_cast<std::size_t>(channel_or_throw(name))];
        c.mean = spec.value("mean", c.mean);
        c.sd = spec.value("sd", c.sd);
        c.noise_sd = spec.value("noise_sd", c.noise_sd);
      }
    }
    if (j.contains("config")) {
      for (const auto& [key, value] : j["config"].items()) {
        p.config.emplace_back(key, value.is_string() ? value.get<std::string>() : value.dump());
      }
    }
    p.heart_clock_offset_s = j.value("heart_clock_offset_s", 0.0);
    p.sample_noise_scale = j.value("sample_noise_scale", 1.0);
    for (const auto& s : j.at("segments")) {
      Segment seg;
      seg.label = s.value("label", std::string());
      seg.duration_s = s.at("duration_s").get<double>();
      if (s.contains("generators")) {
        for (const auto& [name, gen] : s["generators"].items()) {
          seg.generators[static_cast<std::size_t>(channel_or_throw(name))] = parse_generator(gen);
        }
      }
      p.segments.push_back(std::move(seg));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("profile: ") + e.what());
  }
  validate_profile(p);
  return p;
}

SyntheticProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open profile " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_profile(buf.str());
}

double latent_level(const SyntheticProfile& profile, SynthChannel c, double t) {
  const auto& spec = profile.channels[static_cast<std::size_t>(c)];
  return spec.mean + spec.sd * latent_z(profile, c, t);
}

LevelTrack::LevelTrack(const SyntheticProfile& profile) : profile_(&profile) {
  const auto seconds = static_cast<std::size_t>(std::ceil(profile.duration_s())) + 1;
  for (std::size_t c = 0; c < kSynthChannelCount; ++c) {
    Rng rng(derive_seed(profile.seed, kNoiseStream + c));
    noise_[c].resize(seconds);
    for (auto& e : noise_[c]) e = rng.normal();
  }
}

double LevelTrack::level(SynthChannel c, double t) const {
  const auto& noise = noise_[static_cast<std::size_t>(c)];
  const auto idx = std::min(noise.size() - 1, static_cast<std::size_t>(std::max(0.0, std::floor(t))));
  return latent_level(*profile_, c, t) + profile_->channels[static_cast<std::size_t>(c)].noise_sd * noise[idx];
}

ScenarioFile synthesize(const SyntheticProfile& profile) {
  validate_profile(profile);
  const double duration = profile.duration_s();
  const LevelTrack levels(profile);
  const double noise_scale = profile.sample_noise_scale;

  ScenarioFile out;
  out.header.seed = profile.seed;
  out.header.config = profile.config;
  out.header.streams.push_back({{"gaze", StreamKind::kPupilGaze, kGazeRateHz}, {}});
  ScenarioStream heart{{"heart", StreamKind::kRRInterval, kHeartRateHz}, {}};
  if (profile.heart_clock_offset_s != 0.0) {
    for (double s : {0.0, duration / 2.0, duration}) {
      heart.sync_marks.push_back({s + profile.heart_clock_offset_s, s});
    }
  }
  out.header.streams.push_back(std::move(heart));
  out.header.streams.push_back({{"posture", StreamKind::kPostureLandmarks, 1.0 / kPosturePeriodS}, {}});
  out.header.streams.push_back({{"notes", StreamKind::kNoteScore, kNoteRateHz}, {}});

  std::vector<Pending> pending;
  auto emit = [&](double session_t, int rank, const std::string& stream, double producer_t, Payload payload) {
    ScenarioRecord rec;
    rec.envelope.stream_id = stream;
    rec.envelope.timestamp = Timestamp{producer_t};
    rec.envelope.payload = std::move(payload);
    pending.push_back({session_t, rank, std::move(rec)});
  };

  // Gaze: dwell / saccade state machine with Poisson blinks.
  {
    Rng rng(derive_seed(profile.seed, kGazeStream));
    auto pick_target = [&](Point2 from) {
      for (;;) {
        Point2 p{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
        if (std::hypot(p.x - from.x, p.y - from.y) >= kMinSaccadeDistance) return p;
      }
    };
    Point2 fix{0.5, 0.5};
    Point2 sacc_from = fix;
    int dwell_left = 0;
    int sacc_step = -1;  // -1 while dwelling
    int blink_left = 0;
    auto blink_rate = [&](double t) { return std::max(1e-3, levels.level(SynthChannel::kBlinkRatePerMin, t)) / 60.0; };
    double next_blink = rng.exponential(blink_rate(0.0));

    const auto n = static_cast<long long>(std::floor(duration * kGazeRateHz));
    for (long long k = 0; k < n; ++k) {
      const double t = round_to(static_cast<double>(k) / kGazeRateHz, 1e-6);
      if (sacc_step < 0 && dwell_left == 0) {
        const double mean_dwell = levels.level(SynthChannel::kFixationDwellS, t);
        const double d = std::max(kMinDwellS, mean_dwell * (0.6 + 0.8 * rng.uniform()));
        dwell_left = static_cast<int>(std::lround(d * kGazeRateHz));
      }

      Point2 pos;
      if (sacc_step >= 0) {
        const double f = static_cast<double>(sacc_step + 1) / kSaccadeSteps;
        pos = {sacc_from.x + (fix.x - sacc_from.x) * f, sacc_from.y + (fix.y - sacc_from.y) * f};
        if (++sacc_step == kSaccadeSteps) sacc_step = -1;
      } else {
        pos = {fix.x + rng.normal(0.0, kFixationJitter), fix.y + rng.normal(0.0, kFixationJitter)};
        if (blink_left == 0 && t >= next_blink) {
          blink_left = kBlinkSamples;
          next_blink = t + rng.exponential(blink_rate(t));
        }
        if (--dwell_left == 0) {
          sacc_from = fix;
          fix = pick_target(fix);
          sacc_step = 0;
        }
      }

      GazeSample g;
      g.x = round_to(pos.x, 1e-5);
      g.y = round_to(pos.y, 1e-5);
      const double pupil_noise = rng.normal(0.0, kPupilSampleNoiseMm);
      const double conf = rng.uniform(0.9, 1.0);
      if (blink_left > 0) {
        --blink_left;
        g.confidence = 0.05;
      } else {
        g.pupil_mm = round_to(std::max(0.5, levels.level(SynthChannel::kPupilMm, t) + noise_scale * pupil_noise), 1e-4);
        g.confidence = round_to(conf, 1e-3);
      }
      emit(t, 0, "gaze", t, g);
    }
  }

  // Heart: beat-to-beat intervals.
  {
    Rng rng(derive_seed(profile.seed, kHeartStream));
    double t = 0.0;
    for (;;) {
      const double mean = levels.level(SynthChannel::kRrMeanMs, t);
      const double diff_sd = std::max(1.0, levels.level(SynthChannel::kRrDiffSdMs, t));
      const double rr = std::clamp(mean + rng.normal(0.0, diff_sd / std::numbers::sqrt2), 300.0, 2000.0);
      t += rr / 1000.0;
      if (t >= duration) break;
      const double session_t = round_to(t, 1e-6);
      emit(session_t, 1, "heart", round_to(session_t + profile.heart_clock_offset_s, 1e-6),
           RRSample{round_to(rr, 0.1)});
    }
  }

  // Posture: ideal pose bent by the slouch level.
  {
    Rng rng(derive_seed(profile.seed, kPostureStream));
    const auto base = ideal_pose();
    PostureTolerances tol;
    const auto n = static_cast<long long>(std::floor(duration / kPosturePeriodS));
    for (long long k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) * kPosturePeriodS;
      const double s = levels.level(SynthChannel::kSlouch, t);
      PostureSample p = base;
      const double deg = std::numbers::pi / 180.0;
      const double tilt = 0.2 * std::tan(0.5 * s * tol.shoulder_tilt_deg * deg);
      const double lean = 0.35 * std::tan(s * tol.trunk_angle_deg * deg);
      p.at(Landmark::kShoulderRight).y += tilt;
      p.at(Landmark::kShoulderLeft).x += lean;
      p.at(Landmark::kShoulderRight).x += lean;
      p.at(Landmark::kEarLeft).x += lean + s * tol.neck_offset;
      p.at(Landmark::kEarRight).x += lean + s * tol.neck_offset;
      for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        const double nx = rng.normal(0.0, kLandmarkNoise);
        const double ny = rng.normal(0.0, kLandmarkNoise);
        p.points[i].x = round_to(std::clamp(p.points[i].x + noise_scale * nx, 0.0, 1.0), 1e-5);
        p.points[i].y = round_to(std::clamp(p.points[i].y + noise_scale * ny, 0.0, 1.0), 1e-5);
        p.visibility[i] = round_to(rng.uniform(0.95, 1.0), 1e-3);
      }
      emit(t, 2, "posture", t, p);
    }
  }

  // Notes: one analyzed exercise per minute.
  for (double t = kNoteFirstS; t < duration; t += kNotePeriodS) {
    const double score = std::clamp(levels.level(SynthChannel::kNoteCorrectness, t), 0.0, 1.0);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", score);
    ScenarioRecord rec;
    rec.envelope.stream_id = "notes";
    rec.envelope.timestamp = Timestamp{t};
    rec.envelope.payload = NoteScoreSample{};
    rec.note_reply = std::string("score=") + buf + "; feedback=" + note_feedback(score);
    pending.push_back({t, 3, std::move(rec)});
  }

  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    if (a.session_t != b.session_t) return a.session_t < b.session_t;
    return a.stream_rank < b.stream_rank;
  });
  out.records.reserve(pending.size());
  for (auto& p : pending) out.records.push_back(std::move(p.record));
  return out;
}

}  // namespace bioloop
