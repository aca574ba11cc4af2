#include "bioloop/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <thread>

#include "bioloop/behavior.hpp"
#include "bioloop/cardio.hpp"
#include "bioloop/directive.hpp"
#include "bioloop/error.hpp"
#include "bioloop/gaze.hpp"
#include "bioloop/intervention.hpp"
#include "bioloop/stream_sync.hpp"

namespace bioloop {

namespace {

using nlohmann::json;

constexpr std::array<StreamKind, kStreamKindCount> kKinds = {
    StreamKind::kPupilGaze, StreamKind::kRRInterval, StreamKind::kPostureLandmarks, StreamKind::kNoteScore};

std::string name(FeatureChannel c) { return std::string(to_string(c)); }

// Features of one window of one stream kind.
struct ChannelWindow {
  Window window;
  std::vector<ChannelFeature> features;
  json payload;
};

class Session {
 public:
  Session(const ScenarioFile& scenario, const SessionConfig& cfg, GenerationClient& client,
          const RunOptions& options)
      : scenario_(scenario),
        cfg_(cfg),
        client_(client),
        options_(options),
        sync_(cfg.jitter_tolerance_s),
        engine_(cfg),
        history_(scenario.header.history) {}

  SessionResult run();

 private:
  void register_streams();
  std::optional<SampleEnvelope> prepare(const ScenarioRecord& rec);
  void after_ingest();
  void calibrate();
  void process_ticks();
  void tick(double t, std::array<Window, kStreamKindCount>& windows);
  ChannelWindow extract(StreamKind kind, const Window& w, double t);
  void decide(const StateVector& state);
  void collect_replies(double t, bool block);
  void record_reply(double t, std::uint64_t request, const std::optional<std::string>& reply);
  void warn(double t, std::string_view source, std::string message);

  const ScenarioFile& scenario_;
  SessionConfig cfg_;
  GenerationClient& client_;
  RunOptions options_;

  StreamSync sync_;
  TraceLog log_;
  InterventionEngine engine_;
  std::vector<Turn> history_;
  std::optional<CompletionQueue> queue_;
  std::uint64_t sync_requests_ = 0;

  std::array<double, kStreamKindCount> nominal_rate_{kGazeRateHz, kHeartRateHz, 1.0, kNoteRateHz};
  std::map<std::string, double> stream_offset_;

  bool calibrated_ = false;
  double calib_end_ = 0.0;
  CalibrationProfile profile_;
  std::optional<PostureSample> baseline_pose_;
  std::array<std::deque<Window>, kStreamKindCount> pending_windows_;
  long long tick_index_ = 0;
};

void Session::warn(double t, std::string_view source, std::string message) {
  log_.emit(t, TraceKind::kWarning, {{"source", std::string(source)}, {"message", std::move(message)}});
}

void Session::register_streams() {
  std::array<bool, kStreamKindCount> rate_set{};
  for (const auto& s : scenario_.header.streams) {
    sync_.register_stream(s.descriptor);
    double offset = 0.0;
    if (!s.sync_marks.empty()) offset = sync_.estimate_offset(s.descriptor.stream_id, s.sync_marks);
    stream_offset_[s.descriptor.stream_id] = offset;
    const auto k = index_of(s.descriptor.kind);
    if (!rate_set[k]) {
      nominal_rate_[k] = s.descriptor.nominal_rate_hz;
      rate_set[k] = true;
    }
  }
}

// Note records are analyzed before ingestion; failures become warnings.
std::optional<SampleEnvelope> Session::prepare(const ScenarioRecord& rec) {
  SampleEnvelope env = rec.envelope;
  const auto* note = std::get_if<NoteScoreSample>(&env.payload);
  if (note == nullptr) return env;

  const double t = env.timestamp.seconds + stream_offset_[env.stream_id];
  try {
    NoteAssessment assessed;
    if (rec.note_transcript) {
      history_.push_back({"learner", *rec.note_transcript});
      auto reply = client_.analyze_note(*rec.note_transcript);
      if (!reply) {
        warn(t, "note-analyzer", "no analyzer reply; note skipped");
        return std::nullopt;
      }
      assessed = ingest_note_assessment(*reply, client_.id());
    } else if (rec.note_reply) {
      assessed = ingest_note_assessment(*rec.note_reply, note->analyzer_id.empty() ? "scenario" : note->analyzer_id);
    } else {
      assessed = ingest_note_assessment(note->correctness, note->feedback_text,
                                        note->analyzer_id.empty() ? "scenario" : note->analyzer_id);
    }
    if (assessed.warning) warn(t, "note-analyzer", *assessed.warning);
    env.payload = std::move(assessed.sample);
    return env;
  } catch (const Error& e) {
    warn(t, "note-analyzer", e.what());
    return std::nullopt;
  }
}

void Session::after_ingest() {
  if (!calibrated_ && sync_.elapsed().seconds >= calib_end_) calibrate();
  if (calibrated_) process_ticks();
}

void Session::calibrate() {
  calibrated_ = true;
  if (scenario_.header.calibration) {
    profile_ = *scenario_.header.calibration;
    baseline_pose_ = scenario_.header.baseline_pose;
    if (!baseline_pose_) warn(0.0, "calibration", "no baseline pose supplied; posture channel disabled");
    return;
  }

  // Baseline pose first: posture windows are scored against it.
  for (auto& w : sync_.pop_windows(StreamKind::kPostureLandmarks, calib_end_, calib_end_, 0.0)) {
    std::vector<PostureSample> poses;
    for (const auto& e : w.samples) poses.push_back(std::get<PostureSample>(e.payload));
    if (!poses.empty()) baseline_pose_ = mean_pose(poses);
  }
  if (scenario_.header.baseline_pose) baseline_pose_ = scenario_.header.baseline_pose;

  CalibrationSet set;
  for (auto kind : kKinds) {
    const double len = cfg_.window_length.for_kind(kind);
    if (len > calib_end_) continue;
    for (auto& w : sync_.pop_windows(kind, len, cfg_.calibration_hop_s, 0.0)) {
      if (w.end.seconds > calib_end_) break;
      for (const auto& f : extract(kind, w, calib_end_).features) {
        if (f.quality < cfg_.quality_floor) continue;
        set[index_of(f.channel)].push_back({f.value, f.quality});
      }
    }
  }
  profile_ = compute_baseline(set, cfg_.calibration_min_samples, cfg_.sigma_floors());
  for (const auto& w : profile_.warnings) warn(calib_end_, "calibration", w);
}

void Session::process_ticks() {
  const double hop = cfg_.window_hop_s;
  for (auto kind : kKinds) {
    const double len = cfg_.window_length.for_kind(kind);
    for (auto& w : sync_.pop_windows(kind, len, hop, calib_end_ + hop - len)) {
      pending_windows_[index_of(kind)].push_back(std::move(w));
    }
  }
  for (;;) {
    for (const auto& q : pending_windows_) {
      if (q.empty()) return;
    }
    std::array<Window, kStreamKindCount> windows;
    for (std::size_t k = 0; k < kStreamKindCount; ++k) {
      windows[k] = std::move(pending_windows_[k].front());
      pending_windows_[k].pop_front();
    }
    ++tick_index_;
    const double t = calib_end_ + static_cast<double>(tick_index_) * hop;
    tick(t, windows);
    double longest = 0.0;
    for (auto kind : kKinds) longest = std::max(longest, cfg_.window_length.for_kind(kind));
    sync_.discard_before(Timestamp{t + hop - longest});
  }
}

ChannelWindow Session::extract(StreamKind kind, const Window& w, double t) {
  ChannelWindow out;
  out.payload = {{"stream_kind", std::string(to_string(kind))},
                 {"start", w.start.seconds},
                 {"end", w.end.seconds},
                 {"samples", w.samples.size()}};
  json features = json::object();
  auto add = [&](FeatureChannel c, const std::optional<double>& v, double q) {
    if (!v) return;
    out.features.push_back({c, *v, q, Timestamp{t}});
    features[name(c)] = *v;
  };
  double quality = 0.0;
  switch (kind) {
    case StreamKind::kPupilGaze: {
      GazeWindowParams params;
      params.ivt = {cfg_.ivt_velocity_threshold, cfg_.min_fixation_duration_s, cfg_.blink_confidence_cutoff};
      params.median_width = cfg_.rolling_median_width;
      params.nominal_rate_hz = nominal_rate_[index_of(kind)];
      const auto g = window_gaze_features(w, params);
      quality = g.quality;
      add(FeatureChannel::kPupilDiameter, g.mean_pupil_mm, quality);
      add(FeatureChannel::kFixationDuration, g.mean_fixation_duration_s, quality);
      add(FeatureChannel::kFixationCount, g.fixation_count, quality);
      add(FeatureChannel::kGazeVelocity, g.mean_gaze_velocity, quality);
      add(FeatureChannel::kBlinkRate, g.blink_rate_per_min, quality);
      break;
    }
    case StreamKind::kRRInterval: {
      const auto h = window_hrv(w);
      quality = h.quality;
      add(FeatureChannel::kHeartRate, h.mean_hr_bpm, quality);
      add(FeatureChannel::kRmssd, h.rmssd_ms, quality);
      add(FeatureChannel::kSdnn, h.sdnn_ms, quality);
      add(FeatureChannel::kPnn50, h.pnn50_percent, quality);
      if (h.pnn50_percent) out.payload["stress_band"] = std::string(to_string(classify_stress(*h.pnn50_percent)));
      break;
    }
    case StreamKind::kPostureLandmarks: {
      if (!baseline_pose_) break;
      const auto p = window_posture(w, *baseline_pose_, cfg_.posture, nominal_rate_[index_of(kind)]);
      quality = p.quality;
      add(FeatureChannel::kPosture, p.mean_percent, quality);
      if (p.mean_percent) out.payload["posture_category"] = std::string(to_string(categorize_posture(*p.mean_percent)));
      break;
    }
    case StreamKind::kNoteScore: {
      const auto n = window_notes(w);
      quality = n.quality;
      std::optional<double> error;
      if (n.mean_correctness) error = 1.0 - *n.mean_correctness;
      add(FeatureChannel::kNoteError, error, quality);
      break;
    }
  }
  out.payload["quality"] = quality;
  out.payload["features"] = std::move(features);
  out.window = w;
  return out;
}

void Session::tick(double t, std::array<Window, kStreamKindCount>& windows) {
  FeatureSet features{};
  for (auto kind : kKinds) {
    const auto& w = windows[index_of(kind)];
    try {
      auto cw = extract(kind, w, t);
      for (const auto& f : cw.features) features[index_of(f.channel)] = f;
      log_.emit(t, TraceKind::kWindowFeatures, std::move(cw.payload));
    } catch (const Error& e) {
      warn(t, to_string(kind), e.what());
    }
  }

  InferenceParams params{cfg_.quality_floor, cfg_.trigger_threshold};
  const auto state = infer_state(features, profile_, cfg_.weights, Timestamp{t}, params);

  json dims = json::object();
  for (auto d : kAllDimensions) {
    const auto& s = state.at(d);
    const auto trig = trigger_input(state, d);
    dims[std::string(to_string(d))] = {
        {"score", s.score},
        {"signed", s.signed_score},
        {"confidence", s.confidence},
        {"descriptor", std::string(to_string(s.descriptor))},
        {"observed", s.observed},
        {"contributing", s.contributing_channels},
        {"trigger", trig.score},
        {"trigger_confidence", trig.confidence},
        {"above", trig.score > cfg_.trigger_threshold && trig.confidence > cfg_.confidence_min}};
  }
  json z = json::object();
  for (std::size_t c = 0; c < kFeatureChannelCount; ++c) {
    if (state.z[c]) z[name(static_cast<FeatureChannel>(c))] = *state.z[c];
  }
  log_.emit(t, TraceKind::kStateVector, {{"hop_s", cfg_.window_hop_s}, {"dims", std::move(dims)}, {"z", std::move(z)}});

  decide(state);
  if (queue_) collect_replies(t, false);
}

void Session::decide(const StateVector& state) {
  const double t = state.t.seconds;
  const auto step = engine_.step(state);
  for (const auto& c : step.candidates) {
    log_.emit(t, TraceKind::kCandidate,
              {{"dimension", std::string(to_string(c.dimension))},
               {"score", c.score},
               {"confidence", c.confidence},
               {"severity", std::string(to_string(c.severity))},
               {"contributing", c.contributing_channels}});
  }
  if (!step.decision) return;
  const auto& d = *step.decision;
  log_.emit(t, TraceKind::kDecision,
            {{"dimension", std::string(to_string(d.dimension))},
             {"severity", std::string(to_string(d.severity))},
             {"category", std::string(to_string(d.category))},
             {"tier", std::string(to_string(d.tier))},
             {"framing", std::string(to_string(d.framing))},
             {"modality", std::string(to_string(d.modality))},
             {"template", d.template_id},
             {"score", d.triggering_score},
             {"confidence", d.confidence},
             {"repeat", d.repeat_count},
             {"contributing", d.contributing_channels}});

  DirectivePacket packet;
  try {
    packet = build_directives(d, describe(state), LearningContext{cfg_.topic, {}});
  } catch (const Error& e) {
    warn(t, "directive", e.what());
    return;
  }
  const auto prompt = render_prompt(packet, history_, cfg_.history_turns);
  const GenerationParams gen{0.0, cfg_.rng_seed};

  std::uint64_t request = 0;
  if (queue_) request = queue_->submit(prompt, gen);
  else request = sync_requests_++;

  log_.emit(t, TraceKind::kDirectiveSent,
            {{"request", request},
             {"dimension", std::string(to_string(d.dimension))},
             {"template", d.template_id},
             {"tone",
              {{"sentence_complexity", std::string(to_string(packet.tone.sentence_complexity))},
               {"encouragement_frequency", std::string(to_string(packet.tone.encouragement_frequency))},
               {"explanation_directness", std::string(to_string(packet.tone.explanation_directness))},
               {"metaphor_usage", std::string(to_string(packet.tone.metaphor_usage))}}},
             {"digest", digest_hex(prompt)},
             {"prompt", prompt}});

  if (!queue_) record_reply(t, request, client_.generate(prompt, gen));
}

void Session::record_reply(double t, std::uint64_t request, const std::optional<std::string>& reply) {
  json payload = {{"client", client_.id()}, {"request", request}};
  if (reply) {
    payload["text"] = *reply;
    history_.push_back({"tutor", *reply});
  } else {
    payload["text"] = nullptr;
  }
  log_.emit(t, TraceKind::kClientReply, std::move(payload));
  if (!reply) warn(t, "client", "generation request " + std::to_string(request) + " produced no reply");
}

void Session::collect_replies(double t, bool block) {
  auto done = block ? queue_->drain() : queue_->poll();
  for (const auto& c : done) record_reply(t, c.request_id, c.reply);
}

SessionResult Session::run() {
  if (const auto report = validate_config(cfg_); !report.ok()) {
    std::string msg = "invalid configuration:";
    for (const auto& f : report.failures) msg += "\n  " + f;
    throw Error(ErrorCode::kConfig, msg);
  }
  register_streams();
  if (options_.async_client) queue_.emplace(client_);
  calib_end_ = scenario_.header.calibration ? 0.0 : cfg_.calibration_duration_s;
  if (scenario_.header.calibration) calibrate();

  const auto wall_start = std::chrono::steady_clock::now();
  double horizon = 0.0;
  for (const auto& rec : scenario_.records) {
    auto env = prepare(rec);
    if (!env) continue;
    const double session_t = env->timestamp.seconds + stream_offset_[env->stream_id];
    horizon = std::max(horizon, session_t);
    if (options_.realtime) {
      std::this_thread::sleep_until(wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                     std::chrono::duration<double>(session_t)));
    }
    const auto outcome = sync_.ingest(std::move(*env));
    if (cfg_.trace_ingest || outcome != IngestOutcome::kAccepted) {
      log_.emit(session_t, TraceKind::kIngest,
                {{"stream", rec.envelope.stream_id},
                 {"outcome", std::string(to_string(outcome))},
                 {"line", rec.line}});
    }
    after_ingest();
  }
  sync_.finish(Timestamp{horizon});
  after_ingest();
  if (!calibrated_) {
    throw Error(ErrorCode::kUncalibrated, "timeline ends at " + std::to_string(horizon) +
                                              " s, before calibration completes at " +
                                              std::to_string(calib_end_) + " s");
  }
  if (queue_) collect_replies(horizon, true);

  SessionResult result;
  result.trace = log_.sorted();
  result.summary = summarize(result.trace);
  result.calibration = profile_;
  result.history = history_;
  return result;
}

}  // namespace

SessionConfig config_from_header(const ScenarioHeader& header, SessionConfig base) {
  base.rng_seed = header.seed;
  for (const auto& [key, value] : header.config) apply_config_entry(base, key, value);
  return base;
}

SessionResult run_session(const ScenarioFile& scenario, const SessionConfig& cfg, GenerationClient& client,
                          const RunOptions& options) {
  Session session(scenario, cfg, client, options);
  return session.run();
}

}  // namespace bioloop
