#include "bioloop/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "bioloop/error.hpp"

namespace bioloop {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view text, const std::array<std::string_view, N>& names) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == text) return static_cast<E>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, kStreamKindCount> kStreamKindNames = {
    "PupilGaze", "RRInterval", "PostureLandmarks", "NoteScore"};

constexpr std::array<std::string_view, kLandmarkCount> kLandmarkNames = {
    "shoulder_left", "shoulder_right", "ear_left", "ear_right", "hip_left", "hip_right"};

constexpr std::array<std::string_view, kDimensionCount> kDimensionNames = {
    "CognitiveLoad", "Attention", "Engagement", "Understanding", "Stress", "Fatigue"};

constexpr std::array<std::string_view, kFeatureChannelCount> kChannelNames = {
    "pupil_diameter", "fixation_duration", "fixation_count", "gaze_velocity",
    "blink_rate",     "heart_rate",        "rmssd",          "sdnn",
    "pnn50",          "posture",           "note_error"};

constexpr std::array<std::string_view, 3> kSeverityNames = {"Nominal", "Moderate", "Pronounced"};

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "CognitiveAttentional", "Physiological", "ComprehensionOriented", "ChallengeEnhancement"};

constexpr std::array<std::string_view, 3> kTierNames = {"Micro", "Meso", "Macro"};
constexpr std::array<std::string_view, 2> kFramingNames = {"Implicit", "Explicit"};
constexpr std::array<std::string_view, kModalityCount> kModalityNames = {"Text", "Image", "Audio",
                                                                         "Video"};

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kDuplicateStream: return "DuplicateStream";
    case ErrorCode::kUnknownStream: return "UnknownStream";
    case ErrorCode::kInsufficientMarks: return "InsufficientMarks";
    case ErrorCode::kZeroDt: return "ZeroDt";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kTooFewIntervals: return "TooFewIntervals";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kMissingLandmarks: return "MissingLandmarks";
    case ErrorCode::kMalformedReply: return "MalformedReply";
    case ErrorCode::kUncalibrated: return "Uncalibrated";
    case ErrorCode::kNoUsableChannels: return "NoUsableChannels";
    case ErrorCode::kNonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::kUnknownTemplate: return "UnknownTemplate";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(StreamKind kind) { return kStreamKindNames[index_of(kind)]; }
std::optional<StreamKind> parse_stream_kind(std::string_view text) {
  return lookup<StreamKind>(text, kStreamKindNames);
}

void StreamDescriptor::validate() const {
  if (stream_id.empty()) throw Error(ErrorCode::kInvalidArgument, "stream_id must be non-empty");
  if (!(nominal_rate_hz > 0.0) || !std::isfinite(nominal_rate_hz)) {
    throw Error(ErrorCode::kInvalidArgument,
                "stream '" + stream_id + "': nominal_rate_hz must be > 0");
  }
}

std::string_view to_string(Landmark landmark) { return kLandmarkNames[index_of(landmark)]; }

StreamKind payload_kind(const Payload& payload) {
  return static_cast<StreamKind>(payload.index());
}

std::strong_ordering compare_envelopes(const SampleEnvelope& a, const SampleEnvelope& b) {
  if (a.timestamp.seconds < b.timestamp.seconds) return std::strong_ordering::less;
  if (a.timestamp.seconds > b.timestamp.seconds) return std::strong_ordering::greater;
  if (auto c = a.stream_id <=> b.stream_id; c != 0) return c;
  return a.sequence <=> b.sequence;
}

std::string_view to_string(Dimension d) { return kDimensionNames[index_of(d)]; }
std::optional<Dimension> parse_dimension(std::string_view text) {
  if (auto d = lookup<Dimension>(text, kDimensionNames)) return d;
  // Config keys use snake case: weight.cognitive_load.pupil_diameter
  static constexpr std::array<std::string_view, kDimensionCount> snake = {
      "cognitive_load", "attention", "engagement", "understanding", "stress", "fatigue"};
  return lookup<Dimension>(lowercase(text), snake);
}

std::string_view to_string(FeatureChannel c) { return kChannelNames[index_of(c)]; }
std::optional<FeatureChannel> parse_feature_channel(std::string_view text) {
  return lookup<FeatureChannel>(text, kChannelNames);
}

StreamKind source_stream(FeatureChannel c) {
  switch (c) {
    case FeatureChannel::kPupilDiameter:
    case FeatureChannel::kFixationDuration:
    case FeatureChannel::kFixationCount:
    case FeatureChannel::kGazeVelocity:
    case FeatureChannel::kBlinkRate:
      return StreamKind::kPupilGaze;
    case FeatureChannel::kHeartRate:
    case FeatureChannel::kRmssd:
    case FeatureChannel::kSdnn:
    case FeatureChannel::kPnn50:
      return StreamKind::kRRInterval;
    case FeatureChannel::kPosture:
      return StreamKind::kPostureLandmarks;
    case FeatureChannel::kNoteError:
      return StreamKind::kNoteScore;
  }
  return StreamKind::kPupilGaze;
}

std::string_view to_string(Severity s) { return kSeverityNames[index_of(s)]; }
std::optional<Severity> parse_severity(std::string_view text) {
  if (auto s = lookup<Severity>(text, kSeverityNames)) return s;
  static constexpr std::array<std::string_view, 3> lower = {"nominal", "moderate", "pronounced"};
  return lookup<Severity>(lowercase(text), lower);
}

std::string_view to_string(Category c) { return kCategoryNames[index_of(c)]; }
std::optional<Category> parse_category(std::string_view text) {
  if (auto c = lookup<Category>(text, kCategoryNames)) return c;
  static constexpr std::array<std::string_view, kCategoryCount> snake = {
      "cognitive_attentional", "physiological", "comprehension_oriented",
      "challenge_enhancement"};
  return lookup<Category>(lowercase(text), snake);
}

std::string_view to_string(Tier t) { return kTierNames[index_of(t)]; }
std::string_view to_string(Framing f) { return kFramingNames[index_of(f)]; }

std::string_view to_string(Modality m) { return kModalityNames[index_of(m)]; }
std::optional<Modality> parse_modality(std::string_view text) {
  if (auto m = lookup<Modality>(text, kModalityNames)) return m;
  static constexpr std::array<std::string_view, kModalityCount> lower = {"text", "image",
                                                                         "audio", "video"};
  return lookup<Modality>(lowercase(text), lower);
}

}  // namespace bioloop
