#pragma once

// Shared value types for every pipeline stage. Everything here is an
// immutable-by-convention value that is safe to copy across threads.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace bioloop {

// Seconds since the session epoch.
struct Timestamp {
  double seconds = 0.0;

  constexpr Timestamp() = default;
  constexpr explicit Timestamp(double s) : seconds(s) {}

  friend constexpr bool operator==(Timestamp a, Timestamp b) { return a.seconds == b.seconds; }
  friend constexpr bool operator<(Timestamp a, Timestamp b) { return a.seconds < b.seconds; }
  friend constexpr bool operator<=(Timestamp a, Timestamp b) { return a.seconds <= b.seconds; }
  friend constexpr bool operator>(Timestamp a, Timestamp b) { return a.seconds > b.seconds; }
  friend constexpr bool operator>=(Timestamp a, Timestamp b) { return a.seconds >= b.seconds; }
};

enum class StreamKind { kPupilGaze, kRRInterval, kPostureLandmarks, kNoteScore };
inline constexpr std::size_t kStreamKindCount = 4;

std::string_view to_string(StreamKind kind);
std::optional<StreamKind> parse_stream_kind(std::string_view text);

struct StreamDescriptor {
  std::string stream_id;
  StreamKind kind = StreamKind::kPupilGaze;
  double nominal_rate_hz = 1.0;

  // Throws Error(kInvalidArgument) on an empty id or a non-positive rate.
  void validate() const;
};

// Nominal producer rates of the reference sensor setup.
inline constexpr double kGazeRateHz = 60.0;
inline constexpr double kHeartRateHz = 200.0;
inline constexpr double kNoteRateHz = 1.0 / 60.0;

struct GazeSample {
  double x = 0.0;  // screen-normalized [0,1]
  double y = 0.0;
  std::optional<double> pupil_mm;  // absent during a blink
  double confidence = 1.0;
};

struct RRSample {
  double rr_ms = 0.0;
};

enum class Landmark : std::size_t {
  kShoulderLeft,
  kShoulderRight,
  kEarLeft,
  kEarRight,
  kHipLeft,
  kHipRight,
};
inline constexpr std::size_t kLandmarkCount = 6;

std::string_view to_string(Landmark landmark);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct PostureSample {
  std::array<Point2, kLandmarkCount> points{};
  std::array<double, kLandmarkCount> visibility{};

  const Point2& at(Landmark l) const { return points[static_cast<std::size_t>(l)]; }
  Point2& at(Landmark l) { return points[static_cast<std::size_t>(l)]; }
  double visibility_of(Landmark l) const { return visibility[static_cast<std::size_t>(l)]; }
};

struct NoteScoreSample {
  double correctness = 0.0;
  std::string feedback_text;
  std::string analyzer_id;
};

using Payload = std::variant<GazeSample, RRSample, PostureSample, NoteScoreSample>;

StreamKind payload_kind(const Payload& payload);

struct SampleEnvelope {
  std::string stream_id;
  Timestamp timestamp;
  Payload payload;
  double source_confidence = 1.0;
  std::uint64_t sequence = 0;  // assigned at ingestion
};

// Total order used for every merge: timestamp, then stream id, then
// ingestion sequence number.
std::strong_ordering compare_envelopes(const SampleEnvelope& a, const SampleEnvelope& b);

struct EnvelopeLess {
  bool operator()(const SampleEnvelope& a, const SampleEnvelope& b) const {
    return compare_envelopes(a, b) < 0;
  }
};

// ---------------------------------------------------------------------------
// Inference vocabulary

enum class Dimension : std::size_t {
  kCognitiveLoad,
  kAttention,
  kEngagement,
  kUnderstanding,
  kStress,
  kFatigue,
};
inline constexpr std::size_t kDimensionCount = 6;
inline constexpr std::array<Dimension, kDimensionCount> kAllDimensions = {
    Dimension::kCognitiveLoad, Dimension::kAttention, Dimension::kEngagement,
    Dimension::kUnderstanding, Dimension::kStress,    Dimension::kFatigue,
};

std::string_view to_string(Dimension d);
std::optional<Dimension> parse_dimension(std::string_view text);

// Per-window features that feed the z-normalization.
enum class FeatureChannel : std::size_t {
  kPupilDiameter,
  kFixationDuration,
  kFixationCount,
  kGazeVelocity,
  kBlinkRate,
  kHeartRate,
  kRmssd,
  kSdnn,
  kPnn50,
  kPosture,
  kNoteError,  // 1 - correctness, so larger means a bigger comprehension gap
};
inline constexpr std::size_t kFeatureChannelCount = 11;

std::string_view to_string(FeatureChannel c);
std::optional<FeatureChannel> parse_feature_channel(std::string_view text);
StreamKind source_stream(FeatureChannel c);

enum class Severity { kNominal, kModerate, kPronounced };
std::string_view to_string(Severity s);
std::optional<Severity> parse_severity(std::string_view text);

enum class Category {
  kCognitiveAttentional,
  kPhysiological,
  kComprehensionOriented,
  kChallengeEnhancement,
};
inline constexpr std::size_t kCategoryCount = 4;
std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view text);

enum class Tier { kMicro, kMeso, kMacro };
std::string_view to_string(Tier t);

enum class Framing { kImplicit, kExplicit };
std::string_view to_string(Framing f);

enum class Modality { kText, kImage, kAudio, kVideo };
inline constexpr std::size_t kModalityCount = 4;
inline constexpr std::array<Modality, kModalityCount> kAllModalities = {
    Modality::kText, Modality::kImage, Modality::kAudio, Modality::kVideo};
std::string_view to_string(Modality m);
std::optional<Modality> parse_modality(std::string_view text);

template <typename E>
constexpr std::size_t index_of(E e) {
  return static_cast<std::size_t>(e);
}

}  // namespace bioloop
