#pragma once

// Posture scoring from pre-extracted upper-body landmarks, and validation of
// note-analyzer assessments.

#include <optional>
#include <string>
#include <string_view>

#include "bioloop/config.hpp"
#include "bioloop/core.hpp"
#include "bioloop/stream_sync.hpp"

namespace bioloop {

inline constexpr double kLandmarkVisibleAt = 0.5;

enum class PostureCategory { kIdeal, kAverage, kBelowAverage, kPoor };
std::string_view to_string(PostureCategory c);

struct PostureScore {
  double percent = 100.0;
  PostureCategory category = PostureCategory::kIdeal;
  double shoulder_level = 100.0;
  std::optional<double> neck_alignment;     // needs an ear in both poses
  std::optional<double> back_straightness;  // needs a hip in both poses
};

// >=90 Ideal, [75,90) Average, [60,75) BelowAverage, <60 Poor.
// Throws kOutOfRange outside [0,100].
PostureCategory categorize_posture(double percent);

// Each sub-score is 100 * max(0, 1 - deviation / tolerance) where the
// deviations are measured against the baseline pose:
//   shoulder level     tilt of the shoulder line, degrees
//   neck alignment     horizontal ear-midpoint offset from the shoulder midpoint
//   back straightness  angle of the shoulder-to-hip axis from vertical, degrees
// The percent is the mean of the available sub-scores.
// Throws kMissingLandmarks when either pose lacks visible shoulders.
PostureScore score_posture(const PostureSample& sample, const PostureSample& baseline,
                           const PostureTolerances& tol = {});

// Per-landmark mean of a set of poses (visibility averaged as well).
PostureSample mean_pose(std::span<const PostureSample> poses);

struct NoteAssessment {
  NoteScoreSample sample;
  std::optional<std::string> warning;  // set when the score had to be clamped
};

// Accepts `score=<float>; feedback=<text>`. Scores outside [0,1] are
// clamped with a warning; a missing or non-numeric score throws
// kMalformedReply.
NoteAssessment ingest_note_assessment(std::string_view raw_reply, std::string analyzer_id = "mock");
NoteAssessment ingest_note_assessment(double score, std::string feedback, std::string analyzer_id = "mock");

struct PostureFeatures {
  Timestamp start;
  Timestamp end;
  std::size_t scored = 0;
  std::optional<double> mean_percent;
  double quality = 0.0;
};

PostureFeatures window_posture(const Window& window, const PostureSample& baseline,
                               const PostureTolerances& tol, double nominal_rate_hz);

struct NoteFeatures {
  Timestamp start;
  Timestamp end;
  std::size_t count = 0;
  std::optional<double> mean_correctness;
  double quality = 0.0;
};

NoteFeatures window_notes(const Window& window);

}  // namespace bioloop
