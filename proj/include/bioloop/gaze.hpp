#pragma once

// Pupil/gaze processing: blink flagging, rolling-median despiking,
// velocity-threshold (I-VT) fixation detection and per-window features.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bioloop/core.hpp"
#include "bioloop/stream_sync.hpp"

namespace bioloop {

struct TimedGaze {
  Timestamp t;
  GazeSample sample;
};

// A sample is a blink when the pupil is absent or non-positive, or the
// tracker confidence falls below the cutoff.
bool is_blink(const GazeSample& s, double confidence_cutoff);

struct BlinkEvent {
  std::size_t first = 0;  // inclusive sample indices
  std::size_t last = 0;
};

struct DespikeResult {
  std::vector<GazeSample> samples;  // same length as the input
  std::vector<bool> blink;
  std::vector<BlinkEvent> blinks;
};

// Flags blink runs, then replaces every remaining pupil value with the
// centered median of the non-blink series. Near the edges the window
// shrinks symmetrically. Blink samples keep an absent pupil.
// Throws kInvalidArgument unless median_width is odd and >= 3.
DespikeResult despike_pupil(std::span<const GazeSample> samples, int median_width,
                            double blink_confidence_cutoff = 0.2);

// sqrt(dx^2 + dy^2) / dt in normalized units per second. Throws kZeroDt
// when dt <= 0.
double gaze_velocity(const TimedGaze& prev, const TimedGaze& cur);

enum class GazeLabel { kFixation, kSaccade, kBlink, kUnclassified };

struct FixationEvent {
  std::size_t first = 0;
  std::size_t last = 0;
  Timestamp start;
  Timestamp end;
  Point2 centroid;
  double dispersion = 0.0;  // max pairwise distance among members
  std::optional<double> mean_pupil_mm;

  double duration_s() const { return end.seconds - start.seconds; }
};

struct SaccadeEvent {
  std::size_t first = 0;
  std::size_t last = 0;
  Timestamp start;
  Timestamp end;
};

struct IvtParams {
  double velocity_threshold = 1.0;
  double min_fixation_duration_s = 0.1;
  double blink_confidence_cutoff = 0.2;
};

struct IvtResult {
  std::vector<GazeLabel> labels;
  std::vector<FixationEvent> fixations;
  std::vector<SaccadeEvent> saccades;
};

// Each non-blink sample is labelled by the velocity from its predecessor
// within the same blink-free segment; the first sample of a segment takes
// its successor's label and an isolated sample stays unclassified.
// Maximal fixation runs at least min_fixation_duration_s long become
// fixations, maximal saccade runs become saccades.
// Throws kTooFewSamples below two samples, kZeroDt on non-increasing time.
IvtResult detect_fixations(std::span<const TimedGaze> samples, const IvtParams& params);

struct GazeFeatures {
  Timestamp start;
  Timestamp end;
  std::size_t sample_count = 0;
  std::optional<double> fixation_count;
  std::optional<double> mean_fixation_duration_s;
  std::optional<double> mean_gaze_velocity;
  std::optional<double> saccade_count;
  std::optional<double> blink_rate_per_min;
  std::optional<double> mean_pupil_mm;
  std::optional<double> mean_dispersion;
  double quality = 0.0;

  bool present() const { return sample_count > 0; }
};

struct GazeWindowParams {
  IvtParams ivt;
  int median_width = 5;
  double nominal_rate_hz = kGazeRateHz;
};

// Empty windows yield absent features with quality 0.
GazeFeatures window_gaze_features(const Window& window, const GazeWindowParams& params);

}  // namespace bioloop
