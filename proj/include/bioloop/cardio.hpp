#pragma once

// Time-domain heart-rate-variability features over RR intervals (ms).

#include <optional>
#include <span>

#include "bioloop/core.hpp"
#include "bioloop/stream_sync.hpp"

namespace bioloop {

inline constexpr double kMinPlausibleRrMs = 200.0;
inline constexpr double kMaxPlausibleRrMs = 3000.0;
inline constexpr std::size_t kMinHrvIntervals = 5;

bool is_rr_artifact(double rr_ms);

// All three throw kTooFewIntervals below two intervals.
double rmssd(std::span<const double> rr_ms);
double sdnn(std::span<const double> rr_ms);  // population standard deviation
double pnn50(std::span<const double> rr_ms);  // strict |diff| > 50 ms, in percent

enum class StressBand { kHigh, kModerate, kLow };
std::string_view to_string(StressBand b);

// <20 High, [20,50] Moderate, >50 Low. Throws kOutOfRange outside [0,100].
StressBand classify_stress(double pnn50_percent);

struct HrvFeatures {
  Timestamp start;
  Timestamp end;
  std::size_t n_intervals = 0;  // valid (non-artifact) intervals
  std::size_t n_artifacts = 0;
  std::optional<double> rmssd_ms;
  std::optional<double> sdnn_ms;
  std::optional<double> pnn50_percent;
  std::optional<double> mean_hr_bpm;
  double quality = 0.0;

  bool present() const { return mean_hr_bpm.has_value(); }
};

// Artifact intervals are excluded; fewer than kMinHrvIntervals valid
// intervals yields absent features with quality 0.
HrvFeatures window_hrv(const Window& window);

}  // namespace bioloop
