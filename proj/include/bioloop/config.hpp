#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "bioloop/core.hpp"

namespace bioloop {

// w[D][i]: contribution of feature channel i to dimension D.
class WeightMatrix {
 public:
  WeightMatrix() { for (auto& row : w_) row.fill(0.0); }

  double at(Dimension d, FeatureChannel c) const { return w_[index_of(d)][index_of(c)]; }
  void set(Dimension d, FeatureChannel c, double value) { w_[index_of(d)][index_of(c)] = value; }

  const std::array<double, kFeatureChannelCount>& row(Dimension d) const { return w_[index_of(d)]; }

  // Channel-to-dimension mapping with the load-dominant pupil weighting.
  static WeightMatrix defaults();

  friend bool operator==(const WeightMatrix&, const WeightMatrix&) = default;

 private:
  std::array<std::array<double, kFeatureChannelCount>, kDimensionCount> w_{};
};

struct WindowLengths {
  double gaze_s = 10.0;
  double cardio_s = 10.0;
  double posture_s = 10.0;
  double notes_s = 60.0;

  double for_kind(StreamKind kind) const;
};

struct PostureTolerances {
  double shoulder_tilt_deg = 10.0;
  double neck_offset = 0.05;
  double trunk_angle_deg = 12.0;
};

enum class ClientMode { kMock, kLive };

constexpr std::array<double, kFeatureChannelCount> default_channel_sigma_floors() {
  std::array<double, kFeatureChannelCount> floors{};
  floors[index_of(FeatureChannel::kNoteError)] = 0.1;
  return floors;
}

using StrategyKey = std::tuple<Dimension, Severity, Modality>;

struct SessionConfig {
  double calibration_duration_s = 300.0;
  double calibration_hop_s = 1.0;
  std::size_t calibration_min_samples = 30;
  double sigma_floor = 1e-6;
  // Smallest spread that counts as baseline variability, per channel. A
  // handful of once-a-minute notes cannot estimate their own spread, so
  // note_error defaults to a tenth of the correctness scale.
  std::array<double, kFeatureChannelCount> channel_sigma_floor = default_channel_sigma_floors();

  WindowLengths window_length;
  double window_hop_s = 10.0;
  double jitter_tolerance_s = 0.25;

  double ivt_velocity_threshold = 1.0;  // normalized units / s
  double min_fixation_duration_s = 0.1;
  int rolling_median_width = 5;
  double blink_confidence_cutoff = 0.2;

  PostureTolerances posture;

  WeightMatrix weights = WeightMatrix::defaults();
  double quality_floor = 0.3;

  double trigger_threshold = 1.5;
  double persistence_s = 10.0;
  int consecutive_windows = 3;
  double confidence_min = 0.6;
  std::array<double, kCategoryCount> cooldown_s = {60.0, 120.0, 60.0, 60.0};

  Modality modality = Modality::kText;
  std::string topic = "the current lesson";
  std::size_t history_turns = 6;
  ClientMode client = ClientMode::kMock;
  double client_timeout_s = 10.0;
  bool trace_ingest = false;

  std::uint64_t rng_seed = 0;

  std::map<StrategyKey, std::string> strategy_overrides;

  double cooldown_for(Category c) const { return cooldown_s[index_of(c)]; }

  // max(sigma_floor, channel_sigma_floor) per channel.
  std::array<double, kFeatureChannelCount> sigma_floors() const;
};

struct ValidationReport {
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

// Collects every violated constraint; never throws.
ValidationReport validate_config(const SessionConfig& cfg);

// Applies one `key = value` assignment. Throws Error(kConfig) on unknown
// keys or unparseable values.
void apply_config_entry(SessionConfig& cfg, std::string_view key, std::string_view value);

// Flat `key = value` document with `#` comments. Errors carry the line number.
SessionConfig parse_config(std::string_view text, SessionConfig base = {});
SessionConfig load_config(const std::filesystem::path& path, SessionConfig base = {});

}  // namespace bioloop
