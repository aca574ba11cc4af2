#pragma once

// Baseline calibration, z-normalization and quality-weighted fusion of
// channel deviations into the six dimension scores.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bioloop/config.hpp"
#include "bioloop/core.hpp"

namespace bioloop {

struct ChannelBaseline {
  double mu = 0.0;
  double sigma = 1.0;
  std::size_t n_samples = 0;
  double quality_mean = 0.0;
  bool calibrated = false;
};

struct CalibrationProfile {
  std::array<ChannelBaseline, kFeatureChannelCount> channels{};
  std::vector<std::string> warnings;  // one per uncalibrated channel

  const ChannelBaseline& at(FeatureChannel c) const { return channels[index_of(c)]; }
  ChannelBaseline& at(FeatureChannel c) { return channels[index_of(c)]; }
  bool calibrated(FeatureChannel c) const { return at(c).calibrated; }
};

struct CalibrationSample {
  double value = 0.0;
  double quality = 1.0;
};

using CalibrationSet = std::array<std::vector<CalibrationSample>, kFeatureChannelCount>;

// mu = mean, sigma = population std floored at sigma_floor. Channels with
// fewer than min_samples values stay uncalibrated and get a warning.
CalibrationProfile compute_baseline(const CalibrationSet& samples, std::size_t min_samples = 30,
                                    double sigma_floor = 1e-6);

// Same, with a floor per channel (channel units).
CalibrationProfile compute_baseline(const CalibrationSet& samples, std::size_t min_samples,
                                    const std::array<double, kFeatureChannelCount>& sigma_floors);

// (x - mu) / sigma. Throws kUncalibrated.
double zscore(double x, const CalibrationProfile& profile, FeatureChannel channel);

struct ChannelFeature {
  FeatureChannel channel = FeatureChannel::kPupilDiameter;
  double value = 0.0;
  double quality = 0.0;  // [0,1]
  Timestamp t;
};

struct FusedScore {
  double score = 0.0;       // sum(w q |z|) / sum(w q)
  double confidence = 0.0;  // sum(w q) / sum(w)
};

// Core fusion over parallel spans. Throws kNoUsableChannels when every
// w*q is zero, kInvalidArgument on mismatched lengths.
FusedScore fuse_deviations(std::span<const double> weights, std::span<const double> quality,
                           std::span<const double> abs_z);

// Scores one dimension from the features present. Channels of the weight
// row without a feature count with quality 0 (they lower confidence).
FusedScore dimension_score(std::span<const ChannelFeature> features, std::span<const double> z,
                           const WeightMatrix& weights, Dimension d);

// <1.0 Nominal, [1.0, 1.5) Moderate, >=1.5 Pronounced.
Severity to_descriptor(double score);

struct DimensionState {
  double score = 0.0;
  double signed_score = 0.0;  // same weighting, without the absolute value
  double confidence = 0.0;
  Severity descriptor = Severity::kNominal;
  bool observed = false;
  int contributing_channels = 0;  // usable channels with |z| >= contribution threshold
};

struct StateVector {
  Timestamp t;
  std::array<DimensionState, kDimensionCount> dims{};
  std::array<std::optional<double>, kFeatureChannelCount> z{};
  std::array<double, kFeatureChannelCount> quality{};

  const DimensionState& at(Dimension d) const { return dims[index_of(d)]; }
  DimensionState& at(Dimension d) { return dims[index_of(d)]; }
};

using FeatureSet = std::array<std::optional<ChannelFeature>, kFeatureChannelCount>;

struct InferenceParams {
  double quality_floor = 0.0;           // qualities below this count as 0
  double contribution_threshold = 1.5;  // |z| needed to count as a contributing channel
};

// Features that are absent, uncalibrated or below the quality floor are
// ignored. Dimensions without usable channels are reported unobserved
// with confidence 0 and a Nominal descriptor.
StateVector infer_state(const FeatureSet& features, const CalibrationProfile& profile,
                        const WeightMatrix& weights, Timestamp t, const InferenceParams& params = {});

}  // namespace bioloop
