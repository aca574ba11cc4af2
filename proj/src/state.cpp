#include "bioloop/state.hpp"

#include <cmath>

#include "bioloop/error.hpp"

namespace bioloop {

CalibrationProfile compute_baseline(const CalibrationSet& samples, std::size_t min_samples,
                                    double sigma_floor) {
  std::array<double, kFeatureChannelCount> floors;
  floors.fill(sigma_floor);
  return compute_baseline(samples, min_samples, floors);
}

CalibrationProfile compute_baseline(const CalibrationSet& samples, std::size_t min_samples,
                                    const std::array<double, kFeatureChannelCount>& sigma_floors) {
  CalibrationProfile profile;
  for (std::size_t i = 0; i < kFeatureChannelCount; ++i) {
    const auto& values = samples[i];
    auto& base = profile.channels[i];
    base.n_samples = values.size();
    if (values.size() < min_samples || values.empty()) {
      profile.warnings.push_back("channel " + std::string(to_string(static_cast<FeatureChannel>(i))) +
                                 " uncalibrated: " + std::to_string(values.size()) + " of " +
                                 std::to_string(min_samples) + " samples");
      continue;
    }
    const auto n = static_cast<double>(values.size());
    double mean = 0.0, q = 0.0;
    for (const auto& s : values) {
      mean += s.value;
      q += s.quality;
    }
    mean /= n;
    double var = 0.0;
    for (const auto& s : values) var += (s.value - mean) * (s.value - mean);
    base.mu = mean;
    base.sigma = std::max(std::sqrt(var / n), sigma_floors[i]);
    base.quality_mean = q / n;
    base.calibrated = true;
  }
  return profile;
}

double zscore(double x, const CalibrationProfile& profile, FeatureChannel channel) {
  const auto& base = profile.at(channel);
  if (!base.calibrated) {
    throw Error(ErrorCode::kUncalibrated, "channel " + std::string(to_string(channel)) + " is uncalibrated");
  }
  return (x - base.mu) / base.sigma;
}

FusedScore fuse_deviations(std::span<const double> weights, std::span<const double> quality,
                           std::span<const double> abs_z) {
  if (weights.size() != quality.size() || weights.size() != abs_z.size()) {
    throw Error(ErrorCode::kInvalidArgument, "fusion inputs must have equal length");
  }
  double num = 0.0, den = 0.0, total_w = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double wq = weights[i] * quality[i];
    num += wq * abs_z[i];
    den += wq;
    total_w += weights[i];
  }
  if (!(den > 0.0)) throw Error(ErrorCode::kNoUsableChannels, "no channel with positive weight and quality");
  return {num / den, den / total_w};
}

FusedScore dimension_score(std::span<const ChannelFeature> features, std::span<const double> z,
                           const WeightMatrix& weights, Dimension d) {
  if (features.size() != z.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one z-score per feature required");
  }
  std::array<double, kFeatureChannelCount> q{};
  std::array<double, kFeatureChannelCount> abs_z{};
  for (std::size_t k = 0; k < features.size(); ++k) {
    const auto i = index_of(features[k].channel);
    q[i] = features[k].quality;
    abs_z[i] = std::abs(z[k]);
  }
  return fuse_deviations(weights.row(d), q, abs_z);
}

Severity to_descriptor(double score) {
  if (score >= 1.5) return Severity::kPronounced;
  if (score >= 1.0) return Severity::kModerate;
  return Severity::kNominal;
}

StateVector infer_state(const FeatureSet& features, const CalibrationProfile& profile,
                        const WeightMatrix& weights, Timestamp t, const InferenceParams& params) {
  StateVector state;
  state.t = t;
  std::array<double, kFeatureChannelCount> abs_z{};
  std::array<double, kFeatureChannelCount> signed_z{};
  for (std::size_t i = 0; i < kFeatureChannelCount; ++i) {
    const auto channel = static_cast<FeatureChannel>(i);
    const auto& f = features[i];
    if (!f || !profile.calibrated(channel)) continue;
    const double z = zscore(f->value, profile, channel);
    state.z[i] = z;
    signed_z[i] = z;
    abs_z[i] = std::abs(z);
    state.quality[i] = f->quality < params.quality_floor ? 0.0 : f->quality;
  }

  for (auto d : kAllDimensions) {
    auto& dim = state.at(d);
    const auto& row = weights.row(d);
    try {
      const auto fused = fuse_deviations(row, state.quality, abs_z);
      const auto directional = fuse_deviations(row, state.quality, signed_z);
      dim.score = fused.score;
      dim.signed_score = directional.score;
      dim.confidence = fused.confidence;
      dim.descriptor = to_descriptor(fused.score);
      dim.observed = true;
      for (std::size_t i = 0; i < kFeatureChannelCount; ++i) {
        if (row[i] * state.quality[i] > 0.0 && abs_z[i] >= params.contribution_threshold) {
          ++dim.contributing_channels;
        }
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoUsableChannels) throw;
    }
  }
  return state;
}

}  // namespace bioloop
