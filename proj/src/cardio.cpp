#include "bioloop/cardio.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bioloop/error.hpp"

namespace bioloop {

namespace {

void require_two(std::span<const double> rr) {
  if (rr.size() < 2) throw Error(ErrorCode::kTooFewIntervals, "HRV metrics need at least 2 RR intervals");
}

}  // namespace

bool is_rr_artifact(double rr_ms) {
  return !(rr_ms >= kMinPlausibleRrMs && rr_ms <= kMaxPlausibleRrMs);
}

double rmssd(std::span<const double> rr) {
  require_two(rr);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < rr.size(); ++i) {
    const double d = rr[i + 1] - rr[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(rr.size() - 1));
}

double sdnn(std::span<const double> rr) {
  require_two(rr);
  const auto n = static_cast<double>(rr.size());
  double mean = 0.0;
  for (double v : rr) mean += v;
  mean /= n;
  double acc = 0.0;
  for (double v : rr) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / n);
}

double pnn50(std::span<const double> rr) {
  require_two(rr);
  std::size_t over = 0;
  for (std::size_t i = 0; i + 1 < rr.size(); ++i) {
    if (std::abs(rr[i + 1] - rr[i]) > 50.0) ++over;
  }
  return 100.0 * static_cast<double>(over) / static_cast<double>(rr.size() - 1);
}

std::string_view to_string(StressBand b) {
  switch (b) {
    case StressBand::kHigh: return "High";
    case StressBand::kModerate: return "Moderate";
    case StressBand::kLow: return "Low";
  }
  return "Moderate";
}

StressBand classify_stress(double pnn50_percent) {
  if (!(pnn50_percent >= 0.0 && pnn50_percent <= 100.0)) {
    throw Error(ErrorCode::kOutOfRange, "pNN50 must lie in [0,100]");
  }
  if (pnn50_percent < 20.0) return StressBand::kHigh;
  if (pnn50_percent > 50.0) return StressBand::kLow;
  return StressBand::kModerate;
}

HrvFeatures window_hrv(const Window& window) {
  HrvFeatures f;
  f.start = window.start;
  f.end = window.end;

  std::vector<double> rr;
  double conf = 0.0;
  for (const auto& env : window.samples) {
    const auto* s = std::get_if<RRSample>(&env.payload);
    if (s == nullptr) continue;
    if (is_rr_artifact(s->rr_ms)) {
      ++f.n_artifacts;
      continue;
    }
    rr.push_back(s->rr_ms);
    conf += env.source_confidence;
  }
  f.n_intervals = rr.size();
  if (rr.size() < kMinHrvIntervals) return f;

  f.rmssd_ms = rmssd(rr);
  f.sdnn_ms = sdnn(rr);
  f.pnn50_percent = pnn50(rr);
  double total_ms = 0.0;
  for (double v : rr) total_ms += v;
  f.mean_hr_bpm = 60000.0 / (total_ms / static_cast<double>(rr.size()));

  const double coverage = std::min(1.0, total_ms / 1000.0 / window.length_s());
  const double valid_fraction =
      static_cast<double>(rr.size()) / static_cast<double>(rr.size() + f.n_artifacts);
  f.quality = std::clamp(coverage * valid_fraction * conf / static_cast<double>(rr.size()), 0.0, 1.0);
  return f;
}

}  // namespace bioloop
