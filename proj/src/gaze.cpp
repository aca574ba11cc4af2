#include "bioloop/gaze.hpp"

#include <algorithm>
#include <cmath>

#include "bioloop/error.hpp"

namespace bioloop {

namespace {

double median_of(std::vector<double>& values) {
  const auto n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

template <typename Fn>
void for_each_run(const std::vector<GazeLabel>& labels, Fn&& fn) {
  std::size_t i = 0;
  while (i < labels.size()) {
    std::size_t j = i;
    while (j + 1 < labels.size() && labels[j + 1] == labels[i]) ++j;
    fn(labels[i], i, j);
    i = j + 1;
  }
}

}  // namespace

bool is_blink(const GazeSample& s, double confidence_cutoff) {
  return !s.pupil_mm.has_value() || !(*s.pupil_mm > 0.0) || s.confidence < confidence_cutoff;
}

DespikeResult despike_pupil(std::span<const GazeSample> samples, int median_width,
                            double blink_confidence_cutoff) {
  if (median_width < 3 || median_width % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "rolling median width must be odd and >= 3");
  }
  DespikeResult out;
  out.samples.assign(samples.begin(), samples.end());
  out.blink.resize(samples.size());

  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.blink[i] = is_blink(samples[i], blink_confidence_cutoff);
    if (out.blink[i]) {
      out.samples[i].pupil_mm.reset();
      if (i == 0 || !out.blink[i - 1]) out.blinks.push_back({i, i});
      else out.blinks.back().last = i;
    } else {
      valid.push_back(i);
    }
  }

  const std::size_t half = static_cast<std::size_t>(median_width / 2);
  std::vector<double> scratch;
  for (std::size_t k = 0; k < valid.size(); ++k) {
    const std::size_t h = std::min({half, k, valid.size() - 1 - k});
    scratch.clear();
    for (std::size_t j = k - h; j <= k + h; ++j) scratch.push_back(*samples[valid[j]].pupil_mm);
    out.samples[valid[k]].pupil_mm = median_of(scratch);
  }
  return out;
}

double gaze_velocity(const TimedGaze& prev, const TimedGaze& cur) {
  const double dt = cur.t.seconds - prev.t.seconds;
  if (!(dt > 0.0)) throw Error(ErrorCode::kZeroDt, "gaze velocity needs a positive sampling interval");
  const double dx = cur.sample.x - prev.sample.x;
  const double dy = cur.sample.y - prev.sample.y;
  return std::sqrt(dx * dx + dy * dy) / dt;
}

IvtResult detect_fixations(std::span<const TimedGaze> samples, const IvtParams& params) {
  if (samples.size() < 2) throw Error(ErrorCode::kTooFewSamples, "I-VT needs at least 2 samples");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t.seconds > samples[i - 1].t.seconds)) {
      throw Error(ErrorCode::kZeroDt, "gaze samples must have strictly increasing timestamps");
    }
  }

  const std::size_t n = samples.size();
  IvtResult out;
  out.labels.assign(n, GazeLabel::kUnclassified);

  std::size_t i = 0;
  while (i < n) {
    if (is_blink(samples[i].sample, params.blink_confidence_cutoff)) {
      out.labels[i] = GazeLabel::kBlink;
      ++i;
      continue;
    }
    std::size_t end = i;  // blink-free segment [i, end]
    while (end + 1 < n && !is_blink(samples[end + 1].sample, params.blink_confidence_cutoff)) ++end;
    for (std::size_t k = i + 1; k <= end; ++k) {
      const double v = gaze_velocity(samples[k - 1], samples[k]);
      out.labels[k] = v < params.velocity_threshold ? GazeLabel::kFixation : GazeLabel::kSaccade;
    }
    if (end > i) out.labels[i] = out.labels[i + 1];
    i = end + 1;
  }

  for_each_run(out.labels, [&](GazeLabel label, std::size_t first, std::size_t last) {
    const Timestamp start = samples[first].t;
    const Timestamp stop = samples[last].t;
    if (label == GazeLabel::kSaccade) {
      out.saccades.push_back({first, last, start, stop});
      return;
    }
    if (label != GazeLabel::kFixation) return;
    if (stop.seconds - start.seconds < params.min_fixation_duration_s) return;

    FixationEvent fix{first, last, start, stop, {}, 0.0, std::nullopt};
    double sx = 0.0, sy = 0.0, pupil = 0.0;
    std::size_t pupil_n = 0;
    for (std::size_t k = first; k <= last; ++k) {
      sx += samples[k].sample.x;
      sy += samples[k].sample.y;
      if (samples[k].sample.pupil_mm) {
        pupil += *samples[k].sample.pupil_mm;
        ++pupil_n;
      }
      for (std::size_t m = first; m < k; ++m) {
        fix.dispersion = std::max(fix.dispersion, distance({samples[k].sample.x, samples[k].sample.y},
                                                           {samples[m].sample.x, samples[m].sample.y}));
      }
    }
    const auto count = static_cast<double>(last - first + 1);
    fix.centroid = {sx / count, sy / count};
    if (pupil_n > 0) fix.mean_pupil_mm = pupil / static_cast<double>(pupil_n);
    out.fixations.push_back(fix);
  });
  return out;
}

GazeFeatures window_gaze_features(const Window& window, const GazeWindowParams& params) {
  GazeFeatures f;
  f.start = window.start;
  f.end = window.end;

  std::vector<TimedGaze> trace;
  std::vector<double> source_conf;
  trace.reserve(window.samples.size());
  for (const auto& env : window.samples) {
    const auto* g = std::get_if<GazeSample>(&env.payload);
    if (g == nullptr) continue;
    // Two gaze producers can collide on a timestamp; keep the first.
    if (!trace.empty() && !(env.timestamp.seconds > trace.back().t.seconds)) continue;
    trace.push_back({env.timestamp, *g});
    source_conf.push_back(env.source_confidence);
  }
  f.sample_count = trace.size();
  if (trace.empty()) return f;

  std::vector<GazeSample> raw;
  raw.reserve(trace.size());
  for (const auto& s : trace) raw.push_back(s.sample);
  const auto despiked = despike_pupil(raw, params.median_width, params.ivt.blink_confidence_cutoff);
  for (std::size_t i = 0; i < trace.size(); ++i) trace[i].sample = despiked.samples[i];

  const double minutes = window.length_s() / 60.0;
  f.blink_rate_per_min = static_cast<double>(despiked.blinks.size()) / minutes;

  double pupil_sum = 0.0, conf_sum = 0.0;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (despiked.blink[i]) continue;
    pupil_sum += *trace[i].sample.pupil_mm;
    conf_sum += trace[i].sample.confidence * source_conf[i];
    ++valid;
  }
  if (valid > 0) f.mean_pupil_mm = pupil_sum / static_cast<double>(valid);

  double vel_sum = 0.0;
  std::size_t vel_n = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (despiked.blink[i] || despiked.blink[i - 1]) continue;
    vel_sum += gaze_velocity(trace[i - 1], trace[i]);
    ++vel_n;
  }
  if (vel_n > 0) f.mean_gaze_velocity = vel_sum / static_cast<double>(vel_n);

  if (trace.size() >= 2) {
    const auto ivt = detect_fixations(trace, params.ivt);
    f.fixation_count = static_cast<double>(ivt.fixations.size());
    f.saccade_count = static_cast<double>(ivt.saccades.size());
    if (!ivt.fixations.empty()) {
      double dur = 0.0, disp = 0.0;
      for (const auto& fx : ivt.fixations) {
        dur += fx.duration_s();
        disp += fx.dispersion;
      }
      const auto k = static_cast<double>(ivt.fixations.size());
      f.mean_fixation_duration_s = dur / k;
      f.mean_dispersion = disp / k;
    }
  }

  if (valid > 0) {
    const double expected = window.length_s() * params.nominal_rate_hz;
    const double coverage = std::min(1.0, static_cast<double>(valid) / expected);
    f.quality = std::clamp(coverage * conf_sum / static_cast<double>(valid), 0.0, 1.0);
  }
  return f;
}

}  // namespace bioloop
