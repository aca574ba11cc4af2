// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Oracles are the reference implementations in oracles.hpp plus
// the enumerating checks below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "bioloop/behavior.hpp"
#include "bioloop/cardio.hpp"
#include "bioloop/directive.hpp"
#include "bioloop/gaze.hpp"
#include "bioloop/intervention.hpp"
#include "bioloop/session.hpp"
#include "bioloop/state.hpp"
#include "bioloop/synth.hpp"
#include "bioloop/trace.hpp"
#include "oracles.hpp"

namespace bioloop {
namespace {

const std::string kScenarioDir = BIOLOOP_SCENARIO_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

SessionResult run_bundled(const ScenarioFile& s) {
  MockClient client(s.header.analyzer_replies);
  return run_session(s, config_from_header(s.header), client);
}

ScenarioFile bundled(const std::string& name) {
  return synthesize(load_profile(kScenarioDir + "/" + name + ".json"));
}

std::string trace_bytes(const std::vector<TraceEvent>& trace) {
  std::ostringstream out;
  write_trace(trace, out);
  return out.str();
}

// Traces gathered along the way for the final contract check.
struct SuiteTrace {
  std::string name;
  std::vector<TraceEvent> events;
  SessionConfig cfg;
};
std::vector<SuiteTrace> g_suite;

// ---------------------------------------------------------------------------

Outcome hrv_matches_reference() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> len(2, 500);
  std::uniform_real_distribution<double> rr(400.0, 1600.0);
  std::vector<std::vector<double>> series(1000);
  for (auto& s : series) {
    s.resize(len(rng));
    for (auto& v : s) v = rr(rng);
  }
  double worst = 0.0;
  const auto start = Clock::now();
  std::vector<std::array<double, 3>> got;
  got.reserve(series.size());
  for (const auto& s : series) got.push_back({rmssd(s), sdnn(s), pnn50(s)});
  const double elapsed = seconds_since(start);
  for (std::size_t i = 0; i < series.size(); ++i) {
    worst = std::max({worst, std::abs(got[i][0] - oracle::rmssd(series[i])),
                      std::abs(got[i][1] - oracle::sdnn(series[i])),
                      std::abs(got[i][2] - oracle::pnn50(series[i]))});
  }
  return {worst <= 1e-9 && elapsed < 5.0,
          "max abs error " + fmt("%.3g", worst) + ", " + fmt("%.3f", elapsed) + " s"};
}

Outcome bands_classify_examples() {
  const std::vector<std::pair<double, StressBand>> stress = {
      {15, StressBand::kHigh}, {35, StressBand::kModerate}, {60, StressBand::kLow},
      {20, StressBand::kModerate}, {50, StressBand::kModerate}};
  const std::vector<std::pair<double, PostureCategory>> posture = {
      {95, PostureCategory::kIdeal},        {80, PostureCategory::kAverage},
      {72, PostureCategory::kBelowAverage}, {59.9, PostureCategory::kPoor},
      {90, PostureCategory::kIdeal},        {75, PostureCategory::kAverage},
      {60, PostureCategory::kBelowAverage}};
  int wrong = 0;
  for (const auto& [v, band] : stress) wrong += classify_stress(v) != band;
  for (const auto& [v, cat] : posture) wrong += categorize_posture(v) != cat;
  return {wrong == 0, std::to_string(stress.size() + posture.size() - wrong) + "/" +
                          std::to_string(stress.size() + posture.size()) + " examples"};
}

std::vector<TimedGaze> fuzzed_gaze(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TimedGaze> trace;
  double t = 0.0, x = 0.5, y = 0.5;
  const int n = 2 + static_cast<int>(u(rng) * 300);
  for (int i = 0; i < n; ++i) {
    t += (0.5 + u(rng)) / 60.0;
    const double step = u(rng) < 0.2 ? 0.06 : 0.002;
    x = std::clamp(x + step * (u(rng) - 0.5), 0.0, 1.0);
    y = std::clamp(y + step * (u(rng) - 0.5), 0.0, 1.0);
    GazeSample s{x, y, 2.5 + u(rng), 1.0};
    if (u(rng) < 0.05) s.pupil_mm.reset();
    if (u(rng) < 0.03) s.confidence = 0.1;
    trace.push_back({Timestamp{t}, s});
  }
  return trace;
}

Outcome ivt_matches_reference() {
  std::mt19937_64 rng(2002);
  int mismatches = 0;
  std::size_t fixations = 0, saccades = 0;
  for (int round = 0; round < 500; ++round) {
    const auto trace = fuzzed_gaze(rng);
    const IvtParams p{0.2 + 0.1 * (round % 9), 0.04 * (round % 5), 0.2};
    const auto got = detect_fixations(trace, p);
    mismatches += !oracle::ivt_matches(got, oracle::ivt(trace, p));
    fixations += got.fixations.size();
    saccades += got.saccades.size();
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatching traces of 500 (" +
                               std::to_string(fixations) + " fixations, " + std::to_string(saccades) +
                               " saccades)"};
}

Outcome fusion_matches_brute_force() {
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int failures = 0;
  for (int round = 0; round < 10000; ++round) {
    const auto d = kAllDimensions[round % kDimensionCount];
    WeightMatrix weights;
    for (std::size_t c = 0; c < kFeatureChannelCount; ++c) {
      if (u(rng) < 0.6) weights.set(d, static_cast<FeatureChannel>(c), 0.01 + u(rng));
    }
    weights.set(d, static_cast<FeatureChannel>(round % kFeatureChannelCount), 0.01 + u(rng));

    std::vector<ChannelFeature> features;
    std::vector<double> z;
    for (std::size_t c = 0; c < kFeatureChannelCount; ++c) {
      if (u(rng) < 0.3) continue;
      features.push_back({static_cast<FeatureChannel>(c), 0.0, u(rng), Timestamp{0}});
      z.push_back(8.0 * (u(rng) - 0.5));
    }

    std::vector<double> w, q, az;
    for (std::size_t c = 0; c < kFeatureChannelCount; ++c) {
      const auto ch = static_cast<FeatureChannel>(c);
      w.push_back(weights.at(d, ch));
      double qc = 0.0, zc = 0.0;
      for (std::size_t k = 0; k < features.size(); ++k) {
        if (features[k].channel == ch) qc = features[k].quality, zc = z[k];
      }
      q.push_back(qc);
      az.push_back(zc);
    }
    double usable = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) usable += w[c] * q[c];
    if (usable == 0.0) continue;

    const auto got = dimension_score(features, z, weights, d);
    const auto [score, conf] = oracle::fused(w, q, az);
    if (std::abs(got.score - score) > 1e-12 || std::abs(got.confidence - conf) > 1e-12) ++failures;

    WeightMatrix scaled;
    const double k = 0.1 + 10.0 * u(rng);
    for (std::size_t c = 0; c < kFeatureChannelCount; ++c) {
      const auto ch = static_cast<FeatureChannel>(c);
      scaled.set(d, ch, k * weights.at(d, ch));
    }
    const auto again = dimension_score(features, z, scaled, d);
    if (std::abs(again.score - got.score) > 1e-12 || std::abs(again.confidence - got.confidence) > 1e-12) {
      ++failures;
    }
  }
  return {failures == 0, std::to_string(failures) + " failures over 10000 tuples and row scalings"};
}

// Baseline vector with one deviating dimension.
StateVector excursion_vector(double t, Dimension dim, double score, double conf) {
  StateVector s;
  s.t = Timestamp{t};
  for (auto& d : s.dims) {
    d.confidence = conf;
    d.observed = true;
    d.contributing_channels = 1;
  }
  auto& x = s.at(dim);
  x.score = score;
  x.signed_score = score;
  x.descriptor = to_descriptor(score);
  if (dim == Dimension::kEngagement) {
    auto& load = s.at(Dimension::kCognitiveLoad);
    load.score = 1.2;
    load.signed_score = -1.2;
  }
  return s;
}

// Direct reading of the trigger rule for a single deviating dimension.
std::vector<double> enumerate_decisions(const std::vector<StateVector>& states, Dimension dim,
                                        const SessionConfig& cfg) {
  std::vector<double> out;
  int run = 0;
  double first = 0.0;
  double cooldown_until = -1e300;
  for (const auto& s : states) {
    const auto in = trigger_input(s, dim);
    if (!(in.score > cfg.trigger_threshold && in.confidence > cfg.confidence_min)) {
      run = 0;
      continue;
    }
    if (run == 0) first = s.t.seconds;
    ++run;
    if (run >= cfg.consecutive_windows && s.t.seconds - first >= cfg.persistence_s &&
        s.t.seconds >= cooldown_until) {
      out.push_back(s.t.seconds);
      cooldown_until = s.t.seconds + cfg.cooldown_for(category_of(dim));
      run = 0;
    }
  }
  return out;
}

std::vector<double> engine_decisions(const std::vector<StateVector>& states, const SessionConfig& cfg) {
  InterventionEngine engine(cfg);
  std::vector<double> out;
  for (const auto& s : states) {
    if (engine.step(s).decision) out.push_back(s.t.seconds);
  }
  return out;
}

std::vector<StateVector> excursion(Dimension dim, double from, double to, double hop, double conf) {
  std::vector<StateVector> out;
  for (long i = 0;; ++i) {
    const double t = i * hop;
    if (t > 300.0) break;
    const bool inside = t >= from - 1e-9 && t < to - 1e-9;
    out.push_back(excursion_vector(t, dim, inside ? 1.6 : 0.2, conf));
  }
  return out;
}

Outcome trigger_timing() {
  const SessionConfig cfg;
  int wrong = 0;
  for (auto dim : kAllDimensions) {
    const auto sustained = excursion(dim, 100.0, 150.0, 10.0, 0.9);
    const auto got = engine_decisions(sustained, cfg);
    wrong += got != std::vector<double>{120.0} || got != enumerate_decisions(sustained, dim, cfg);

    for (double hop : {10.0, 0.1}) {
      const auto brief = excursion(dim, 100.0, 109.9, hop, 0.9);
      wrong += !engine_decisions(brief, cfg).empty() || !enumerate_decisions(brief, dim, cfg).empty();
    }
    const auto unsure = excursion(dim, 100.0, 150.0, 10.0, 0.55);
    wrong += !engine_decisions(unsure, cfg).empty();
  }
  return {wrong == 0, std::to_string(wrong) + " wrong outcomes over 6 dimensions x 4 cases"};
}

// Regime-switching state stream: several dimensions above threshold at
// once, with quantized scores so ties occur.
std::vector<StateVector> fuzzed_states(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<bool, kDimensionCount> on{};
  std::vector<StateVector> out;
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    t += u(rng) < 0.8 ? 10.0 : 5.0;
    StateVector s;
    s.t = Timestamp{t};
    for (std::size_t k = 0; k < kDimensionCount; ++k) {
      if (u(rng) < 0.15) on[k] = !on[k];
      auto& d = s.dims[k];
      d.observed = u(rng) > 0.02;
      d.score = on[k] ? 1.5 + std::round(u(rng) * 6.0) * 0.25 : u(rng) * 1.5;
      d.signed_score = d.score;
      d.confidence = on[k] ? (u(rng) < 0.9 ? 0.65 + 0.35 * u(rng) : 0.5) : u(rng);
      d.descriptor = to_descriptor(d.score);
      d.contributing_channels = static_cast<int>(u(rng) * 4);
    }
    auto& load = s.at(Dimension::kCognitiveLoad);
    if (u(rng) < 0.3) load.signed_score = -load.score;
    out.push_back(s);
  }
  return out;
}

void log_step(TraceLog& log, const StateVector& s, const StepResult& step, const SessionConfig& cfg) {
  const double t = s.t.seconds;
  nlohmann::json dims = nlohmann::json::object();
  for (auto d : kAllDimensions) {
    const auto in = trigger_input(s, d);
    dims[std::string(to_string(d))] = {
        {"trigger", in.score},
        {"trigger_confidence", in.confidence},
        {"above", in.score > cfg.trigger_threshold && in.confidence > cfg.confidence_min}};
  }
  log.emit(t, TraceKind::kStateVector, {{"hop_s", 10.0}, {"dims", std::move(dims)}});
  for (const auto& c : step.candidates) {
    log.emit(t, TraceKind::kCandidate, {{"dimension", std::string(to_string(c.dimension))}, {"score", c.score}});
  }
  if (step.decision) {
    const auto& d = *step.decision;
    log.emit(t, TraceKind::kDecision,
             {{"dimension", std::string(to_string(d.dimension))},
              {"category", std::string(to_string(d.category))},
              {"score", d.triggering_score},
              {"confidence", d.confidence}});
  }
}

int priority_rank(Dimension d) {
  return static_cast<int>(std::find(kPriorityOrder.begin(), kPriorityOrder.end(), d) - kPriorityOrder.begin());
}

struct PriorityCheck {
  std::size_t instants = 0;
  std::size_t contested = 0;
  std::size_t ties = 0;
  std::size_t wrong = 0;
};

// Linear scan over the serialized trace: at every timestamp with
// candidates, the decision is the highest score, ties by priority order.
void check_priority(const std::vector<TraceEvent>& events, PriorityCheck& out) {
  for (std::size_t i = 0; i < events.size();) {
    std::size_t j = i;
    std::vector<std::pair<Dimension, double>> cands;
    std::vector<std::pair<Dimension, double>> decs;
    while (j < events.size() && events[j].t == events[i].t) {
      const auto& e = events[j];
      if (e.kind == TraceKind::kCandidate || e.kind == TraceKind::kDecision) {
        const auto dim = parse_dimension(e.payload["dimension"].get<std::string>());
        const double score = e.payload["score"].get<double>();
        (e.kind == TraceKind::kCandidate ? cands : decs).emplace_back(*dim, score);
      }
      ++j;
    }
    if (!cands.empty() || !decs.empty()) {
      ++out.instants;
      if (cands.size() > 1) ++out.contested;
      if (cands.empty() || decs.size() != 1) {
        ++out.wrong;
      } else {
        auto best = cands[0];
        bool tie = false;
        for (std::size_t k = 1; k < cands.size(); ++k) {
          const auto& c = cands[k];
          if (c.second == best.second) tie = true;
          if (c.second > best.second || (c.second == best.second && priority_rank(c.first) < priority_rank(best.first))) {
            best = c;
          }
        }
        for (const auto& c : cands) tie |= c.second == best.second && c.first != best.first;
        out.ties += tie;
        out.wrong += decs[0].first != best.first || decs[0].second != best.second;
      }
    }
    i = j;
  }
}

Outcome prioritization_from_trace() {
  const SessionConfig cfg;
  std::mt19937_64 rng(6006);
  PriorityCheck check;
  for (int round = 0; round < 50; ++round) {
    InterventionEngine engine(cfg);
    TraceLog log;
    for (const auto& s : fuzzed_states(rng, 200)) log_step(log, s, engine.step(s), cfg);
    std::istringstream in(trace_bytes(log.sorted()));
    auto parsed = parse_trace(in);
    check_priority(parsed, check);
    g_suite.push_back({"fuzzed engine stream " + std::to_string(round), std::move(parsed), cfg});
  }
  const auto mixed = run_bundled(bundled("mixed_session"));
  std::istringstream in(trace_bytes(mixed.trace));
  check_priority(parse_trace(in), check);
  return {check.wrong == 0 && check.contested > 0 && check.ties > 0,
          std::to_string(check.wrong) + " wrong of " + std::to_string(check.instants) + " instants (" +
              std::to_string(check.contested) + " contested, " + std::to_string(check.ties) + " with ties)"};
}

Outcome replay_is_deterministic() {
  const auto profile = load_profile(kScenarioDir + "/mixed_session.json");
  const auto s = synthesize(profile);
  auto start = Clock::now();
  const auto first = run_bundled(s);
  const double t1 = seconds_since(start);
  start = Clock::now();
  const auto second = run_bundled(s);
  const double t2 = seconds_since(start);
  const bool same = trace_bytes(first.trace) == trace_bytes(second.trace);
  g_suite.push_back({"mixed_session", first.trace, config_from_header(s.header)});
  return {same && t1 < 10.0 && t2 < 10.0, std::string(same ? "identical" : "different") + " bytes, runs took " +
                                              fmt("%.2f", t1) + " s and " + fmt("%.2f", t2) + " s"};
}

Outcome fixtures_behave() {
  std::size_t breathing = 0, cognitive = 0, baseline = 0;
  for (const std::string name : {"stress_ramp", "load_excursion", "all_baseline"}) {
    const auto s = bundled(name);
    const auto r = run_bundled(s);
    for (const auto& e : r.trace) {
      if (e.kind != TraceKind::kDecision) continue;
      if (name == "stress_ramp") {
        breathing += e.payload["category"] == "Physiological" && e.payload["template"] == "box_breathing";
      } else if (name == "load_excursion") {
        cognitive += e.payload["category"] == "CognitiveAttentional";
      } else {
        ++baseline;
      }
    }
    g_suite.push_back({name, r.trace, config_from_header(s.header)});
  }
  return {breathing >= 1 && cognitive >= 1 && baseline == 0,
          std::to_string(breathing) + " breathing, " + std::to_string(cognitive) + " cognitive, " +
              std::to_string(baseline) + " baseline decisions"};
}

const std::vector<std::string> kWords = {"fractions", "photosynthesis", "recursion", "vectors", "grammar",
                                         "the water cycle", "probability", "momentum", "poetry", "cells"};

Outcome prompts_hide_numbers() {
  std::mt19937_64 rng(9009);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto table = StrategyTable::defaults();
  const std::regex decimal(R"(\d+\.\d+)");
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(u(rng) * n) % n; };
  int leaks = 0, missing = 0;
  for (int round = 0; round < 1000; ++round) {
    InterventionDecision d;
    d.t = Timestamp{u(rng) * 3600.0};
    d.dimension = kAllDimensions[pick(kDimensionCount)];
    d.severity = u(rng) < 0.5 ? Severity::kModerate : Severity::kPronounced;
    d.modality = static_cast<Modality>(pick(kModalityCount));
    const auto& entry = table.lookup(d.dimension, d.severity, d.modality);
    d.category = entry.category;
    d.tier = entry.tier;
    d.template_id = entry.template_id;
    d.framing = u(rng) < 0.5 ? Framing::kImplicit : Framing::kExplicit;
    d.triggering_score = 1.5 + 4.0 * u(rng);
    d.confidence = 0.6 + 0.4 * u(rng);
    d.repeat_count = 1 + static_cast<int>(pick(4));
    d.contributing_channels = static_cast<int>(pick(6));

    Descriptors desc;
    for (std::size_t k = 0; k < kDimensionCount; ++k) {
      desc[k] = {kAllDimensions[k], static_cast<Severity>(pick(3)), u(rng) < 0.5};
    }
    LearningContext ctx{kWords[pick(kWords.size())], u(rng) < 0.5 ? "we were discussing " + kWords[pick(kWords.size())] : ""};
    std::vector<Turn> history;
    for (std::size_t k = pick(10); k > 0; --k) {
      history.push_back({u(rng) < 0.5 ? "learner" : "tutor", "about " + kWords[pick(kWords.size())]});
    }

    const auto packet = build_directives(d, desc, ctx);
    const auto prompt = render_prompt(packet, history);
    bool leak = std::regex_search(prompt, decimal);
    for (double v : {d.triggering_score, d.confidence}) {
      for (const auto& text : {std::to_string(v), fmt("%.2f", v), fmt("%.3g", v), fmt("%g", v),
                               nlohmann::json(v).dump()}) {
        leak |= prompt.find(text) != std::string::npos;
      }
    }
    leaks += leak;
    for (const auto& x : desc) missing += prompt.find(descriptor_label(x.dimension, x.level)) == std::string::npos;
  }
  return {leaks == 0 && missing == 0,
          std::to_string(leaks) + " prompts leaking numbers, " + std::to_string(missing) + " missing labels"};
}

Outcome traces_satisfy_contract() {
  auto excursion_profile = load_profile(kScenarioDir + "/load_excursion.json");
  excursion_profile.segments.at(2).duration_s = 30.0;
  const auto s = synthesize(excursion_profile);
  g_suite.push_back({"30 s load excursion", run_bundled(s).trace, config_from_header(s.header)});

  std::size_t violations = 0, decisions = 0;
  std::string first;
  for (const auto& entry : g_suite) {
    const auto v = validate_trace(entry.events, entry.cfg);
    violations += v.size();
    if (!v.empty() && first.empty()) first = " (" + entry.name + ": " + v.front().message + ")";
    for (const auto& e : entry.events) decisions += e.kind == TraceKind::kDecision;
  }
  return {violations == 0 && decisions > 0, std::to_string(violations) + " violations over " +
                                                std::to_string(g_suite.size()) + " traces with " +
                                                std::to_string(decisions) + " decisions" + first};
}

}  // namespace
}  // namespace bioloop

int main() {
  using namespace bioloop;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"HRV features match the reference definitions", hrv_matches_reference},
      {"stress and posture bands classify the examples", bands_classify_examples},
      {"I-VT events match the naive classifier", ivt_matches_reference},
      {"fusion matches brute force and ignores weight scale", fusion_matches_brute_force},
      {"trigger fires only on sustained confident deviations", trigger_timing},
      {"decisions follow score then priority order", prioritization_from_trace},
      {"replay is byte-deterministic and fast", replay_is_deterministic},
      {"bundled scenarios produce their designed decisions", fixtures_behave},
      {"prompts carry labels and no numbers", prompts_hide_numbers},
      {"every trace satisfies the trigger contract", traces_satisfy_contract},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %2zu  %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
