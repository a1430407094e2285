#pragma once

// JSON forms of fit reports and frame decompositions (nlohmann/json).

#include <string>
#include <vector>

#include "json.hpp"
#include "trigfit/error.hpp"
#include "trigfit/linreg.hpp"
#include "trigfit/sinefit.hpp"

namespace trigfit {

inline constexpr const char* kFramesFormat = "trigfit-frames/1";

inline nlohmann::json to_json(const FitReport& r) {
  return {{"spec_name", r.spec_name},
          {"train_abs_error", r.train_abs_error},
          {"test_abs_error", r.test_abs_error},
          {"n_train", r.n_train},
          {"n_test", r.n_test},
          {"dropped_rows", r.dropped_rows},
          {"seed", r.seed},
          {"test_fraction", r.test_fraction},
          {"ridge", r.ridge},
          {"ridge_fallback", r.ridge_fallback},
          {"intercept", r.intercept},
          {"condition_estimate", r.condition_estimate},
          {"error_metric", r.error_metric}};
}

inline const char* mode_name(TrainingMode m) { return m == TrainingMode::Independent ? "independent" : "dependent"; }
inline const char* order_name(UpdateOrder o) { return o == UpdateOrder::Simultaneous ? "simultaneous" : "sequential"; }

inline TrainingMode parse_mode(const std::string& s) {
  if (s == "independent") return TrainingMode::Independent;
  if (s == "dependent") return TrainingMode::Dependent;
  throw InvalidArgument("unknown training mode '" + s + "'");
}

inline UpdateOrder parse_order(const std::string& s) {
  if (s == "simultaneous") return UpdateOrder::Simultaneous;
  if (s == "sequential") return UpdateOrder::Sequential;
  throw InvalidArgument("unknown update order '" + s + "'");
}

inline nlohmann::json to_json(const FitConfig& c) {
  return {{"n_waves", c.n_waves},
          {"passes", c.passes},
          {"step", c.step},
          {"mode", mode_name(c.mode)},
          {"update_order", order_name(c.order)},
          {"init", {c.init.amplitude, c.init.frequency, c.init.phase}},
          {"include_amplitude_in_resynthesis", c.include_amplitude_in_resynthesis},
          {"divide_by_n_waves", c.divide_by_n_waves}};
}

inline nlohmann::json to_json(const FrameFit& f) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& w : f.params) params.push_back({w.amplitude, w.frequency, w.phase});
  nlohmann::json j = {{"start_index", f.start_index},
                      {"params", params},
                      {"frame_loss", f.frame_loss},
                      {"diverged", f.diverged}};
  if (f.diverged) j["error"] = f.error;
  return j;
}

/// Full decomposition: enough to resynthesize without the source audio.
inline nlohmann::json to_json(const Decomposition& d) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : d.frames) frames.push_back(to_json(f));
  const auto norm = d.axis.scope == NormScope::Global && d.axis.n_samples >= 2
                        ? d.axis.normalization_for(0, d.axis.n_samples)
                        : TimeNormalization{d.axis.rate_divisor, 0.0, 1.0};
  return {{"format", kFramesFormat},
          {"sample_rate", d.sample_rate},
          {"frame_len", d.frame_len},
          {"n_frames", d.frames.size()},
          {"amplitude_scale", "pcm16 / 32768"},
          {"time_axis",
           {{"rate_divisor", d.axis.rate_divisor},
            {"n_samples", d.axis.n_samples},
            {"scope", d.axis.scope == NormScope::Global ? "global" : "per_frame"},
            {"mean", norm.mean},
            {"std", norm.std}}},
          {"config", to_json(d.config)},
          {"diverged_frames", d.diverged_count()},
          {"frames", frames}};
}

inline Decomposition decomposition_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kFramesFormat) throw FormatError("unsupported frames format");
    Decomposition d;
    d.sample_rate = j.at("sample_rate").get<int>();
    d.frame_len = j.at("frame_len").get<std::size_t>();
    const auto& ax = j.at("time_axis");
    d.axis.rate_divisor = ax.at("rate_divisor").get<double>();
    d.axis.n_samples = ax.at("n_samples").get<std::size_t>();
    d.axis.scope = ax.at("scope").get<std::string>() == "per_frame" ? NormScope::PerFrame : NormScope::Global;
    const auto& c = j.at("config");
    d.config.n_waves = c.at("n_waves").get<std::size_t>();
    d.config.passes = c.at("passes").get<std::size_t>();
    d.config.step = c.at("step").get<double>();
    d.config.mode = parse_mode(c.at("mode").get<std::string>());
    d.config.order = parse_order(c.value("update_order", std::string("simultaneous")));
    const auto init = c.at("init").get<std::vector<double>>();
    if (init.size() != 3) throw FormatError("config.init must hold [a, f, p]");
    d.config.init = {init[0], init[1], init[2]};
    d.config.include_amplitude_in_resynthesis = c.at("include_amplitude_in_resynthesis").get<bool>();
    d.config.divide_by_n_waves = c.at("divide_by_n_waves").get<bool>();
    for (const auto& fj : j.at("frames")) {
      FrameFit f;
      f.start_index = fj.at("start_index").get<std::size_t>();
      f.frame_loss = fj.at("frame_loss").get<double>();
      f.diverged = fj.at("diverged").get<bool>();
      f.error = fj.value("error", std::string());
      for (const auto& p : fj.at("params")) {
        const auto v = p.get<std::vector<double>>();
        if (v.size() != 3) throw FormatError("frame params must be [a, f, p] triples");
        f.params.push_back({v[0], v[1], v[2]});
      }
      d.frames.push_back(std::move(f));
    }
    if (d.frame_len == 0) throw FormatError("frame_len must be positive");
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed frames JSON: ") + e.what());
  }
}

}  // namespace trigfit
