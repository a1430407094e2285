#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "trigfit/audio.hpp"
#include "trigfit/error.hpp"

namespace trigfit {

/// One sinusoid a * sin(2*pi*(f*t + p)); phase p is in cycles.
struct WaveParams {
  double amplitude = 1.0;
  double frequency = 1.0;
  double phase = 0.0;

  friend bool operator==(const WaveParams&, const WaveParams&) = default;
};

/// Per-sample gradient steps for amplitude, frequency and phase.
struct Gradients {
  double ga = 0.0;
  double gf = 0.0;
  double gp = 0.0;
};

enum class TrainingMode {
  /// Each parameter's gradient assumes the other two sit at a=1, f=1, p=0.
  Independent,
  /// Gradients carry the current values of the other parameters.
  Dependent,
};

/// When, within one sample, the three gradients read the parameters.
enum class UpdateOrder {
  /// All three gradients from the values at the start of the sample, then
  /// all three updates.
  Simultaneous,
  /// Ga, update a, Gf, update f, Gp, update p.
  Sequential,
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// step * dL/dtheta for the losses
///   La = (h + a sin(2 pi x) - y)^2 / 2
///   Lf = (h + sin(2 pi f x) - y)^2 / 2
///   Lp = (h + sin(2 pi x + 2 pi p) - y)^2 / 2
inline Gradients gradients_independent(const WaveParams& w, double h, double x, double y, double step) {
  const double s = std::sin(kTwoPi * x);
  const double sf = std::sin(kTwoPi * w.frequency * x);
  const double cf = std::cos(kTwoPi * w.frequency * x);
  const double arg_p = kTwoPi * x + kTwoPi * w.phase;
  return {step * (h + w.amplitude * s - y) * s,  //
          step * (h + sf - y) * (kTwoPi * x * cf),
          step * (h + std::sin(arg_p) - y) * (kTwoPi * std::cos(arg_p))};
}

/// step * dL/dtheta for the losses
///   La = (h + a sin(2 pi f x) - y)^2 / 2
///   Lf = (h + sin(2 pi f x) - y)^2 / 2
///   Lp = (h + a sin(2 pi f x + 2 pi p) - y)^2 / 2
inline Gradients gradients_dependent(const WaveParams& w, double h, double x, double y, double step) {
  const double sf = std::sin(kTwoPi * w.frequency * x);
  const double cf = std::cos(kTwoPi * w.frequency * x);
  const double arg_p = kTwoPi * w.frequency * x + kTwoPi * w.phase;
  return {step * (h + w.amplitude * sf - y) * sf,  //
          step * (h + sf - y) * (kTwoPi * x * cf),
          step * (h + w.amplitude * std::sin(arg_p) - y) * (kTwoPi * w.amplitude * std::cos(arg_p))};
}

inline Gradients gradients(TrainingMode mode, const WaveParams& w, double h, double x, double y, double step) {
  return mode == TrainingMode::Independent ? gradients_independent(w, h, x, y, step)
                                           : gradients_dependent(w, h, x, y, step);
}

struct FitConfig {
  std::size_t n_waves = 20;
  std::size_t passes = 10;
  double step = 1.0;
  TrainingMode mode = TrainingMode::Independent;
  UpdateOrder order = UpdateOrder::Simultaneous;
  WaveParams init{};
  bool include_amplitude_in_resynthesis = true;
  bool divide_by_n_waves = false;

  void validate() const {
    if (n_waves < 1) throw InvalidArgument("n_waves must be >= 1");
    if (passes < 1) throw InvalidArgument("passes must be >= 1");
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("step must be positive and finite");
    if (!std::isfinite(init.amplitude) || !std::isfinite(init.frequency) || !std::isfinite(init.phase))
      throw InvalidArgument("initial wave parameters must be finite");
  }
};

struct FrameFit {
  std::size_t start_index = 0;
  std::vector<WaveParams> params;
  std::vector<double> final_h;  // superposition of all fitted waves
  double frame_loss = 0.0;      // sum of (final_h - target)^2
  bool diverged = false;
  std::string error;
};

/// y_j = sum_i [a_i or 1] * sin(2 pi (f_i t_j + p_i)), optionally divided by
/// the number of waves.
inline std::vector<double> superpose(const std::vector<WaveParams>& params, const std::vector<double>& times,
                                     bool include_amplitude = true, bool divide_by_n = false) {
  std::vector<double> y(times.size(), 0.0);
  for (const auto& w : params) {
    const double a = include_amplitude ? w.amplitude : 1.0;
    for (std::size_t j = 0; j < times.size(); ++j)
      y[j] += a * std::sin(kTwoPi * (w.frequency * times[j] + w.phase));
  }
  if (divide_by_n && !params.empty())
    for (double& v : y) v /= static_cast<double>(params.size());
  return y;
}

/// Squared-error sum of the superposition against the frame targets.
inline double frame_loss(const std::vector<WaveParams>& params, const Frame& frame, bool include_amplitude = true,
                         bool divide_by_n = false) {
  const auto y = superpose(params, frame.times, include_amplitude, divide_by_n);
  double s = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double d = y[j] - frame.targets[j];
    s += d * d;
  }
  return s;
}

/// Observer for the parameter trajectory: (wave, pass, sample, params after the update).
using TraceFn = void (*)(void* ctx, std::size_t wave, std::size_t pass, std::size_t sample, const WaveParams& w);

/// Greedy per-wave stochastic gradient descent.
///
/// The superposition buffer h starts at zero. Wave k is trained for
/// `passes` sweeps over the frame, sample by sample, against the residual
/// y - h; afterwards h accumulates a_k sin(2 pi (f_k t + p_k)) at every
/// sample and the next wave starts from cfg.init. Throws DivergenceError
/// when a parameter becomes non-finite.
inline FrameFit fit_frame(const Frame& frame, const FitConfig& cfg, TraceFn trace = nullptr, void* ctx = nullptr) {
  cfg.validate();
  const std::size_t n = frame.size();
  if (n == 0) throw InvalidArgument("frame must contain at least one sample");
  if (frame.times.size() != n) throw InvalidArgument("frame times and targets differ in length");

  FrameFit fit;
  fit.start_index = frame.start_index;
  fit.final_h.assign(n, 0.0);
  fit.params.reserve(cfg.n_waves);
  auto& h = fit.final_h;

  for (std::size_t k = 0; k < cfg.n_waves; ++k) {
    WaveParams w = cfg.init;
    for (std::size_t pass = 0; pass < cfg.passes; ++pass) {
      for (std::size_t i = 0; i < n; ++i) {
        const double x = frame.times[i];
        const double y = frame.targets[i];
        if (cfg.order == UpdateOrder::Simultaneous) {
          const auto g = gradients(cfg.mode, w, h[i], x, y, cfg.step);
          w.amplitude -= g.ga;
          w.frequency -= g.gf;
          w.phase -= g.gp;
        } else {
          w.amplitude -= gradients(cfg.mode, w, h[i], x, y, cfg.step).ga;
          w.frequency -= gradients(cfg.mode, w, h[i], x, y, cfg.step).gf;
          w.phase -= gradients(cfg.mode, w, h[i], x, y, cfg.step).gp;
        }
        if (!std::isfinite(w.amplitude) || !std::isfinite(w.frequency) || !std::isfinite(w.phase))
          throw DivergenceError(k, pass, i);
        if (trace) trace(ctx, k, pass, i, w);
      }
    }
    for (std::size_t i = 0; i < n; ++i) h[i] += w.amplitude * std::sin(kTwoPi * (w.frequency * frame.times[i] + w.phase));
    fit.params.push_back(w);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(h[i])) throw DivergenceError(cfg.n_waves - 1, cfg.passes - 1, i);
    const double d = h[i] - frame.targets[i];
    fit.frame_loss += d * d;
  }
  return fit;
}

struct DecomposeOptions {
  std::size_t n_frames = 800;
  std::size_t frame_len = 1000;
  double rate_divisor = 44100.0;
  NormScope scope = NormScope::Global;
  /// 0 picks std::thread::hardware_concurrency().
  std::size_t threads = 0;
};

struct Decomposition {
  int sample_rate = 44100;
  std::size_t frame_len = 0;
  TimeAxis axis;
  FitConfig config;
  std::vector<FrameFit> frames;

  std::size_t diverged_count() const {
    return static_cast<std::size_t>(std::ranges::count_if(frames, [](const FrameFit& f) { return f.diverged; }));
  }
};

/// Fits every frame of the analyzed prefix. Frames are independent and are
/// spread over worker threads; results do not depend on the thread count.
/// A diverging frame is recorded (diverged = true, no params) and the rest
/// continue.
inline Decomposition decompose(const AudioSignal& signal, const FitConfig& cfg, const DecomposeOptions& opt) {
  cfg.validate();
  Decomposition out;
  out.sample_rate = signal.sample_rate;
  out.frame_len = opt.frame_len;
  out.config = cfg;
  out.axis = TimeAxis{opt.rate_divisor, opt.n_frames * opt.frame_len, opt.scope};
  const auto frames = segment_frames(signal, out.axis, opt.n_frames, opt.frame_len);
  out.frames.resize(frames.size());

  auto work_on = [&](std::size_t k) {
    try {
      out.frames[k] = fit_frame(frames[k], cfg);
    } catch (const DivergenceError& e) {
      FrameFit failed;
      failed.start_index = frames[k].start_index;
      failed.final_h.assign(frames[k].size(), 0.0);
      failed.diverged = true;
      failed.error = e.what();
      failed.frame_loss = frame_loss({}, frames[k]);
      out.frames[k] = std::move(failed);
    }
  };

  std::size_t threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, frames.size());
  if (threads <= 1) {
    for (std::size_t k = 0; k < frames.size(); ++k) work_on(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < frames.size(); k = next++) work_on(k);
    });
  pool.clear();  // joins
  return out;
}

struct Resynthesis {
  AudioSignal signal;
  std::size_t clamped = 0;
};

/// Concatenates each frame's superposition over its own times. Diverged
/// frames come out silent. Output is clamped to [-1, 1].
inline Resynthesis resynthesize(const std::vector<FrameFit>& fits, std::size_t frame_len, const TimeAxis& axis,
                                bool include_amplitude, bool divide_by_n, int sample_rate = 44100) {
  if (fits.empty()) throw InvalidArgument("resynthesize needs at least one frame fit");
  Resynthesis out;
  out.signal.sample_rate = sample_rate;
  out.signal.samples.reserve(fits.size() * frame_len);
  for (const auto& fit : fits) {
    std::vector<double> y(frame_len, 0.0);
    if (!fit.diverged) y = superpose(fit.params, axis.times(fit.start_index, frame_len), include_amplitude, divide_by_n);
    for (double v : y) {
      if (!std::isfinite(v) || v > 1.0 || v < -1.0) ++out.clamped;
      out.signal.samples.push_back(std::isfinite(v) ? std::clamp(v, -1.0, 1.0) : 0.0);
    }
  }
  return out;
}

inline Resynthesis resynthesize(const Decomposition& d) {
  return resynthesize(d.frames, d.frame_len, d.axis, d.config.include_amplitude_in_resynthesis,
                      d.config.divide_by_n_waves, d.sample_rate);
}

}  // namespace trigfit
