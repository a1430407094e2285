#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <ostream>
#include <string>
#include <vector>

#include "trigfit/csv.hpp"
#include "trigfit/error.hpp"

namespace trigfit {

struct AudioSignal {
  int sample_rate = 44100;
  std::vector<double> samples;  // in [-1, 1]
};

namespace detail {

inline std::uint16_t read_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_u16(std::string& out, std::uint16_t v) {
  out += static_cast<char>(v & 0xff);
  out += static_cast<char>((v >> 8) & 0xff);
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

}  // namespace detail

/// Decodes a RIFF/WAVE PCM 16-bit buffer and returns channel 0, scaled by
/// 1/32768. Unknown chunks are skipped.
inline AudioSignal decode_wav_left(const std::vector<unsigned char>& bytes) {
  using detail::read_u16;
  using detail::read_u32;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t channels = 0, block_align = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(reinterpret_cast<const char*>(bytes.data() + pos), 4);
    const std::uint32_t size = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + 16 > bytes.size()) throw IoError("truncated 'fmt ' chunk");
      const unsigned char* f = bytes.data() + body;
      std::uint16_t format = read_u16(f);
      channels = read_u16(f + 2);
      rate = read_u32(f + 4);
      block_align = read_u16(f + 12);
      const std::uint16_t bits = read_u16(f + 14);
      if (format == 0xFFFE && size >= 40 && body + 26 <= bytes.size()) format = read_u16(f + 24);
      if (format != 1) throw FormatError("'fmt ' chunk: only PCM encoding is supported (format tag " +
                                         std::to_string(format) + ")");
      if (bits != 16) throw FormatError("'fmt ' chunk: only 16-bit samples are supported, got " + std::to_string(bits));
      if (channels < 1 || channels > 2)
        throw FormatError("'fmt ' chunk: expected 1 or 2 channels, got " + std::to_string(channels));
      if (rate == 0) throw FormatError("'fmt ' chunk: sample rate is zero");
      if (block_align != 2 * channels) throw FormatError("'fmt ' chunk: inconsistent block alignment");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("'data' chunk precedes 'fmt ' chunk");
      if (body + size > bytes.size()) throw IoError("truncated 'data' chunk");
      AudioSignal sig;
      sig.sample_rate = static_cast<int>(rate);
      const std::size_t n = size / block_align;
      sig.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto raw = static_cast<std::int16_t>(read_u16(bytes.data() + body + i * block_align));
        sig.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      return sig;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw FormatError("missing 'fmt ' chunk");
  throw FormatError("missing 'data' chunk");
}

inline AudioSignal load_wav_left(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav_left(bytes);
}

/// Quantizes to 16-bit PCM: round(v * 32768), clamped to [-32768, 32767].
/// `clamped` counts samples outside [-1, 1] or non-finite (written as 0).
inline std::string encode_wav(const AudioSignal& signal, std::size_t* clamped = nullptr) {
  if (signal.sample_rate <= 0) throw InvalidArgument("sample rate must be positive");
  const auto n = signal.samples.size();
  if (n * 2 > 0xFFFFFFFFull - 36) throw InvalidArgument("signal too long for a WAV file");
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  detail::put_u32(out, static_cast<std::uint32_t>(36 + 2 * n));
  out += "WAVEfmt ";
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);
  detail::put_u16(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  detail::put_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * 2);
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  out += "data";
  detail::put_u32(out, static_cast<std::uint32_t>(2 * n));
  std::size_t count = 0;
  for (double v : signal.samples) {
    long q = 0;
    if (!std::isfinite(v)) {
      ++count;
    } else {
      if (v > 1.0 || v < -1.0) ++count;
      q = std::clamp(std::lround(v * 32768.0), -32768L, 32767L);
    }
    detail::put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (clamped) *clamped = count;
  return out;
}

/// Writes a mono 16-bit PCM file; returns the number of clamped samples.
inline std::size_t write_wav(const AudioSignal& signal, const std::string& path) {
  std::size_t clamped = 0;
  const auto bytes = encode_wav(signal, &clamped);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path);
  return clamped;
}

// ---------------------------------------------------------------------------
// Time axis

/// Raw time t_i = i / rate_divisor, standardized as (t - mean) / std.
struct TimeNormalization {
  double rate_divisor = 44100.0;
  double mean = 0.0;
  double std = 1.0;

  double apply(std::size_t index) const { return (static_cast<double>(index) / rate_divisor - mean) / std; }
};

/// Mean and population standard deviation of the raw times of samples
/// [offset, offset + n_samples). The raw times are an arithmetic sequence, so
/// both statistics have closed forms.
inline TimeNormalization compute_time_normalization(std::size_t n_samples, double rate_divisor = 44100.0,
                                                    std::size_t offset = 0) {
  if (n_samples < 2) throw InvalidArgument("time normalization needs at least 2 samples");
  if (!(rate_divisor > 0.0) || !std::isfinite(rate_divisor)) throw InvalidArgument("rate divisor must be positive");
  const double n = static_cast<double>(n_samples);
  const double mean = (static_cast<double>(offset) + (n - 1.0) / 2.0) / rate_divisor;
  const double sd = std::sqrt((n * n - 1.0) / 12.0) / rate_divisor;
  return {rate_divisor, mean, sd};
}

/// How frame times are standardized: over the whole analyzed prefix, or
/// separately inside each frame.
enum class NormScope { Global, PerFrame };

/// Recipe for the normalized time of any sample of an analyzed prefix.
struct TimeAxis {
  double rate_divisor = 44100.0;
  std::size_t n_samples = 0;  // analyzed prefix length
  NormScope scope = NormScope::Global;

  TimeNormalization normalization_for(std::size_t start, std::size_t len) const {
    return scope == NormScope::Global ? compute_time_normalization(n_samples, rate_divisor)
                                      : compute_time_normalization(len, rate_divisor, start);
  }

  std::vector<double> times(std::size_t start, std::size_t len) const {
    const auto norm = normalization_for(start, len);
    std::vector<double> t(len);
    for (std::size_t i = 0; i < len; ++i) t[i] = norm.apply(start + i);
    return t;
  }
};

struct Frame {
  std::size_t start_index = 0;
  std::vector<double> times;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
};

/// Non-overlapping frames [k * frame_len, (k + 1) * frame_len), with times
/// from a single normalization shared by all frames.
inline std::vector<Frame> segment_frames(const AudioSignal& signal, const TimeNormalization& norm,
                                         std::size_t n_frames, std::size_t frame_len) {
  if (n_frames == 0 || frame_len == 0) throw InvalidArgument("frame count and length must be positive");
  const std::size_t need = n_frames * frame_len;
  if (need > signal.samples.size())
    throw InvalidArgument("need " + std::to_string(need) + " samples for " + std::to_string(n_frames) + " x " +
                          std::to_string(frame_len) + " frames, signal has " +
                          std::to_string(signal.samples.size()));
  std::vector<Frame> frames(n_frames);
  for (std::size_t k = 0; k < n_frames; ++k) {
    auto& fr = frames[k];
    fr.start_index = k * frame_len;
    fr.times.resize(frame_len);
    for (std::size_t i = 0; i < frame_len; ++i) fr.times[i] = norm.apply(fr.start_index + i);
    const auto first = signal.samples.begin() + static_cast<std::ptrdiff_t>(fr.start_index);
    fr.targets.assign(first, first + static_cast<std::ptrdiff_t>(frame_len));
  }
  return frames;
}

/// Frames with times taken from `axis` (global or per-frame statistics).
inline std::vector<Frame> segment_frames(const AudioSignal& signal, const TimeAxis& axis, std::size_t n_frames,
                                         std::size_t frame_len) {
  if (axis.scope == NormScope::Global)
    return segment_frames(signal, compute_time_normalization(axis.n_samples, axis.rate_divisor), n_frames,
                          frame_len);
  auto frames = segment_frames(signal, TimeNormalization{}, n_frames, frame_len);
  for (auto& fr : frames) fr.times = axis.times(fr.start_index, frame_len);
  return frames;
}

/// start_index,time,target, one line per sample.
inline void write_frames_csv(const std::vector<Frame>& frames, std::ostream& out) {
  out << "start_index,time,target\n";
  for (const auto& fr : frames)
    for (std::size_t i = 0; i < fr.size(); ++i)
      out << fr.start_index << ',' << csv::num(fr.times[i]) << ',' << csv::num(fr.targets[i]) << '\n';
}

}  // namespace trigfit
