#pragma once

// Seedable attack simulations used to measure robustness: additive noise,
// requantization, resampling, Butterworth low-pass, random cropping, jitter,
// time scaling, and an optional MP3 round trip through an external encoder.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "butterworth.hpp"
#include "core_signal.hpp"
#include "resampler.hpp"
#include "wav.hpp"

namespace mawsync {

inline AudioClip
awgn (const AudioClip& clip, double snr_db, std::uint64_t seed)
{
  if (std::isinf (snr_db) && snr_db > 0)
    return clip;
  if (!std::isfinite (snr_db))
    throw InvalidParameter ("AWGN target SNR must be finite (or +inf for identity)");
  const double signal = clip.energy();
  if (signal <= 0)
    throw InvalidParameter ("AWGN needs a clip with nonzero energy");

  std::mt19937_64 rng (seed);
  std::normal_distribution<double> gauss (0.0, 1.0);
  std::vector<double> noise (clip.size());
  double noise_energy = 0;
  for (double& n : noise)
    {
      n = gauss (rng);
      noise_energy += n * n;
    }
  const double gain = std::sqrt (signal / (noise_energy * std::pow (10.0, snr_db / 10.0)));
  AudioClip out = clip;
  for (std::size_t i = 0; i < out.size(); i++)
    out.samples[i] = clamp_sample (out.samples[i] + gain * noise[i]);
  return out;
}

// Round onto 2^bits levels over [-1, 1), step 2^(1-bits).
inline AudioClip
requantize (const AudioClip& clip, unsigned bits)
{
  if (bits < 2 || bits > 16)
    throw InvalidParameter ("requantization depth must be in [2, 16] bits");
  const double q = std::ldexp (1.0, 1 - static_cast<int> (bits));
  AudioClip out = clip;
  for (double& x : out.samples)
    x = std::clamp (round_half_away (x / q) * q, -1.0, 1.0 - q);
  return out;
}

// Down to intermediate_rate and back up; output keeps the input length.
inline AudioClip
resample (const AudioClip& clip, int intermediate_rate, const SincKernel& kernel = {})
{
  const int rate = clip.sample_rate;
  if (intermediate_rate <= 0)
    throw InvalidParameter ("intermediate rate must be positive");
  if (intermediate_rate == rate)
    return clip;
  const int hi = std::max (rate, intermediate_rate), lo = std::min (rate, intermediate_rate);
  if (hi % lo != 0 || hi / lo > 16)
    throw InvalidParameter ("unsupported resampling ratio " + std::to_string (rate) + " -> " +
                            std::to_string (intermediate_rate) + " (needs an integer factor up to 16)");

  const double ratio = static_cast<double> (intermediate_rate) / rate;
  const auto mid_len = static_cast<std::size_t> (std::llround (static_cast<double> (clip.size()) * ratio));
  const auto mid = sinc_resample (clip.view(), mid_len, 1.0 / ratio, ratio, kernel);
  auto back = sinc_resample (mid, clip.size(), ratio, 1.0 / ratio, kernel);
  for (double& x : back)
    x = clamp_sample (x);
  return AudioClip (std::move (back), rate);
}

// Group delay of the filter is left in place.
inline AudioClip
lowpass_butterworth (const AudioClip& clip, std::size_t order, double cutoff_hz)
{
  auto sections = design_butterworth_lowpass (order, cutoff_hz, clip.sample_rate);
  auto y = filter_cascade (std::move (sections), clip.view());
  for (double& x : y)
    x = clamp_sample (x);
  return AudioClip (std::move (y), clip.sample_rate);
}

/**
 * Remove round(fraction * L) samples as `segments` non-overlapping pieces of
 * (nearly) equal length at random positions.
 */
inline AudioClip
crop_random (const AudioClip& clip, double fraction, std::uint64_t seed, std::size_t segments = 10)
{
  if (!(fraction >= 0) || !(fraction < 1))
    throw InvalidParameter ("crop fraction must be in [0, 1)");
  if (segments == 0)
    throw InvalidParameter ("crop needs at least one segment");
  const std::size_t len = clip.size();
  const auto total = static_cast<std::size_t> (std::llround (fraction * static_cast<double> (len)));
  if (total == 0)
    return clip;
  const std::size_t count = std::min (segments, total);

  std::mt19937_64 rng (seed);
  std::uniform_int_distribution<std::size_t> pick (0, len - total);
  std::vector<std::size_t> offsets (count);
  for (auto& o : offsets)
    o = pick (rng);
  std::sort (offsets.begin(), offsets.end());

  std::vector<bool> removed (len, false);
  std::size_t consumed = 0;
  for (std::size_t j = 0; j < count; j++)
    {
      const std::size_t seg_len = total / count + (j < total % count ? 1 : 0);
      const std::size_t begin = offsets[j] + consumed;
      for (std::size_t k = begin; k < begin + seg_len; k++)
        removed[k] = true;
      consumed += seg_len;
    }

  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.reserve (len - total);
  for (std::size_t k = 0; k < len; k++)
    if (!removed[k])
      out.samples.push_back (clip.samples[k]);
  return out;
}

/**
 * Delete one uniformly chosen sample from every complete block of period_n
 * samples. A period at least as long as the clip removes a single sample.
 */
inline AudioClip
jitter (const AudioClip& clip, std::size_t period_n, std::uint64_t seed)
{
  if (period_n < 2)
    throw InvalidParameter ("jitter period must be at least 2");
  const std::size_t len = clip.size();
  if (len == 0)
    return clip;

  std::mt19937_64 rng (seed);
  std::vector<bool> removed (len, false);
  if (period_n >= len)
    {
      removed[std::uniform_int_distribution<std::size_t> (0, len - 1) (rng)] = true;
    }
  else
    {
      std::uniform_int_distribution<std::size_t> pick (0, period_n - 1);
      for (std::size_t block = 0; block + period_n <= len; block += period_n)
        removed[block + pick (rng)] = true;
    }

  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.reserve (len);
  for (std::size_t k = 0; k < len; k++)
    if (!removed[k])
      out.samples.push_back (clip.samples[k]);
  return out;
}

// Resampling-based time scaling (pitch moves with tempo); length round(L * (1 + percent/100)).
inline AudioClip
time_scale (const AudioClip& clip, double percent, const SincKernel& kernel = {})
{
  if (!(percent >= -15 && percent <= 15))
    throw InvalidParameter ("time scale percent must be in [-15, 15]");
  if (percent == 0)
    return clip;
  const double factor = 1.0 + percent / 100.0;
  const auto out_len = static_cast<std::size_t> (std::llround (static_cast<double> (clip.size()) * factor));
  auto y = sinc_resample (clip.view(), out_len, 1.0 / factor, factor, kernel);
  for (double& x : y)
    x = clamp_sample (x);
  return AudioClip (std::move (y), clip.sample_rate);
}

/// Path of the external MP3 tool (lame-compatible CLI), if any.
inline std::optional<std::string>
find_mp3_tool()
{
  if (const char* env = std::getenv ("MAWSYNC_LAME"); env && *env)
    return std::string (env);
  if (const char* path = std::getenv ("PATH"))
    {
      std::stringstream ss (path);
      std::string dir;
      while (std::getline (ss, dir, ':'))
        {
          if (dir.empty())
            continue;
          const auto candidate = std::filesystem::path (dir) / "lame";
          std::error_code ec;
          if (std::filesystem::is_regular_file (candidate, ec))
            return candidate.string();
        }
    }
  return std::nullopt;
}

// Encode at kbps and decode again through the external tool; nullopt when no tool is available.
inline std::optional<AudioClip>
mp3_roundtrip (const AudioClip& clip, int kbps)
{
  const auto tool = find_mp3_tool();
  if (!tool)
    return std::nullopt;
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path();
  const auto stem = "mawsync_" + std::to_string (std::random_device {}());
  const auto wav_in = dir / (stem + "_in.wav"), mp3 = dir / (stem + ".mp3"), wav_out = dir / (stem + "_out.wav");
  write_wav (wav_in.string(), clip);
  const std::string q = "'";
  const std::string enc = q + *tool + q + " --quiet -b " + std::to_string (kbps) + " " + q + wav_in.string() + q + " " + q + mp3.string() + q;
  const std::string dec = q + *tool + q + " --quiet --decode " + q + mp3.string() + q + " " + q + wav_out.string() + q;
  std::optional<AudioClip> out;
  if (std::system (enc.c_str()) == 0 && std::system (dec.c_str()) == 0)
    out = read_wav (wav_out.string());
  std::error_code ec;
  fs::remove (wav_in, ec);
  fs::remove (mp3, ec);
  fs::remove (wav_out, ec);
  if (!out)
    throw FormatError ("external MP3 tool '" + *tool + "' failed");
  return out;
}

enum class AttackKind
{
  none,
  awgn,
  requantize,
  resample,
  lowpass,
  crop,
  jitter,
  tsm,
  mp3
};

struct AttackSpec
{
  AttackKind kind = AttackKind::none;
  double value = 0;                    // SNR dB / bits / rate Hz / cutoff Hz / fraction / period / percent / kbps
  std::size_t order = 6;               // lowpass
  std::size_t segments = 10;           // crop
  std::optional<std::uint64_t> seed;   // awgn, crop, jitter

  bool needs_seed() const
  {
    return kind == AttackKind::awgn || kind == AttackKind::crop || kind == AttackKind::jitter;
  }

  // Length-preserving attacks keep samples aligned with the input.
  bool preserves_length() const
  {
    return kind == AttackKind::none || kind == AttackKind::awgn || kind == AttackKind::requantize ||
      kind == AttackKind::resample || kind == AttackKind::lowpass;
  }

  std::string
  to_string() const
  {
    auto num = [] (double v) {
      std::ostringstream os;
      os << v;
      return os.str();
    };
    std::string s;
    switch (kind)
      {
      case AttackKind::none:       return "none";
      case AttackKind::awgn:       s = "awgn:" + num (value); break;
      case AttackKind::requantize: s = "requantize:" + num (value); break;
      case AttackKind::resample:   s = "resample:" + num (value); break;
      case AttackKind::lowpass:    s = "lowpass:" + num (value) + ":order=" + std::to_string (order); break;
      case AttackKind::crop:       s = "crop:" + num (value) + ":segments=" + std::to_string (segments); break;
      case AttackKind::jitter:     s = "jitter:" + num (value); break;
      case AttackKind::tsm:        s = "tsm:" + num (value); break;
      case AttackKind::mp3:        s = "mp3:" + num (value); break;
      }
    if (seed)
      s += ":seed=" + std::to_string (*seed);
    return s;
  }

  void
  validate() const
  {
    if (needs_seed() && !seed)
      throw InvalidParameter ("attack '" + to_string() + "' needs an explicit seed=N");
    switch (kind)
      {
      case AttackKind::requantize:
        if (value < 2 || value > 16 || value != std::floor (value))
          throw InvalidParameter ("requantize depth must be an integer in [2, 16]");
        break;
      case AttackKind::resample:
        if (value <= 0 || value != std::floor (value))
          throw InvalidParameter ("resample rate must be a positive integer");
        break;
      case AttackKind::crop:
        if (!(value >= 0 && value < 1))
          throw InvalidParameter ("crop fraction must be in [0, 1)");
        break;
      case AttackKind::jitter:
        if (value < 2 || value != std::floor (value))
          throw InvalidParameter ("jitter period must be an integer >= 2");
        break;
      case AttackKind::tsm:
        if (!(value >= -15 && value <= 15))
          throw InvalidParameter ("tsm percent must be in [-15, 15]");
        break;
      case AttackKind::mp3:
        if (value <= 0)
          throw InvalidParameter ("mp3 bit rate must be positive");
        break;
      default:
        break;
      }
  }

  /// Parse "kind[:value][:key=value...]", e.g. "awgn:55:seed=7" or "lowpass:8000:order=6".
  static AttackSpec
  parse (const std::string& text)
  {
    std::vector<std::string> parts;
    std::stringstream ss (text);
    std::string item;
    while (std::getline (ss, item, ':'))
      parts.push_back (item);
    if (parts.empty() || parts[0].empty())
      throw InvalidParameter ("empty attack spec");

    AttackSpec spec;
    const std::string& kind = parts[0];
    if (kind == "none")
      spec.kind = AttackKind::none;
    else if (kind == "awgn")
      spec.kind = AttackKind::awgn;
    else if (kind == "requantize" || kind == "requant")
      spec.kind = AttackKind::requantize;
    else if (kind == "resample")
      spec.kind = AttackKind::resample;
    else if (kind == "lowpass")
      spec.kind = AttackKind::lowpass;
    else if (kind == "crop")
      spec.kind = AttackKind::crop;
    else if (kind == "jitter")
      spec.kind = AttackKind::jitter;
    else if (kind == "tsm")
      spec.kind = AttackKind::tsm;
    else if (kind == "mp3")
      spec.kind = AttackKind::mp3;
    else
      throw InvalidParameter ("unknown attack kind '" + kind + "'");

    auto to_double = [&] (const std::string& s) {
      std::size_t used = 0;
      double v = 0;
      try
        {
          v = std::stod (s, &used);
        }
      catch (const std::exception&)
        {
          used = 0;
        }
      if (used != s.size() || s.empty())
        throw InvalidParameter ("bad number '" + s + "' in attack spec '" + text + "'");
      return v;
    };
    auto to_uint = [&] (const std::string& s) {
      const double v = to_double (s);
      if (v < 0 || v != std::floor (v))
        throw InvalidParameter ("expected a non-negative integer, got '" + s + "' in '" + text + "'");
      return static_cast<std::uint64_t> (v);
    };

    bool have_value = false;
    for (std::size_t i = 1; i < parts.size(); i++)
      {
        const auto eq = parts[i].find ('=');
        if (eq == std::string::npos)
          {
            if (have_value)
              throw InvalidParameter ("attack spec '" + text + "' has more than one value");
            spec.value = to_double (parts[i]);
            have_value = true;
            continue;
          }
        const std::string key = parts[i].substr (0, eq), val = parts[i].substr (eq + 1);
        if (key == "seed")
          spec.seed = to_uint (val);
        else if (key == "order")
          spec.order = static_cast<std::size_t> (to_uint (val));
        else if (key == "segments")
          spec.segments = static_cast<std::size_t> (to_uint (val));
        else
          throw InvalidParameter ("unknown key '" + key + "' in attack spec '" + text + "'");
      }
    if (!have_value && spec.kind != AttackKind::none)
      throw InvalidParameter ("attack spec '" + text + "' is missing its value");
    spec.validate();
    return spec;
  }
};

struct AttackResult
{
  AudioClip clip;
  bool ran = true;
  std::string note;  // why an attack did not run
};

inline AttackResult
apply_attack (const AudioClip& clip, const AttackSpec& spec)
{
  spec.validate();
  switch (spec.kind)
    {
    case AttackKind::none:       return { clip };
    case AttackKind::awgn:       return { awgn (clip, spec.value, *spec.seed) };
    case AttackKind::requantize: return { requantize (clip, static_cast<unsigned> (spec.value)) };
    case AttackKind::resample:   return { resample (clip, static_cast<int> (spec.value)) };
    case AttackKind::lowpass:    return { lowpass_butterworth (clip, spec.order, spec.value) };
    case AttackKind::crop:       return { crop_random (clip, spec.value, *spec.seed, spec.segments) };
    case AttackKind::jitter:     return { jitter (clip, static_cast<std::size_t> (spec.value), *spec.seed) };
    case AttackKind::tsm:        return { time_scale (clip, spec.value) };
    case AttackKind::mp3:
      if (auto out = mp3_roundtrip (clip, static_cast<int> (spec.value)))
        return { std::move (*out) };
      return { clip, false, "not run: no MP3 encoder found (set MAWSYNC_LAME or put lame on PATH)" };
    }
  return { clip };
}

// Attacks compose left to right.
inline AttackResult
apply_chain (const AudioClip& clip, const std::vector<AttackSpec>& chain)
{
  AttackResult result { clip };
  for (const auto& spec : chain)
    {
      auto step = apply_attack (result.clip, spec);
      if (!step.ran)
        return step;
      result.clip = std::move (step.clip);
    }
  return result;
}

inline std::string
chain_to_string (const std::vector<AttackSpec>& chain)
{
  if (chain.empty())
    return "none";
  std::string s;
  for (std::size_t i = 0; i < chain.size(); i++)
    {
      if (i)
        s += " > ";
      s += chain[i].to_string();
    }
  return s;
}

}  // namespace mawsync
