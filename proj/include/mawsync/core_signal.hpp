#pragma once

// Moving averages over normalized mono audio and the crossings of two of them.
//
// Indexing is 0-based throughout. For a window w, the moving-average value at
// index i is the mean of samples i .. i+w-1. For a pair of windows a < b the
// long average at index i is aligned with the short average at index i+b-a, so
// both windows end on sample i+b-1. Their difference
//
//   D[i] = M_b[i] - M_a[i+b-a],   i = 0 .. L-b
//
// drives the crossing test: a cross sits at i when D[i] != 0 and
// D[i] * D[i+1] <= 0. Runs of exact zeros are entered once and never re-emit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

namespace mawsync {

class InvalidParameter : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kPcmScale = 32768.0;
inline constexpr double kMinSample = -1.0;
inline constexpr double kMaxSample = 32767.0 / 32768.0;

inline double
clamp_sample (double x)
{
  return std::clamp (x, kMinSample, kMaxSample);
}

// round half away from zero; std::round already has these semantics
inline double
round_half_away (double x)
{
  return std::round (x);
}

inline std::int16_t
sample_to_pcm16 (double x)
{
  const double p = round_half_away (x * kPcmScale);
  return static_cast<std::int16_t> (std::clamp (p, -32768.0, 32767.0));
}

inline double
pcm16_to_sample (std::int16_t p)
{
  return static_cast<double> (p) / kPcmScale;
}

struct AudioClip
{
  std::vector<double> samples;
  int sample_rate = 44100;

  AudioClip() = default;
  AudioClip (std::vector<double> s, int rate) : samples (std::move (s)), sample_rate (rate)
  {
    if (rate <= 0)
      throw InvalidParameter ("sample rate must be positive");
  }

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::span<const double> view() const { return samples; }

  double energy() const
  {
    double e = 0;
    for (double x : samples)
      e += x * x;
    return e;
  }
};

// Snap every sample onto the 16-bit PCM grid (p / 32768).
inline AudioClip
quantize_to_pcm16 (AudioClip clip)
{
  for (double& x : clip.samples)
    x = pcm16_to_sample (sample_to_pcm16 (x));
  return clip;
}

struct MAParams
{
  std::size_t a = 26;
  std::size_t b = 40;

  void validate (std::size_t length) const
  {
    if (a == 0 || a >= b)
      throw InvalidParameter ("moving-average windows need 0 < a < b (got a=" + std::to_string (a) +
                              ", b=" + std::to_string (b) + ")");
    if (b >= length)
      throw InvalidParameter ("window b=" + std::to_string (b) + " must be shorter than the clip (" +
                              std::to_string (length) + " samples)");
  }
};

struct MASequence
{
  std::vector<double> values;
  std::size_t window = 0;

  std::size_t size() const { return values.size(); }
  double operator[] (std::size_t i) const { return values[i]; }
};

struct CrossEvent
{
  std::size_t index = 0;  // position i in M_b where the crossing test holds
  std::size_t gap = 0;    // indices advanced since the previous cross (or since the scan start)

  friend bool operator== (const CrossEvent&, const CrossEvent&) = default;
};

namespace detail {

inline void
check_window (std::size_t length, std::size_t window)
{
  if (window < 1 || window > length)
    throw InvalidParameter ("window " + std::to_string (window) + " out of range [1, " +
                            std::to_string (length) + "]");
}

inline double
direct_sum (std::span<const double> x, std::size_t begin, std::size_t window)
{
  double s = 0;
  for (std::size_t k = begin; k < begin + window; k++)
    s += x[k];
  return s;
}

}  // namespace detail

// Running update is re-anchored with a direct sum every this many steps.
inline constexpr std::size_t kDriftResyncInterval = 4096;

// Outputs at least this long (32 MB of doubles) bypass the cache on store.
inline constexpr std::size_t kStreamingOutputSize = std::size_t { 1 } << 22;

namespace detail {

// out[i] = scale * (x[i] + ... + x[i+w-1]).
//
// Every block of kDriftResyncInterval outputs starts from a direct sum and is
// then updated by incoming-minus-outgoing differences. Blocks are independent,
// so four of them run in lockstep to keep several add chains in flight; each
// block sees exactly the operations a plain sequential pass would apply.
inline void
scaled_window_sums (std::span<const double> x, std::size_t window, double scale, double* out)
{
  constexpr std::size_t B = kDriftResyncInterval;
  constexpr std::size_t lanes = 4;
  const std::size_t n = x.size() - window + 1;
  const double* in = x.data();
#if defined(__SSE2__)
  const bool streaming = n >= kStreamingOutputSize && reinterpret_cast<std::uintptr_t> (out) % 16 == 0;
#endif

  auto run_block = [&] (std::size_t begin) {
    const std::size_t end = std::min (n, begin + B);
    double v = direct_sum (x, begin, window);
    out[begin] = v * scale;
    for (std::size_t i = begin + 1; i < end; i++)
      {
        v += in[i + window - 1] - in[i - 1];
        out[i] = v * scale;
      }
  };

  std::size_t begin = 0;
  for (; begin + lanes * B <= n; begin += lanes * B)
    {
      double v[lanes];
      const double* add[lanes];
      const double* sub[lanes];
      double* dst[lanes];
      for (std::size_t j = 0; j < lanes; j++)
        {
          const std::size_t b0 = begin + j * B;
          v[j] = direct_sum (x, b0, window);
          out[b0] = v[j] * scale;
          add[j] = in + b0 + window - 1;
          sub[j] = in + b0 - 1;
          dst[j] = out + b0;
        }
#if defined(__SSE2__)
      if (streaming)
        {
          // pairs of outputs per lane, written around the cache
          for (std::size_t j = 0; j < lanes; j++)
            {
              const double first = dst[j][0];
              v[j] += add[j][1] - sub[j][1];
              _mm_stream_pd (dst[j], _mm_set_pd (v[j] * scale, first));
            }
          for (std::size_t t = 2; t < B; t += 2)
            for (std::size_t j = 0; j < lanes; j++)
              {
                v[j] += add[j][t] - sub[j][t];
                const double lo = v[j] * scale;
                v[j] += add[j][t + 1] - sub[j][t + 1];
                _mm_stream_pd (dst[j] + t, _mm_set_pd (v[j] * scale, lo));
              }
          continue;
        }
#endif
      for (std::size_t t = 1; t < B; t++)
        for (std::size_t j = 0; j < lanes; j++)
          {
            v[j] += add[j][t] - sub[j][t];
            dst[j][t] = v[j] * scale;
          }
    }
#if defined(__SSE2__)
  if (streaming)
    _mm_sfence();
#endif
  for (; begin < n; begin += B)
    run_block (begin);
}

}  // namespace detail

// Sliding window sums: out[i] = x[i] + ... + x[i+w-1].
inline std::vector<double>
window_sums (std::span<const double> x, std::size_t window)
{
  detail::check_window (x.size(), window);
  std::vector<double> out (x.size() - window + 1);
  detail::scaled_window_sums (x, window, 1.0, out.data());
  return out;
}

namespace detail {

inline void
check_output (std::size_t length, std::size_t window, std::span<double> out)
{
  check_window (length, window);
  if (out.size() != length - window + 1)
    throw InvalidParameter ("output span holds " + std::to_string (out.size()) + " values, need " +
                            std::to_string (length - window + 1));
}

}  // namespace detail

// Direct summation of every window into out (size L - window + 1), O(L * window).
inline void
moving_average_into (std::span<const double> x, std::size_t window, std::span<double> out)
{
  detail::check_output (x.size(), window, out);
  const double w = static_cast<double> (window);
  for (std::size_t i = 0; i < out.size(); i++)
    out[i] = detail::direct_sum (x, i, window) / w;
}

// Moving average by direct summation of every window, O(L * window).
inline MASequence
moving_average (std::span<const double> x, std::size_t window)
{
  detail::check_window (x.size(), window);
  MASequence ma;
  ma.window = window;
  ma.values.resize (x.size() - window + 1);
  moving_average_into (x, window, ma.values);
  return ma;
}

inline MASequence
moving_average (const AudioClip& clip, std::size_t window)
{
  return moving_average (clip.view(), window);
}

// Same contract as moving_average_into, O(L) via v[i+1] = v[i] - x[i] + x[i+w].
inline void
moving_average_fast_into (std::span<const double> x, std::size_t window, std::span<double> out)
{
  detail::check_output (x.size(), window, out);
  detail::scaled_window_sums (x, window, 1.0 / static_cast<double> (window), out.data());
}

inline MASequence
moving_average_fast (std::span<const double> x, std::size_t window)
{
  detail::check_window (x.size(), window);
  MASequence ma;
  ma.window = window;
  ma.values.resize (x.size() - window + 1);
  moving_average_fast_into (x, window, ma.values);
  return ma;
}

inline MASequence
moving_average_fast (const AudioClip& clip, std::size_t window)
{
  return moving_average_fast (clip.view(), window);
}

// Adjacent pairs whose product is <= 0, excluding pairs that are both zero.
inline std::size_t
zero_crossing_count (const MASequence& seq)
{
  if (seq.values.empty())
    throw InvalidParameter ("zero_crossing_count needs a non-empty sequence");
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < seq.values.size(); i++)
    {
      const double p = seq.values[i], q = seq.values[i + 1];
      if ((p == 0 && q == 0))
        continue;
      if ((p <= 0 && q >= 0) || (p >= 0 && q <= 0))
        count++;
    }
  return count;
}

/**
 * Window sums of both averages plus the crossing events of their difference.
 *
 * The crossing test compares a * sum_b[i] with b * sum_a[i+b-a] instead of the
 * two divided means. On samples that sit on the 16-bit grid every sum and
 * product here is exact in double precision, so adding the same constant
 * (also on the grid) to all samples of a window leaves its sign untouched.
 * Embedder and detector both go through this type.
 */
class CrossScan
{
public:
  CrossScan (std::span<const double> x, MAParams ma, std::size_t start = 0) : ma_ (ma)
  {
    ma.validate (x.size());
    sum_b_ = window_sums (x, ma.b);
    sum_a_ = window_sums (x, ma.a);
    const std::size_t n_diff = sum_b_.size();  // D[0 .. L-b]
    if (start >= x.size())
      throw InvalidParameter ("scan start " + std::to_string (start) + " outside clip");

    std::size_t prev = start;
    for (std::size_t i = start; i + 1 < n_diff; i++)
      {
        const int s0 = diff_sign (i);
        if (s0 == 0)
          continue;
        const int s1 = diff_sign (i + 1);
        if (s0 * s1 <= 0)
          {
            events_.push_back (CrossEvent { i, i - prev });
            prev = i;
          }
      }
  }

  CrossScan (const AudioClip& clip, MAParams ma, std::size_t start = 0)
    : CrossScan (clip.view(), ma, start)
  {
  }

  const MAParams& params() const { return ma_; }
  const std::vector<CrossEvent>& events() const { return events_; }

  // sign of D[i] = M_b[i] - M_a[i+b-a]
  int diff_sign (std::size_t i) const
  {
    const double lhs = static_cast<double> (ma_.a) * sum_b_[i];
    const double rhs = static_cast<double> (ma_.b) * sum_a_[i + ma_.b - ma_.a];
    return (lhs > rhs) - (lhs < rhs);
  }

  double diff (std::size_t i) const
  {
    return sum_b_[i] / static_cast<double> (ma_.b) - sum_a_[i + ma_.b - ma_.a] / static_cast<double> (ma_.a);
  }

  double mean_b (std::size_t i) const { return sum_b_[i] / static_cast<double> (ma_.b); }
  double mean_a (std::size_t i) const { return sum_a_[i] / static_cast<double> (ma_.a); }
  std::size_t diff_size() const { return sum_b_.size(); }

private:
  MAParams ma_;
  std::vector<double> sum_b_;
  std::vector<double> sum_a_;
  std::vector<CrossEvent> events_;
};

inline std::vector<CrossEvent>
find_crosses (std::span<const double> x, const MAParams& params, std::size_t start = 0)
{
  return CrossScan (x, params, start).events();
}

inline std::vector<CrossEvent>
find_crosses (const AudioClip& clip, const MAParams& params, std::size_t start = 0)
{
  return find_crosses (clip.view(), params, start);
}

}  // namespace mawsync
