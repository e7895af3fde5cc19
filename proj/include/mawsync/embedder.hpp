#pragma once

// Embedding of synchronization codes (and sync + payload frames) at crossings
// of two moving averages using quantization index modulation on the long
// average M_b.
//
// A bit is carried by u = M_b[i+1] at a qualifying cross i. The whole segment
// of samples ending at sample i+b is shifted by the constant d = u' - u, which
// moves M_b[i+1] onto the lattice of the bit and leaves the sign of every
// difference window that lies inside the segment unchanged, so the cross
// itself survives the edit.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_signal.hpp"
#include "sync_codes.hpp"

namespace mawsync {

class EmbedError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class Smoothing
{
  none,          // EA: hard segment boundaries
  payload_only,  // EB: ramp only into payload segments
  all            // EC: ramp into every segment
};

inline const char*
smoothing_name (Smoothing m)
{
  switch (m)
    {
    case Smoothing::none:         return "EA";
    case Smoothing::payload_only: return "EB";
    case Smoothing::all:          return "EC";
    }
  return "?";
}

inline Smoothing
parse_smoothing (const std::string& name)
{
  if (name == "EA" || name == "ea" || name == "none")
    return Smoothing::none;
  if (name == "EB" || name == "eb" || name == "payload")
    return Smoothing::payload_only;
  if (name == "EC" || name == "ec" || name == "all")
    return Smoothing::all;
  throw InvalidParameter ("unknown smoothing mode '" + name + "' (expected EA, EB or EC)");
}

struct EmbedParams
{
  MAParams ma;
  double strength = 0.016;
  std::size_t ramp_length = 5;           // T_N
  double shift_quantum = 1.0 / kPcmScale;  // segment shifts snap to this grid; 0 disables
  std::size_t guard = 0;                 // margin below b for crosses skipped inside a sync code

  // lattice offsets: d[+1] = s/4, d[-1] = 3s/4
  double offset (int bit) const { return bit > 0 ? strength / 4 : 3 * strength / 4; }

  void
  validate() const
  {
    if (!(strength > 0) || !std::isfinite (strength))
      throw InvalidParameter ("embedding strength must be positive");
    if (shift_quantum < 0)
      throw InvalidParameter ("shift quantum must be non-negative");
    if (ma.a == 0 || ma.a >= ma.b)
      throw InvalidParameter ("moving-average windows need 0 < a < b");
  }
};

struct FrameLayout
{
  BitSequence sync = default_sync_code();
  BitSequence payload;
  bool repeat = true;  // tile frames until the clip runs out of crosses

  std::size_t frame_bits() const { return sync.size() + payload.size(); }
};

struct EmbeddedBit
{
  std::size_t cross_index = 0;
  std::size_t segment_begin = 0;  // first shifted sample
  std::size_t segment_end = 0;    // last shifted sample (inclusive)
  double shift = 0;               // c: full shift of the segment
  double prev_shift = 0;          // c': shift carried by the sample just before the segment
  int bit = 1;
  bool sync = true;
  bool smoothed = false;
};

struct EmbedRecord
{
  std::vector<EmbeddedBit> bits;
  std::size_t codes_embedded = 0;    // #NE: complete synchronization codes
  std::size_t frames_completed = 0;  // complete sync + payload frames
  std::size_t clamped_samples = 0;

  std::size_t bits_embedded() const { return bits.size(); }
};

struct EmbedResult
{
  AudioClip marked;
  EmbedRecord record;
};

/// QIM embedding rule: u' = round((u + d[bit]) / s) * s - d[bit].
inline double
quantize_bit (double u, int bit, double s)
{
  if (!(s > 0))
    throw InvalidParameter ("embedding strength must be positive");
  const double d = bit > 0 ? s / 4 : 3 * s / 4;
  return round_half_away ((u + d) / s) * s - d;
}

// Shift values y(x) = (c - c') x / T_N + c' for x = 0 .. T_N.
inline std::vector<double>
ramp_shifts (double c_prev, double c_cur, std::size_t t_n)
{
  if (t_n < 1)
    throw InvalidParameter ("ramp length must be at least 1");
  std::vector<double> y (t_n + 1);
  const double n = static_cast<double> (t_n);
  for (std::size_t x = 0; x <= t_n; x++)
    y[x] = (c_cur - c_prev) * static_cast<double> (x) / n + c_prev;
  return y;
}

/**
 * Replace the hard step at `boundary` by a linear ramp.
 *
 * `boundary` is the first sample of the current segment, which is assumed to
 * already carry the full shift c_cur; sample boundary-1 carries c_prev. The
 * samples boundary .. boundary+T_N-1 are re-shifted to follow the ramp, the
 * last of them ending on c_cur.
 */
inline AudioClip
smooth_boundary (AudioClip clip, std::size_t boundary, double c_prev, double c_cur, std::size_t t_n)
{
  if (t_n < 1)
    throw InvalidParameter ("ramp length must be at least 1");
  if (boundary + t_n > clip.size())
    throw InvalidParameter ("ramp runs past the end of the clip");
  const auto y = ramp_shifts (c_prev, c_cur, t_n);
  for (std::size_t x = 1; x <= t_n; x++)
    clip.samples[boundary + x - 1] = clamp_sample (clip.samples[boundary + x - 1] + (y[x] - c_cur));
  return clip;
}

namespace detail {

inline double
quantize_shift (double d, double quantum, double limit)
{
  if (quantum <= 0)
    return d;
  double q = round_half_away (d / quantum) * quantum;
  if (std::abs (q) > limit)
    q -= std::copysign (quantum, q);
  return q;
}

}  // namespace detail

namespace detail {

struct Placement
{
  std::size_t cross_index = 0;
  std::size_t ref = 0;        // cross the gap was counted from
  bool ref_is_cross = false;  // false: counting began at the clip start
  std::size_t frame_pos = 0;  // bit position within the frame
};

/**
 * Choose the crosses that carry bits. Placement depends only on the cross
 * positions, which embedding does not move, so it can be planned up front.
 *
 * The first sync bit of a frame needs a cross more than b indices after the
 * immediately preceding cross (the reference is reset at every cross that
 * fails the test). Every later bit takes the first cross more than b indices
 * after the previously placed cross, skipping any crosses in between.
 *
 * With guard g > 0 a frame is only started if no cross skipped between two of
 * its sync bits has a gap above b - g, since a small shift of such a cross
 * would make the detector read it instead. Otherwise the frame start moves on
 * to the next cross.
 */
inline std::vector<Placement>
plan_placements (const std::vector<CrossEvent>& events, std::size_t b, std::size_t g, std::size_t n_sync,
                 std::size_t n_frame, bool repeat)
{
  std::vector<Placement> plan;
  const std::size_t n = events.size();

  // next bit after the cross at events[k]: returns the event index or n, and
  // whether a skipped cross came within g of the limit
  auto next_after = [&] (std::size_t k, bool& ambiguous) {
    ambiguous = false;
    const std::size_t from = events[k].index;
    for (std::size_t j = k + 1; j < n; j++)
      {
        const std::size_t gap = events[j].index - from;
        if (gap > b)
          return j;
        if (gap + g > b)
          ambiguous = true;
      }
    return n;
  };

  std::size_t ref = 0;
  bool ref_is_cross = false;
  std::size_t k = 0;
  while (k < n)
    {
      const std::size_t i = events[k].index;
      const std::size_t gap = i - ref;
      if (gap <= b)
        {
          ref = i;
          ref_is_cross = true;
          k++;
          continue;
        }

      std::vector<std::size_t> sync_at { k };
      bool clean = true;
      while (sync_at.size() < n_sync)
        {
          bool ambiguous = false;
          const std::size_t j = next_after (sync_at.back(), ambiguous);
          if (j == n)
            break;
          if (g > 0 && ambiguous)
            {
              clean = false;
              break;
            }
          sync_at.push_back (j);
        }
      if (!clean)
        {
          ref = i;
          ref_is_cross = true;
          k++;
          continue;
        }

      plan.push_back (Placement { i, ref, ref_is_cross, 0 });
      for (std::size_t p = 1; p < sync_at.size(); p++)
        plan.push_back (Placement { events[sync_at[p]].index, events[sync_at[p - 1]].index, true, p });
      std::size_t last = sync_at.back();
      if (sync_at.size() < n_sync)
        break;

      for (std::size_t p = n_sync; p < n_frame; p++)
        {
          bool ambiguous = false;
          const std::size_t j = next_after (last, ambiguous);
          if (j == n)
            return plan;
          plan.push_back (Placement { events[j].index, events[last].index, true, p });
          last = j;
        }
      if (!repeat)
        break;
      ref = events[last].index;
      ref_is_cross = true;
      k = last + 1;
    }
  return plan;
}

}  // namespace detail

/**
 * Tile sync (+ payload) frames over the crossings of the clip.
 *
 * Segments: the bit embedded at cross i with reference r shifts samples
 * r+b+1 .. i+b (from sample 0 when counting began at the clip start).
 * Segments are disjoint and increasing.
 */
inline EmbedResult
embed_frames (const AudioClip& clip, const FrameLayout& layout, const EmbedParams& params,
              Smoothing smoothing = Smoothing::none)
{
  params.validate();
  if (layout.sync.empty())
    throw InvalidParameter ("frame layout needs a non-empty synchronization code");
  if (clip.size() <= params.ma.b + 1)
    throw EmbedError ("clip too short for window b: 0 codes embedded");

  const CrossScan scan (clip, params.ma, 0);
  const std::size_t b = params.ma.b;
  const std::size_t n_sync = layout.sync.size();
  const std::size_t n_frame = layout.frame_bits();
  const auto plan = detail::plan_placements (scan.events(), b, params.guard, n_sync, n_frame, layout.repeat);

  EmbedResult result { clip, {} };
  auto& out = result.marked.samples;
  auto& rec = result.record;

  bool have_segment = false;
  std::size_t prev_seg_end = 0;
  double prev_shift = 0;

  for (const detail::Placement& pl : plan)
    {
      const std::size_t i = pl.cross_index;
      const bool is_sync = pl.frame_pos < n_sync;
      const int bit = is_sync ? layout.sync[pl.frame_pos] : layout.payload[pl.frame_pos - n_sync];

      const double u = scan.mean_b (i + 1);
      const double u_marked = quantize_bit (u, bit, params.strength);
      const double d = detail::quantize_shift (u_marked - u, params.shift_quantum, params.strength / 2);

      const std::size_t seg_begin = pl.ref_is_cross ? pl.ref + b + 1 : 0;
      const std::size_t seg_end = i + b;
      const bool contiguous = have_segment && seg_begin == prev_seg_end + 1;
      const double c_prev = contiguous ? prev_shift : 0.0;
      const bool smooth = params.ramp_length > 0 &&
        (smoothing == Smoothing::all || (smoothing == Smoothing::payload_only && !is_sync));

      std::size_t ramp_end = seg_begin;  // samples before this carry the ramp
      if (smooth)
        {
          const auto y = ramp_shifts (c_prev, d, params.ramp_length);
          for (std::size_t x = 1; x <= params.ramp_length && seg_begin + x - 1 <= seg_end; x++)
            {
              const double v = out[seg_begin + x - 1] + y[x];
              const double c = clamp_sample (v);
              rec.clamped_samples += c != v;
              out[seg_begin + x - 1] = c;
              ramp_end = seg_begin + x;
            }
        }
      for (std::size_t k = ramp_end; k <= seg_end; k++)
        {
          const double v = out[k] + d;
          const double c = clamp_sample (v);
          rec.clamped_samples += c != v;
          out[k] = c;
        }

      rec.bits.push_back (EmbeddedBit { i, seg_begin, seg_end, d, c_prev, bit, is_sync, smooth });
      have_segment = true;
      prev_seg_end = seg_end;
      prev_shift = d;

      if (pl.frame_pos + 1 == n_sync)
        rec.codes_embedded++;
      if (pl.frame_pos + 1 == n_frame)
        rec.frames_completed++;
    }

  if (rec.codes_embedded == 0)
    throw EmbedError ("clip cannot host a complete synchronization code: 0 codes embedded");
  return result;
}

// Repeated sync-only embedding.
inline EmbedResult
embed_sync (const AudioClip& clip, const BitSequence& code, const EmbedParams& params,
            Smoothing smoothing = Smoothing::none)
{
  return embed_frames (clip, FrameLayout { code, {}, true }, params, smoothing);
}

}  // namespace mawsync
