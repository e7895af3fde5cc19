#pragma once

// Blind detection: walk the crossings of the (possibly attacked) clip, read one
// QIM bit at every cross far enough from the previous read, then locate the
// synchronization code in the bit stream by correlation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core_signal.hpp"
#include "sync_codes.hpp"

namespace mawsync {

struct DetectParams
{
  MAParams ma;
  double strength = 0.016;
  BitSequence code = default_sync_code();
  std::size_t threshold = 0;  // bits that must agree; 0 means all of them (t = l)
  std::size_t min_gap = 8;    // spacing window between accepted syncs, in extracted bits
  std::size_t max_gap = 32;
  std::vector<double> scales;  // time-scale hypotheses tried by detect(); empty means 1 only

  // Spacing rule scaled to the frame length: [0.5, 2] * (n_1 + n_2).
  static DetectParams
  for_frames (MAParams ma, double strength, BitSequence code, std::size_t payload_len)
  {
    DetectParams p;
    p.ma = ma;
    p.strength = strength;
    p.code = std::move (code);
    const std::size_t frame = p.code.size() + payload_len;
    p.min_gap = std::max<std::size_t> (1, frame / 2);
    p.max_gap = 2 * frame;
    return p;
  }

  std::size_t match_bits() const { return threshold == 0 ? code.size() : threshold; }

  void
  validate() const
  {
    if (!(strength > 0))
      throw InvalidParameter ("detection strength must be positive");
    if (code.empty())
      throw InvalidParameter ("detection needs a non-empty synchronization code");
    if (match_bits() > code.size())
      throw InvalidParameter ("match threshold exceeds code length");
    if (min_gap >= max_gap)
      throw InvalidParameter ("spacing window needs min_gap < max_gap");
    for (double f : scales)
      if (!(f >= 0.5 && f <= 2.0))
        throw InvalidParameter ("time-scale hypothesis must lie in [0.5, 2]");
  }
};

struct ExtractedBit
{
  int bit = 1;
  std::size_t cross_index = 0;
};

struct SyncHit
{
  std::size_t position = 0;     // stream index of the first code bit
  std::size_t cross_index = 0;  // cross carrying that bit
  int correlation = 0;
  bool isolated = false;        // farther than max_gap from both neighbours
};

struct DetectionReport
{
  std::vector<ExtractedBit> bits;
  std::vector<int> correlation;  // r(k) for k = l-1 .. n-1, stored at k-(l-1)
  std::vector<SyncHit> syncs;
  std::size_t candidates = 0;      // correlation peaks before the spacing rule
  std::size_t dropped_close = 0;
  std::size_t extraction_ops = 0;
  std::vector<BitSequence> payloads;
  std::optional<double> payload_ber;
  double scale = 1.0;              // time-scale hypothesis the report belongs to
  MAParams windows;

  std::size_t detected() const { return syncs.size(); }
};

/// QIM decision: +1 when the residual u' - floor(u'/s)*s reaches s/2.
inline int
extract_bit (double u, double s)
{
  if (!(s > 0))
    throw InvalidParameter ("detection strength must be positive");
  const double residual = u - std::floor (u / s) * s;
  return residual >= s / 2 ? 1 : -1;
}

inline std::vector<ExtractedBit>
scan_and_extract (const AudioClip& clip, const DetectParams& params, std::size_t* ops = nullptr)
{
  params.validate();
  std::vector<ExtractedBit> out;
  if (clip.size() <= params.ma.b + 1)
    return out;

  const CrossScan scan (clip, params.ma, 0);
  std::size_t last = 0;
  for (const CrossEvent& ev : scan.events())
    {
      if (ev.index - last <= params.ma.b)
        continue;
      out.push_back (ExtractedBit { extract_bit (scan.mean_b (ev.index + 1), params.strength), ev.index });
      last = ev.index;
    }
  if (ops)
    *ops += out.size();
  return out;
}

namespace detail {

inline void
locate_into (DetectionReport& rep, const DetectParams& params)
{
  const auto& code = params.code;
  const std::size_t l = code.size();
  const std::size_t n = rep.bits.size();
  rep.correlation.clear();
  rep.syncs.clear();
  rep.candidates = 0;
  rep.dropped_close = 0;
  if (n < l)
    return;

  const int accept_at = 2 * static_cast<int> (params.match_bits()) - static_cast<int> (l);
  rep.correlation.resize (n - l + 1);
  std::vector<SyncHit> hits;
  for (std::size_t k = l - 1; k < n; k++)
    {
      int r = 0;
      const std::size_t first = k + 1 - l;
      for (std::size_t i = 0; i < l; i++)
        r += code[i] * rep.bits[first + i].bit;
      rep.correlation[first] = r;
      if (r < accept_at)
        continue;

      rep.candidates++;
      if (!hits.empty() && first - hits.back().position < params.min_gap)
        {
          rep.dropped_close++;
          continue;
        }
      hits.push_back (SyncHit { first, rep.bits[first].cross_index, r, false });
    }

  for (std::size_t h = 0; h < hits.size(); h++)
    {
      const bool far_prev = h == 0 || hits[h].position - hits[h - 1].position > params.max_gap;
      const bool far_next = h + 1 == hits.size() || hits[h + 1].position - hits[h].position > params.max_gap;
      hits[h].isolated = far_prev && far_next;
    }
  rep.syncs = std::move (hits);
}

// Windows for a clip played at `scale` times its original duration.
inline MAParams
scaled_windows (MAParams ma, double scale)
{
  if (scale == 1.0)
    return ma;
  const auto a = std::max<std::size_t> (1, static_cast<std::size_t> (std::llround (static_cast<double> (ma.a) * scale)));
  const auto b = std::max<std::size_t> (a + 1, static_cast<std::size_t> (std::llround (static_cast<double> (ma.b) * scale)));
  return MAParams { a, b };
}

}  // namespace detail

// Correlate the code against the extracted stream and accept positions where
// r(k) >= 2t - l (r(k) = l for an exact match).
inline DetectionReport
locate_sync (std::vector<ExtractedBit> bits, const DetectParams& params)
{
  params.validate();
  DetectionReport rep;
  rep.bits = std::move (bits);
  detail::locate_into (rep, params);
  return rep;
}

inline DetectionReport
locate_sync (const BitSequence& bits, const DetectParams& params)
{
  std::vector<ExtractedBit> stream;
  stream.reserve (bits.size());
  for (std::size_t i = 0; i < bits.size(); i++)
    stream.push_back (ExtractedBit { bits[i], i });
  return locate_sync (std::move (stream), params);
}

namespace detail {

inline DetectionReport
detect_at_scale (const AudioClip& clip, const DetectParams& params, double scale, std::size_t payload_len,
                 const BitSequence* reference_payload)
{
  DetectParams p = params;
  p.ma = scaled_windows (params.ma, scale);
  DetectionReport rep;
  rep.scale = scale;
  rep.windows = p.ma;
  rep.bits = scan_and_extract (clip, p, &rep.extraction_ops);
  locate_into (rep, p);

  const std::size_t l = p.code.size();
  std::size_t errors = 0, compared = 0;
  if (payload_len > 0)
    for (const SyncHit& hit : rep.syncs)
      {
        const std::size_t begin = hit.position + l;
        if (begin + payload_len > rep.bits.size())
          continue;
        std::vector<int> bits;
        bits.reserve (payload_len);
        for (std::size_t k = 0; k < payload_len; k++)
          bits.push_back (rep.bits[begin + k].bit);
        BitSequence payload (std::move (bits));
        if (reference_payload)
          {
            for (std::size_t k = 0; k < payload_len; k++)
              errors += payload[k] != (*reference_payload)[k];
            compared += payload_len;
          }
        rep.payloads.push_back (std::move (payload));
      }
  if (reference_payload && compared > 0)
    rep.payload_ber = static_cast<double> (errors) / static_cast<double> (compared);
  return rep;
}

}  // namespace detail

/**
 * Full pipeline: extract, locate syncs, read payload_len bits after each sync.
 *
 * With time-scale hypotheses the windows (and so the gap threshold) are
 * stretched by each factor in turn and the hypothesis with the most accepted
 * syncs wins; ties go to the factor closest to 1. extraction_ops counts the
 * work of every hypothesis.
 */
inline DetectionReport
detect (const AudioClip& clip, const DetectParams& params, std::size_t payload_len,
        const BitSequence* reference_payload = nullptr)
{
  params.validate();
  if (reference_payload && reference_payload->size() != payload_len)
    throw InvalidParameter ("reference payload length differs from payload_len");

  if (params.scales.empty())
    return detail::detect_at_scale (clip, params, 1.0, payload_len, reference_payload);

  std::optional<DetectionReport> best;
  std::size_t ops = 0;
  for (double f : params.scales)
    {
      DetectionReport rep = detail::detect_at_scale (clip, params, f, payload_len, reference_payload);
      ops += rep.extraction_ops;
      const bool better = !best || rep.detected() > best->detected() ||
        (rep.detected() == best->detected() && std::abs (f - 1) < std::abs (best->scale - 1));
      if (better)
        best = std::move (rep);
    }
  best->extraction_ops = ops;
  return std::move (*best);
}

}  // namespace mawsync
