#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "mawsync/corpus.hpp"
#include "mawsync/detector.hpp"
#include "mawsync/embedder.hpp"
#include "mawsync/metrics.hpp"

using namespace mawsync;

namespace {

EmbedParams
pop_params (double s = 0.016)
{
  EmbedParams p;
  p.ma = MAParams { 26, 40 };
  p.strength = s;
  return p;
}

const AudioClip&
pop_clip()
{
  static const AudioClip clip = synth_clip (Style::pop, 1);
  return clip;
}

BitSequence
payload_bits (std::size_t n, std::uint64_t seed)
{
  std::mt19937_64 rng (seed);
  std::vector<int> v (n);
  for (int& b : v)
    b = (rng() >> 63) ? 1 : -1;
  return BitSequence (std::move (v));
}

}  // namespace

TEST (Qim, WorkedExamples)
{
  EXPECT_NEAR (quantize_bit (0.013, 1, 0.02), 0.015, 1e-15);
  EXPECT_NEAR (quantize_bit (0.013, -1, 0.02), 0.005, 1e-15);
  for (int m : { -3, 0, 1, 7 })
    {
      const double u = m * 0.02 - 0.005;
      EXPECT_NEAR (quantize_bit (u, 1, 0.02), u, 1e-15);
    }
  EXPECT_THROW (quantize_bit (0.1, 1, 0.0), InvalidParameter);
}

TEST (Qim, EditBoundedAndDecodable)
{
  std::mt19937_64 rng (12);
  std::uniform_real_distribution<double> dist (-1.0, 1.0);
  for (double s : { 0.005, 0.01, 0.02 })
    for (int i = 0; i < 20000; i++)
      {
        const double u = dist (rng);
        for (int bit : { -1, 1 })
          {
            const double q = quantize_bit (u, bit, s);
            ASSERT_LE (std::abs (q - u), s / 2 + 1e-15);
            ASSERT_EQ (extract_bit (q, s), bit);
          }
      }
}

TEST (ConstantShift, MovesFullyCoveredWindowsExactly)
{
  std::mt19937_64 rng (6);
  std::uniform_real_distribution<double> dist (-0.5, 0.5);
  std::vector<double> x (2000);
  for (double& v : x)
    v = dist (rng);
  std::vector<double> y = x;
  const double d = 0.00390625;
  for (std::size_t k = 600; k < 1400; k++)
    y[k] += d;
  const auto mx = moving_average (x, 40).values, my = moving_average (y, 40).values;
  for (std::size_t i = 0; i < mx.size(); i++)
    {
      // output i covers samples i .. i+39
      if (i >= 600 && i + 39 < 1400)
        ASSERT_NEAR (my[i] - mx[i], d, 1e-12) << i;
      else if (i + 39 < 600 || i >= 1400)
        ASSERT_EQ (my[i], mx[i]) << i;
    }
}

TEST (EmbedParams, Offsets)
{
  EmbedParams p;
  p.strength = 0.02;
  EXPECT_DOUBLE_EQ (p.offset (1), 0.005);
  EXPECT_DOUBLE_EQ (p.offset (-1), 0.015);
}

TEST (Ramp, Values)
{
  const auto y = ramp_shifts (0.0, 0.01, 5);
  const double expected[] = { 0, 0.002, 0.004, 0.006, 0.008, 0.01 };
  ASSERT_EQ (y.size(), 6u);
  for (std::size_t x = 0; x < 6; x++)
    EXPECT_NEAR (y[x], expected[x], 1e-15);
  for (double v : ramp_shifts (0.003, 0.003, 4))
    EXPECT_DOUBLE_EQ (v, 0.003);
  EXPECT_THROW (ramp_shifts (0, 1, 0), InvalidParameter);
}

TEST (Ramp, SmoothBoundary)
{
  AudioClip clip (std::vector<double> (20, 0.0), 44100);
  for (std::size_t k = 10; k < 20; k++)
    clip.samples[k] = 0.01;
  const AudioClip out = smooth_boundary (clip, 10, 0.0, 0.01, 5);
  const double expected[] = { 0.002, 0.004, 0.006, 0.008, 0.01 };
  for (std::size_t x = 0; x < 5; x++)
    EXPECT_NEAR (out.samples[10 + x], expected[x], 1e-15);
  EXPECT_EQ (out.samples[9], 0.0);
  EXPECT_EQ (out.samples[15], 0.01);
  EXPECT_THROW (smooth_boundary (clip, 17, 0, 0.01, 5), InvalidParameter);
  EXPECT_THROW (smooth_boundary (clip, 10, 0, 0.01, 0), InvalidParameter);
}

TEST (Smoothing, Names)
{
  EXPECT_EQ (parse_smoothing ("EA"), Smoothing::none);
  EXPECT_EQ (parse_smoothing ("eb"), Smoothing::payload_only);
  EXPECT_EQ (parse_smoothing ("all"), Smoothing::all);
  EXPECT_STREQ (smoothing_name (Smoothing::payload_only), "EB");
  EXPECT_THROW (parse_smoothing ("ED"), InvalidParameter);
}

TEST (Embed, Errors)
{
  const AudioClip silent (std::vector<double> (44100, 0.0), 44100);
  EXPECT_THROW (embed_sync (silent, default_sync_code(), pop_params()), EmbedError);

  const AudioClip tiny (std::vector<double> (30, 0.1), 44100);
  EXPECT_THROW (embed_sync (tiny, default_sync_code(), pop_params()), EmbedError);

  const AudioClip short_music = synth_clip (Style::pop, 2, 0.02);
  EXPECT_THROW (embed_sync (short_music, default_sync_code(), pop_params()), EmbedError);

  EXPECT_THROW (embed_sync (pop_clip(), default_sync_code(), pop_params (0.0)), InvalidParameter);
  EXPECT_THROW (embed_sync (pop_clip(), default_sync_code(), pop_params (-0.01)), InvalidParameter);
  EmbedParams bad = pop_params();
  bad.ma = MAParams { 40, 26 };
  EXPECT_THROW (embed_sync (pop_clip(), default_sync_code(), bad), InvalidParameter);
  EXPECT_THROW (embed_frames (pop_clip(), FrameLayout { BitSequence {}, {}, true }, pop_params()), InvalidParameter);
}

TEST (Embed, SegmentsAndShifts)
{
  const EmbedParams p = pop_params();
  const auto res = embed_frames (pop_clip(), FrameLayout { default_sync_code(), payload_bits (84, 1), true }, p);
  const auto& bits = res.record.bits;
  ASSERT_GT (bits.size(), 100u);
  for (std::size_t k = 0; k < bits.size(); k++)
    {
      const auto& e = bits[k];
      EXPECT_EQ (e.segment_end, e.cross_index + p.ma.b);
      EXPECT_LE (e.segment_begin, e.segment_end);
      EXPECT_LE (std::abs (e.shift), p.strength / 2);
      EXPECT_EQ (std::round (e.shift * kPcmScale), e.shift * kPcmScale);
      if (k > 0)
        EXPECT_GT (e.segment_begin, bits[k - 1].segment_end);
      // a frame start after unmarked samples ramps from zero
      if (k % 100 == 0 && (k == 0 || e.segment_begin > bits[k - 1].segment_end + 1))
        EXPECT_EQ (e.prev_shift, 0.0) << "frame start " << k;
      EXPECT_EQ (e.prev_shift, k > 0 && e.segment_begin == bits[k - 1].segment_end + 1 ? bits[k - 1].shift : 0.0);
    }
  EXPECT_EQ (res.record.clamped_samples, 0u);
}

TEST (Embed, PlacementFollowsGapRules)
{
  const EmbedParams p = pop_params();
  const auto events = find_crosses (pop_clip(), p.ma);
  const auto res = embed_sync (pop_clip(), default_sync_code(), p);
  const auto& bits = res.record.bits;
  const std::size_t b = p.ma.b;

  auto position = [&] (std::size_t cross) {
    for (std::size_t k = 0; k < events.size(); k++)
      if (events[k].index == cross)
        return k;
    ADD_FAILURE() << "embedded cross " << cross << " is not a cross of the original";
    return std::size_t { 0 };
  };

  for (std::size_t k = 0; k < bits.size(); k++)
    {
      const std::size_t pos = position (bits[k].cross_index);
      if (k % 16 == 0)
        {
          // first bit: more than b after the immediately preceding cross
          const std::size_t prev = pos == 0 ? 0 : events[pos - 1].index;
          EXPECT_GT (bits[k].cross_index - prev, b);
        }
      else
        {
          // later bits: the first cross more than b after the previous bit
          const std::size_t from = bits[k - 1].cross_index;
          EXPECT_GT (bits[k].cross_index - from, b);
          for (std::size_t j = position (from) + 1; j < pos; j++)
            EXPECT_LE (events[j].index - from, b);
        }
    }
}

TEST (Embed, EmbeddedBitsReadBackAtTheirCrosses)
{
  for (Smoothing mode : { Smoothing::none, Smoothing::all })
    {
      const EmbedParams p = pop_params();
      const auto res = embed_sync (pop_clip(), default_sync_code(), p, mode);
      const AudioClip marked = quantize_to_pcm16 (res.marked);
      const CrossScan scan (marked, p.ma);
      std::set<std::size_t> crosses;
      for (const auto& e : scan.events())
        crosses.insert (e.index);
      for (const auto& e : res.record.bits)
        {
          if (mode == Smoothing::none)
            EXPECT_TRUE (crosses.count (e.cross_index)) << "cross " << e.cross_index;
          EXPECT_EQ (extract_bit (scan.mean_b (e.cross_index + 1), p.strength), e.bit);
        }
    }
}

TEST (Embed, SmoothingKeepsCountsAndQuality)
{
  const EmbedParams p = pop_params();
  const FrameLayout layout { default_sync_code(), payload_bits (128, 2), true };
  const auto ea = embed_frames (pop_clip(), layout, p, Smoothing::none);
  const auto eb = embed_frames (pop_clip(), layout, p, Smoothing::payload_only);
  const auto ec = embed_frames (pop_clip(), layout, p, Smoothing::all);
  EXPECT_EQ (ea.record.codes_embedded, ec.record.codes_embedded);
  EXPECT_EQ (ea.record.codes_embedded, eb.record.codes_embedded);
  EXPECT_EQ (ea.record.bits_embedded(), ec.record.bits_embedded());
  EXPECT_NEAR (snr_measured (pop_clip(), ec.marked), snr_measured (pop_clip(), ea.marked), 0.5);

  // 16 + 128 bits per frame at a=26, b=40: tens of frames in 16 s
  EXPECT_GE (ea.record.codes_embedded, 36u);
  EXPECT_LE (ea.record.codes_embedded, 144u);

  for (const auto& e : eb.record.bits)
    EXPECT_EQ (e.smoothed, !e.sync);
  for (const auto& e : ec.record.bits)
    EXPECT_TRUE (e.smoothed);
  for (const auto& e : ea.record.bits)
    EXPECT_FALSE (e.smoothed);
}

TEST (Embed, BoundaryJumps)
{
  const EmbedParams p = pop_params();
  const auto& x = pop_clip().samples;
  for (Smoothing mode : { Smoothing::none, Smoothing::all })
    {
      const auto res = embed_sync (pop_clip(), default_sync_code(), p, mode);
      const auto& y = res.marked.samples;
      auto diff = [&] (std::size_t k) { return y[k] - x[k]; };
      for (const auto& e : res.record.bits)
        {
          if (e.segment_begin == 0)
            continue;
          const double step = std::abs (e.shift - e.prev_shift);
          double worst = 0;
          for (std::size_t k = e.segment_begin; k < e.segment_begin + p.ramp_length; k++)
            worst = std::max (worst, std::abs (diff (k) - diff (k - 1)));
          if (mode == Smoothing::none)
            EXPECT_NEAR (std::abs (diff (e.segment_begin) - diff (e.segment_begin - 1)), step, 1e-12);
          else
            EXPECT_LE (worst, step / static_cast<double> (p.ramp_length) + 1e-12);
        }
    }
}

TEST (Embed, EmptyPayloadIsSyncOnly)
{
  const EmbedParams p = pop_params();
  const auto a = embed_sync (pop_clip(), default_sync_code(), p);
  const auto b = embed_frames (pop_clip(), FrameLayout { default_sync_code(), {}, true }, p);
  EXPECT_EQ (a.marked.samples, b.marked.samples);
  EXPECT_EQ (a.record.codes_embedded, b.record.codes_embedded);
  EXPECT_EQ (a.record.codes_embedded, a.record.frames_completed);
}

TEST (Embed, SingleFrameWithoutRepeat)
{
  const auto res = embed_frames (pop_clip(), FrameLayout { default_sync_code(), payload_bits (20, 3), false }, pop_params());
  EXPECT_EQ (res.record.codes_embedded, 1u);
  EXPECT_EQ (res.record.frames_completed, 1u);
  EXPECT_EQ (res.record.bits_embedded(), 36u);
}

TEST (Embed, GuardKeepsSkippedCrossesAwayFromTheLimit)
{
  const std::size_t b = 40;
  const auto events = find_crosses (pop_clip(), MAParams { 26, b });

  // largest gap of a cross skipped between two sync bits
  auto worst_skipped = [&] (const EmbedRecord& rec) {
    std::size_t worst = 0, j = 0;
    for (std::size_t k = 0; k + 1 < rec.bits.size(); k++)
      {
        if ((k + 1) % 16 == 0)
          continue;
        const std::size_t from = rec.bits[k].cross_index, to = rec.bits[k + 1].cross_index;
        while (events[j].index <= from)
          j++;
        for (std::size_t m = j; events[m].index < to; m++)
          worst = std::max (worst, events[m].index - from);
      }
    return worst;
  };

  EmbedParams p = pop_params();
  const auto plain = embed_sync (pop_clip(), default_sync_code(), p);
  EXPECT_EQ (worst_skipped (plain.record), b);
  for (std::size_t g : { 1, 3 })
    {
      p.guard = g;
      const auto guarded = embed_sync (pop_clip(), default_sync_code(), p);
      EXPECT_LE (worst_skipped (guarded.record), b - g) << g;
      EXPECT_LT (guarded.record.codes_embedded, plain.record.codes_embedded);
      EXPECT_GT (guarded.record.codes_embedded, 0u);
    }
}

TEST (Embed, ShiftQuantumZeroKeepsExactQim)
{
  EmbedParams p = pop_params();
  p.shift_quantum = 0;
  const auto res = embed_sync (pop_clip(), default_sync_code(), p);
  const CrossScan orig (pop_clip(), p.ma);
  for (const auto& e : res.record.bits)
    EXPECT_NEAR (orig.mean_b (e.cross_index + 1) + e.shift,
                 quantize_bit (orig.mean_b (e.cross_index + 1), e.bit, p.strength), 1e-12);
}
