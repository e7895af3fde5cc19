#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mawsync/corpus.hpp"
#include "mawsync/metrics.hpp"
#include "mawsync/params.hpp"

using namespace mawsync;

namespace {

AudioClip
sine (double freq, double amp, std::size_t n = 44100)
{
  std::vector<double> x (n);
  for (std::size_t i = 0; i < n; i++)
    x[i] = amp * std::sin (2 * std::numbers::pi * freq * static_cast<double> (i) / 44100 + 0.3);
  return AudioClip (std::move (x), 44100);
}

}  // namespace

TEST (WindowsFromNum, Examples)
{
  const MAParams w = windows_from_num (44.4);
  EXPECT_EQ (w.b, 39u);
  EXPECT_EQ (w.a, 26u);
  EXPECT_THROW (windows_from_num (1.5), InvalidParameter);
}

TEST (Percentile, NearestRank)
{
  EXPECT_EQ (detail::percentile_of ({ 5, 1, 4, 2, 3 }, 0.99), 5);
  EXPECT_EQ (detail::percentile_of ({ 5, 1, 4, 2, 3 }, 0.4), 2);
  EXPECT_EQ (detail::percentile_of ({}, 0.5), 0);
}

TEST (MovingAverageSpread, RecoversDelay)
{
  const AudioClip x = synth_clip (Style::pop, 1, 2.0);
  AudioClip delayed = x;
  for (std::size_t i = delayed.size() - 1; i >= 3; i--)
    delayed.samples[i] = x.samples[i - 3];
  const auto s = moving_average_spread (x, delayed, 40, 0.99, 8);
  EXPECT_EQ (s.lag, 3u);
  EXPECT_LT (s.percentile, 1e-12);
  EXPECT_THROW (moving_average_spread (x, AudioClip (std::vector<double> (10, 0.0), 44100), 40, 0.99, 8),
                InvalidParameter);
}

TEST (ChooseParams, SineGivesHalfPeriod)
{
  const auto d = choose_params (sine (1000, 0.5), {});
  EXPECT_NEAR (d.num, 22.05, 0.1);
  EXPECT_EQ (d.params.ma.b, 19u);
  EXPECT_EQ (d.params.ma.a, 12u);
  EXPECT_EQ (d.params.guard, 1u);
  EXPECT_EQ (d.params.ramp_length, 5u);
  // nothing to calibrate against: the smallest step
  EXPECT_DOUBLE_EQ (d.params.strength, 0.001);
}

TEST (ChooseParams, StrengthClearsTheSpreadWithMargin)
{
  const AudioClip clip = synth_clip (Style::light, 2);
  const auto d = choose_params (clip, default_calibration_attacks());
  ASSERT_EQ (d.spreads.size(), 4u);
  double worst = 0;
  for (const auto& s : d.spreads)
    worst = std::max (worst, s.percentile);
  EXPECT_GT (d.required_strength / 4, worst);
  EXPECT_LE ((d.required_strength - 0.001) / 4, worst + 1e-15);
  if (!d.capped)
    EXPECT_DOUBLE_EQ (d.params.strength, d.required_strength);
  EXPECT_GE (snr_predicted (clip, d.params.strength), 25.0 - 1e-9);
}

TEST (ChooseParams, CapKeepsPredictedSnr)
{
  const AudioClip clip = synth_clip (Style::blues, 3);
  ParamOptions opt;
  opt.min_snr_db = 60;
  const auto d = choose_params (clip, default_calibration_attacks(), opt);
  EXPECT_TRUE (d.capped);
  EXPECT_LT (d.params.strength, d.required_strength);
}

TEST (ChooseParams, Errors)
{
  EXPECT_THROW (choose_params (AudioClip (std::vector<double> (44100, 0.0), 44100), {}), InvalidParameter);
  EXPECT_THROW (choose_params (AudioClip (std::vector<double> (5, 0.1), 44100), {}), InvalidParameter);
  EXPECT_THROW (choose_params (sine (1000, 0.5), { AttackSpec::parse ("tsm:3") }), InvalidParameter);
  // constant offset: MA10 never crosses zero
  EXPECT_THROW (choose_params (AudioClip (std::vector<double> (44100, 0.2), 44100), {}), InvalidParameter);
}
