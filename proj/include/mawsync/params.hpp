#pragma once

// Adaptive parameter choice for a clip.
//
//   Z     = zero crossings of the 10-sample moving average
//   num   = L / Z                       (average samples per zero crossing)
//   b     = floor(b_ratio * num)        (a little below num)
//   a     = floor(a_ratio * b)          (about 2b/3)
//   s     = smallest multiple of strength_step with s / margin above the
//           percentile of |M_b(attacked) - M_b(original)| over the
//           calibration attacks, capped so the predicted SNR stays >= min_snr_db

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "attacks.hpp"
#include "core_signal.hpp"
#include "embedder.hpp"

namespace mawsync {

struct ParamOptions
{
  double b_ratio = 0.9;
  double a_ratio = 2.0 / 3.0;
  double percentile = 0.99;
  double margin = 4.0;          // s / margin must exceed the percentile
  double strength_step = 0.001;
  double min_snr_db = 25.0;
  std::size_t ramp_length = 5;
  std::size_t guard = 1;
  std::size_t max_lag = 8;      // delay search when aligning an attacked clip
};

struct AttackSpread
{
  std::string attack;
  std::size_t lag = 0;
  double percentile = 0;
};

struct ParamDerivation
{
  std::size_t length = 0;
  std::size_t zero_crossings = 0;
  double num = 0;
  std::vector<AttackSpread> spreads;
  double required_strength = 0;
  double strength_cap = 0;
  bool capped = false;
  EmbedParams params;
};

inline std::vector<AttackSpec>
default_calibration_attacks()
{
  return {
    AttackSpec::parse ("awgn:35:seed=1"),
    AttackSpec::parse ("requantize:6"),
    AttackSpec::parse ("resample:11025"),
    AttackSpec::parse ("lowpass:4000:order=6"),
  };
}

namespace detail {

inline double
percentile_of (std::vector<double> v, double q)
{
  if (v.empty())
    return 0;
  const auto k = static_cast<std::size_t> (std::ceil (q * static_cast<double> (v.size()))) ;
  const std::size_t idx = std::min (v.size() - 1, k == 0 ? 0 : k - 1);
  std::nth_element (v.begin(), v.begin() + static_cast<std::ptrdiff_t> (idx), v.end());
  return v[idx];
}

}  // namespace detail

// b = floor(b_ratio * num), a = floor(a_ratio * b)
inline MAParams
windows_from_num (double num, const ParamOptions& opt = {})
{
  const auto b = static_cast<std::size_t> (std::floor (opt.b_ratio * num));
  const auto a = static_cast<std::size_t> (std::floor (opt.a_ratio * static_cast<double> (b)));
  if (a < 1 || a >= b)
    throw InvalidParameter ("derived windows a=" + std::to_string (a) + ", b=" + std::to_string (b) + " are unusable");
  return MAParams { a, b };
}

// Spread of the long moving average under one attack, after removing the best integer delay.
inline AttackSpread
moving_average_spread (const AudioClip& original, const AudioClip& attacked, std::size_t window,
                       double q, std::size_t max_lag)
{
  if (attacked.size() != original.size())
    throw InvalidParameter ("calibration attacks must preserve the clip length");
  const auto m0 = moving_average_fast (original, window).values;
  const auto m1 = moving_average_fast (attacked, window).values;
  const std::size_t n = m0.size();
  max_lag = std::min (max_lag, n / 2);

  std::size_t best_lag = 0;
  double best = -1;
  for (std::size_t lag = 0; lag <= max_lag; lag++)
    {
      double e = 0;
      for (std::size_t i = 0; i + lag < n; i++)
        {
          const double d = m1[i + lag] - m0[i];
          e += d * d;
        }
      e /= static_cast<double> (n - lag);
      if (best < 0 || e < best)
        {
          best = e;
          best_lag = lag;
        }
    }
  std::vector<double> diff;
  diff.reserve (n - best_lag);
  for (std::size_t i = 0; i + best_lag < n; i++)
    diff.push_back (std::abs (m1[i + best_lag] - m0[i]));
  return AttackSpread { {}, best_lag, detail::percentile_of (std::move (diff), q) };
}

inline ParamDerivation
choose_params (const AudioClip& clip, const std::vector<AttackSpec>& calibration_attacks,
               const ParamOptions& opt = {})
{
  if (clip.size() < 10 || clip.energy() <= 0)
    throw InvalidParameter ("parameter choice needs a non-silent clip");

  ParamDerivation out;
  out.length = clip.size();
  out.zero_crossings = zero_crossing_count (moving_average_fast (clip, 10));
  if (out.zero_crossings == 0)
    throw InvalidParameter ("clip has no zero crossings in its 10-sample moving average");
  out.num = static_cast<double> (clip.size()) / static_cast<double> (out.zero_crossings);

  out.params.ma = windows_from_num (out.num, opt);
  if (out.params.ma.b >= clip.size())
    throw InvalidParameter ("derived window b=" + std::to_string (out.params.ma.b) + " exceeds the clip");
  out.params.ramp_length = opt.ramp_length;
  out.params.guard = opt.guard;

  double worst = 0;
  for (const AttackSpec& spec : calibration_attacks)
    {
      if (!spec.preserves_length())
        throw InvalidParameter ("calibration attack '" + spec.to_string() + "' changes the clip length");
      const AttackResult attacked = apply_attack (clip, spec);
      if (!attacked.ran)
        continue;
      AttackSpread spread = moving_average_spread (clip, attacked.clip, out.params.ma.b, opt.percentile, opt.max_lag);
      spread.attack = spec.to_string();
      worst = std::max (worst, spread.percentile);
      out.spreads.push_back (std::move (spread));
    }

  const double step = opt.strength_step;
  out.required_strength = (std::floor (opt.margin * worst / step) + 1) * step;
  const double mean_power = clip.energy() / static_cast<double> (clip.size());
  out.strength_cap = std::sqrt (12 * mean_power / std::pow (10.0, opt.min_snr_db / 10));
  const double cap_on_grid = std::max (step, std::floor (out.strength_cap / step) * step);
  out.capped = out.required_strength > cap_on_grid;
  out.params.strength = out.capped ? cap_on_grid : out.required_strength;
  return out;
}

}  // namespace mawsync
