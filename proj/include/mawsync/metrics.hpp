#pragma once

#include <cmath>
#include <limits>

#include "core_signal.hpp"
#include "sync_codes.hpp"

namespace mawsync {

inline constexpr double kInfiniteSnr = std::numeric_limits<double>::infinity();

// 10 lg (sum x^2 / sum (x - x*)^2); +inf when the clips are identical.
inline double
snr_measured (const AudioClip& original, const AudioClip& marked)
{
  if (original.size() != marked.size())
    throw InvalidParameter ("SNR needs clips of equal length (" + std::to_string (original.size()) + " vs " +
                            std::to_string (marked.size()) + ")");
  const double signal = original.energy();
  if (signal <= 0)
    throw InvalidParameter ("SNR undefined for a silent original");
  double noise = 0;
  for (std::size_t i = 0; i < original.size(); i++)
    {
      const double e = original.samples[i] - marked.samples[i];
      noise += e * e;
    }
  if (noise == 0)
    return kInfiniteSnr;
  return 10 * std::log10 (signal / noise);
}

// Uniform-error model: every sample moves by U(-s/2, s/2), so SNR = 10 lg (12 sum x^2 / (s^2 L)).
inline double
snr_predicted (const AudioClip& original, double s)
{
  if (!(s > 0))
    throw InvalidParameter ("embedding strength must be positive");
  const double signal = original.energy();
  if (signal <= 0 || original.empty())
    throw InvalidParameter ("SNR prediction undefined for a silent clip");
  return 10 * std::log10 (12 * signal / (s * s * static_cast<double> (original.size())));
}

inline double
ber (const BitSequence& reference, const BitSequence& extracted)
{
  if (reference.size() != extracted.size())
    throw InvalidParameter ("BER needs sequences of equal length");
  if (reference.empty())
    return 0.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < reference.size(); i++)
    errors += reference[i] != extracted[i];
  return static_cast<double> (errors) / static_cast<double> (reference.size());
}

}  // namespace mawsync
