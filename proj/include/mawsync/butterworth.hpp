#pragma once

// Even-order Butterworth low-pass as a cascade of bilinear-transformed biquads.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "core_signal.hpp"

namespace mawsync {

struct Biquad
{
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;

  // transposed direct form II
  double z1 = 0, z2 = 0;

  double
  process (double x)
  {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }

  void reset() { z1 = z2 = 0; }
};

/**
 * Section k of an order-N Butterworth prototype has Q_k = 1 / (2 cos((2k+1) pi / (2N))).
 * Each section goes through the bilinear transform with the cutoff prewarped,
 * so the -3 dB point lands exactly on cutoff_hz.
 */
inline std::vector<Biquad>
design_butterworth_lowpass (std::size_t order, double cutoff_hz, double sample_rate)
{
  if (order < 2 || order % 2 != 0)
    throw InvalidParameter ("Butterworth order must be even and >= 2");
  if (!(cutoff_hz > 0) || !(cutoff_hz < sample_rate / 2))
    throw InvalidParameter ("Butterworth cutoff must lie in (0, sample_rate / 2)");

  const double k = std::tan (std::numbers::pi * cutoff_hz / sample_rate);
  const double k2 = k * k;
  std::vector<Biquad> sections;
  for (std::size_t i = 0; i < order / 2; i++)
    {
      const double theta = std::numbers::pi * static_cast<double> (2 * i + 1) / static_cast<double> (2 * order);
      const double q = 1.0 / (2.0 * std::cos (theta));
      const double norm = 1.0 / (1.0 + k / q + k2);
      Biquad s;
      s.b0 = k2 * norm;
      s.b1 = 2 * s.b0;
      s.b2 = s.b0;
      s.a1 = 2 * (k2 - 1) * norm;
      s.a2 = (1 - k / q + k2) * norm;
      sections.push_back (s);
    }
  return sections;
}

inline std::vector<double>
filter_cascade (std::vector<Biquad> sections, std::span<const double> x)
{
  std::vector<double> y (x.begin(), x.end());
  for (Biquad& s : sections)
    {
      s.reset();
      for (double& v : y)
        v = s.process (v);
    }
  return y;
}

}  // namespace mawsync
