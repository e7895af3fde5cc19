#pragma once

// Kaiser-windowed sinc interpolation at arbitrary fractional positions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace mawsync {

struct SincKernel
{
  std::size_t taps = 32;  // zero crossings spanned by the kernel at full bandwidth
  double beta = 8.0;      // Kaiser shape
  double cutoff = 0.95;   // passband edge relative to the lower Nyquist rate
};

namespace detail {

class SincTable
{
public:
  explicit SincTable (const SincKernel& k) : half_ (static_cast<double> (k.taps) / 2)
  {
    const std::size_t n = static_cast<std::size_t> (half_ * kOversample) + 2;
    table_.resize (n);
    const double norm = std::cyl_bessel_i (0.0, k.beta);
    for (std::size_t i = 0; i < n; i++)
      {
        const double z = static_cast<double> (i) / kOversample;
        const double sinc = z == 0 ? 1.0 : std::sin (std::numbers::pi * z) / (std::numbers::pi * z);
        const double r = z / half_;
        const double w = r >= 1 ? 0.0 : std::cyl_bessel_i (0.0, k.beta * std::sqrt (1 - r * r)) / norm;
        table_[i] = sinc * w;
      }
  }

  double half_width() const { return half_; }

  // kernel value at |z| in zero-crossing units, linear interpolation between table points
  double
  operator() (double z) const
  {
    z = std::abs (z);
    if (z >= half_)
      return 0.0;
    const double f = z * kOversample;
    const std::size_t i = static_cast<std::size_t> (f);
    const double frac = f - static_cast<double> (i);
    return table_[i] + (table_[i + 1] - table_[i]) * frac;
  }

private:
  static constexpr double kOversample = 512.0;
  double half_;
  std::vector<double> table_;
};

}  // namespace detail

/**
 * Resample x to out_len samples where output n sits at input position
 * n * step. `bandwidth` is the kept fraction of the input Nyquist band
 * (1 when upsampling, out_rate / in_rate when downsampling); the kernel's
 * cutoff is scaled by it. Each output is normalized by the kernel weight sum
 * so DC passes with unit gain at every fractional phase.
 */
inline std::vector<double>
sinc_resample (std::span<const double> x, std::size_t out_len, double step, double bandwidth,
               const SincKernel& kernel = {})
{
  const detail::SincTable table (kernel);
  const double c = kernel.cutoff * std::min (1.0, bandwidth);
  const double reach = table.half_width() / c;  // in input samples
  const long n_in = static_cast<long> (x.size());

  std::vector<double> y (out_len, 0.0);
  for (std::size_t n = 0; n < out_len; n++)
    {
      const double t = static_cast<double> (n) * step;
      const long lo = static_cast<long> (std::ceil (t - reach));
      const long hi = static_cast<long> (std::floor (t + reach));
      double acc = 0, wsum = 0;
      for (long k = lo; k <= hi; k++)
        {
          const double w = table (c * (t - static_cast<double> (k)));
          wsum += w;
          if (k >= 0 && k < n_in)
            acc += w * x[static_cast<std::size_t> (k)];
        }
      y[n] = wsum != 0 ? acc / wsum : 0.0;
    }
  return y;
}

}  // namespace mawsync
