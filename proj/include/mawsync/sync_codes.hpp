#pragma once

// Synchronization codes: Barker and maximal-length (m-) sequences over {-1, +1},
// their correlation functions, and the exact false-alarm probability of
// matching at least t of l bits against random input.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_signal.hpp"

namespace mawsync {

class BitSequence
{
public:
  BitSequence() = default;

  explicit BitSequence (std::vector<int> bits) : bits_ (std::move (bits))
  {
    for (int v : bits_)
      if (v != 1 && v != -1)
        throw InvalidParameter ("bit sequence elements must be -1 or +1 (got " + std::to_string (v) + ")");
  }

  BitSequence (std::initializer_list<int> bits) : BitSequence (std::vector<int> (bits)) {}

  // 1 -> +1, 0 -> -1
  static BitSequence
  from_binary (std::span<const std::uint8_t> binary)
  {
    std::vector<int> bits;
    bits.reserve (binary.size());
    for (auto b : binary)
      bits.push_back (b ? 1 : -1);
    return BitSequence (std::move (bits));
  }

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  int operator[] (std::size_t i) const { return bits_[i]; }
  const std::vector<int>& bits() const { return bits_; }
  auto begin() const { return bits_.begin(); }
  auto end() const { return bits_.end(); }

  BitSequence
  concat (const BitSequence& other) const
  {
    std::vector<int> out = bits_;
    out.insert (out.end(), other.bits_.begin(), other.bits_.end());
    return BitSequence (std::move (out));
  }

  BitSequence
  negated() const
  {
    std::vector<int> out = bits_;
    for (int& v : out)
      v = -v;
    return BitSequence (std::move (out));
  }

  std::string
  to_string() const
  {
    std::string s;
    for (std::size_t i = 0; i < bits_.size(); i++)
      {
        if (i)
          s += ' ';
        s += bits_[i] > 0 ? "1" : "-1";
      }
    return s;
  }

  friend bool operator== (const BitSequence&, const BitSequence&) = default;

private:
  std::vector<int> bits_;
};

inline BitSequence
barker (std::size_t n)
{
  switch (n)
    {
    case 2:  return { 1, -1 };
    case 3:  return { 1, 1, -1 };
    case 4:  return { 1, 1, -1, 1 };
    case 5:  return { 1, 1, 1, -1, 1 };
    case 7:  return { 1, 1, 1, -1, -1, 1, -1 };
    case 11: return { 1, 1, 1, -1, -1, -1, 1, -1, -1, 1, -1 };
    case 13: return { 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1 };
    default:
      throw InvalidParameter ("no Barker code of length " + std::to_string (n) +
                              " (valid: 2, 3, 4, 5, 7, 11, 13)");
    }
}

// 13-bit Barker followed by 3-bit Barker: 16 bits.
inline BitSequence
default_sync_code()
{
  return barker (13).concat (barker (3));
}

// Aperiodic correlation sum_n a[n] * b[n - lag]; products outside either sequence count as 0.
inline long
cross_correlation (const BitSequence& a, const BitSequence& b, long lag)
{
  long r = 0;
  const long na = static_cast<long> (a.size()), nb = static_cast<long> (b.size());
  for (long n = 0; n < na; n++)
    {
      const long m = n - lag;
      if (m >= 0 && m < nb)
        r += a[n] * b[m];
    }
  return r;
}

// Periodic correlation sum_n a[n] * b[(n - lag) mod N]; both sequences must have length N.
inline long
cyclic_correlation (const BitSequence& a, const BitSequence& b, long lag)
{
  if (a.size() != b.size() || a.empty())
    throw InvalidParameter ("cyclic correlation needs two non-empty sequences of equal length");
  const long n = static_cast<long> (a.size());
  long r = 0;
  for (long i = 0; i < n; i++)
    {
      long m = (i - lag) % n;
      if (m < 0)
        m += n;
      r += a[i] * b[m];
    }
  return r;
}

// Known primitive feedback taps (1-based register positions), k = 2 .. 16.
inline std::vector<unsigned>
primitive_taps (unsigned registers)
{
  switch (registers)
    {
    case 2:  return { 2, 1 };
    case 3:  return { 3, 2 };
    case 4:  return { 4, 3 };
    case 5:  return { 5, 3 };
    case 6:  return { 6, 5 };
    case 7:  return { 7, 6 };
    case 8:  return { 8, 6, 5, 4 };
    case 9:  return { 9, 5 };
    case 10: return { 10, 7 };
    case 11: return { 11, 9 };
    case 12: return { 12, 6, 4, 1 };
    case 13: return { 13, 4, 3, 1 };
    case 14: return { 14, 5, 3, 1 };
    case 15: return { 15, 14 };
    case 16: return { 16, 15, 13, 4 };
    default:
      throw InvalidParameter ("no primitive tap table entry for " + std::to_string (registers) + " registers");
    }
}

/**
 * Fibonacci LFSR output over one full period.
 *
 * Register cell t (1-based) lives in bit t-1 of the state word. Each step
 * emits cell k, computes the XOR of the tapped cells, shifts every cell one
 * position towards k and feeds the XOR into cell 1. Output bit 1 maps to +1,
 * bit 0 to -1. The period is checked; taps that do not give 2^k - 1 are rejected.
 */
inline BitSequence
m_sequence (unsigned registers, std::span<const unsigned> taps, std::uint32_t seed)
{
  if (registers < 2 || registers > 24)
    throw InvalidParameter ("m-sequence register count must be in [2, 24]");
  const std::uint32_t mask = (std::uint32_t (1) << registers) - 1;
  if ((seed & mask) == 0)
    throw InvalidParameter ("LFSR seed must be nonzero");
  if (taps.empty())
    throw InvalidParameter ("LFSR needs at least one feedback tap");
  for (unsigned t : taps)
    if (t < 1 || t > registers)
      throw InvalidParameter ("LFSR tap " + std::to_string (t) + " outside [1, " + std::to_string (registers) + "]");

  const std::uint32_t period = mask;  // 2^k - 1
  const std::uint32_t start = seed & mask;
  std::uint32_t state = start;
  std::vector<int> out;
  out.reserve (period);
  for (std::uint32_t step = 0; step < period; step++)
    {
      if (step > 0 && state == start)
        throw InvalidParameter ("feedback taps are not primitive: period " + std::to_string (step) +
                                " < " + std::to_string (period));
      out.push_back ((state >> (registers - 1)) & 1 ? 1 : -1);
      std::uint32_t fb = 0;
      for (unsigned t : taps)
        fb ^= (state >> (t - 1)) & 1;
      state = ((state << 1) | fb) & mask;
    }
  if (state != start)
    throw InvalidParameter ("feedback taps are not primitive: state sequence does not close");
  return BitSequence (std::move (out));
}

inline BitSequence
m_sequence (unsigned registers, std::uint32_t seed = 1)
{
  const auto taps = primitive_taps (registers);
  return m_sequence (registers, taps, seed);
}

struct FalseAlarmModel
{
  unsigned l = 16;  // code length
  unsigned t = 16;  // bits that must agree
};

// Exact numerator sum_{k=t}^{l} C(l, k) of the false-alarm probability (denominator 2^l).
inline unsigned __int128
false_alarm_numerator (const FalseAlarmModel& model)
{
  if (model.l > 64)
    throw InvalidParameter ("false alarm model supports code lengths up to 64");
  if (model.t > model.l)
    throw InvalidParameter ("match threshold t must not exceed code length l");

  // Pascal row l; C(64, 32) < 2^63 so every entry fits comfortably
  std::vector<unsigned __int128> row (model.l + 1, 0);
  row[0] = 1;
  for (unsigned n = 1; n <= model.l; n++)
    for (unsigned k = n; k >= 1; k--)
      row[k] += row[k - 1];

  unsigned __int128 sum = 0;
  for (unsigned k = model.t; k <= model.l; k++)
    sum += row[k];
  return sum;
}

inline double
false_alarm_rate (const FalseAlarmModel& model)
{
  const unsigned __int128 num = false_alarm_numerator (model);
  return std::ldexp (static_cast<long double> (num), -static_cast<int> (model.l));
}

/**
 * Parse a bit-sequence spec:
 *
 *   barker16            the default 16-bit code (barker13 + barker3)
 *   barkerN             a single Barker code, N in {2,3,4,5,7,11,13}
 *   mseq:K[:SEED]       m-sequence of degree K from the built-in taps
 *   bin:0110...         binary digits, 1 -> +1, 0 -> -1
 *   hex:DEADBEEF        hex digits, most significant bit first
 */
inline BitSequence
parse_bits (const std::string& spec)
{
  auto digits_after = [&] (std::size_t prefix) {
    const std::string body = spec.substr (prefix);
    if (body.empty())
      throw InvalidParameter ("empty bit spec '" + spec + "'");
    return body;
  };
  if (spec == "barker16" || spec == "default")
    return default_sync_code();
  if (spec.rfind ("barker", 0) == 0)
    {
      const std::string n = digits_after (6);
      if (n.find_first_not_of ("0123456789") != std::string::npos)
        throw InvalidParameter ("bad Barker length in '" + spec + "'");
      return barker (std::stoul (n));
    }
  if (spec.rfind ("mseq:", 0) == 0)
    {
      const std::string body = digits_after (5);
      const auto colon = body.find (':');
      try
        {
          const unsigned k = static_cast<unsigned> (std::stoul (body.substr (0, colon)));
          const std::uint32_t seed = colon == std::string::npos ? 1u : static_cast<std::uint32_t> (std::stoul (body.substr (colon + 1)));
          return m_sequence (k, seed);
        }
      catch (const std::logic_error& e)
        {
          if (dynamic_cast<const InvalidParameter*> (&e))
            throw;
          throw InvalidParameter ("bad m-sequence spec '" + spec + "'");
        }
    }
  if (spec.rfind ("bin:", 0) == 0)
    {
      std::vector<int> bits;
      for (char c : digits_after (4))
        {
          if (c != '0' && c != '1')
            throw InvalidParameter ("binary spec '" + spec + "' has a non-binary digit");
          bits.push_back (c == '1' ? 1 : -1);
        }
      return BitSequence (std::move (bits));
    }
  if (spec.rfind ("hex:", 0) == 0)
    {
      std::vector<int> bits;
      for (char c : digits_after (4))
        {
          int v;
          if (c >= '0' && c <= '9')
            v = c - '0';
          else if (c >= 'a' && c <= 'f')
            v = c - 'a' + 10;
          else if (c >= 'A' && c <= 'F')
            v = c - 'A' + 10;
          else
            throw InvalidParameter ("hex spec '" + spec + "' has a non-hex digit");
          for (int k = 3; k >= 0; k--)
            bits.push_back ((v >> k) & 1 ? 1 : -1);
        }
      return BitSequence (std::move (bits));
    }
  throw InvalidParameter ("unknown bit spec '" + spec + "' (barker16, barkerN, mseq:K[:seed], bin:..., hex:...)");
}

}  // namespace mawsync
