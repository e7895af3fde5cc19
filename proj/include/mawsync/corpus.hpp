#pragma once

// Seeded synthetic music-like clips for tests and benchmarks: enveloped
// harmonic notes over a bass line plus low-passed noise, normalized and
// snapped to the 16-bit grid. Three styles differ in register, harmonic
// content and level, which moves their zero-crossing statistics apart.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "core_signal.hpp"

namespace mawsync {

enum class Style
{
  light,
  pop,
  blues
};

inline const char*
style_name (Style s)
{
  switch (s)
    {
    case Style::light: return "light";
    case Style::pop:   return "pop";
    case Style::blues: return "blues";
    }
  return "?";
}

inline Style
parse_style (const std::string& name)
{
  if (name == "light")
    return Style::light;
  if (name == "pop")
    return Style::pop;
  if (name == "blues")
    return Style::blues;
  throw InvalidParameter ("unknown corpus style '" + name + "' (light, pop, blues)");
}

struct StyleProfile
{
  double melody_lo, melody_hi;  // fundamental range, Hz
  double bass_lo, bass_hi;
  int harmonics;
  double harmonic_decay;        // amplitude of harmonic h is h^-decay
  double notes_per_second;
  double note_min, note_max;    // note length, seconds
  double bass_level;
  double noise_level;
  double noise_pole;            // one-pole low-pass coefficient for the noise bed
  double rms;
};

inline StyleProfile
style_profile (Style s)
{
  switch (s)
    {
    case Style::light:
      return { 350, 1100, 110, 220, 5, 1.2, 4.0, 0.25, 0.9, 0.35, 0.03, 0.80, 0.16 };
    case Style::pop:
      return { 180, 700, 55, 130, 5, 1.2, 6.0, 0.12, 0.5, 0.75, 0.05, 0.85, 0.145 };
    case Style::blues:
      return { 140, 560, 60, 140, 8, 0.9, 5.0, 0.15, 0.7, 0.6, 0.06, 0.60, 0.135 };
    }
  return style_profile (Style::pop);
}

inline AudioClip
synth_clip (const StyleProfile& p, std::uint64_t seed, double seconds = 16.0, int rate = 44100,
            std::uint64_t stream = 0)
{
  if (!(seconds > 0) || rate <= 0)
    throw InvalidParameter ("synthetic clip needs positive duration and rate");
  const auto len = static_cast<std::size_t> (std::llround (seconds * rate));
  const double fs = static_cast<double> (rate);
  const double two_pi = 2 * std::numbers::pi;

  std::mt19937_64 rng (seed * 0x9E3779B97F4A7C15ull + stream + 1);
  std::uniform_real_distribution<double> unit (0.0, 1.0);
  auto log_uniform = [&] (double lo, double hi) { return lo * std::pow (hi / lo, unit (rng)); };

  std::vector<double> x (len, 0.0);

  auto add_note = [&] (double start_s, double dur_s, double f0, double level, int harmonics, double decay) {
    const auto begin = static_cast<std::size_t> (start_s * fs);
    const auto n = static_cast<std::size_t> (dur_s * fs);
    const double attack = 0.01 * fs;
    const double tau = dur_s * fs / 3.0;
    std::vector<double> phase (harmonics);
    for (auto& ph : phase)
      ph = two_pi * unit (rng);
    for (std::size_t k = 0; k < n && begin + k < len; k++)
      {
        const double t = static_cast<double> (k);
        const double env = std::min (1.0, t / attack) * std::exp (-t / tau) * std::min (1.0, (n - k) / attack);
        double v = 0;
        for (int h = 1; h <= harmonics; h++)
          {
            const double fh = f0 * h;
            if (fh >= fs / 2)
              break;
            v += std::pow (static_cast<double> (h), -decay) * std::sin (two_pi * fh * t / fs + phase[h - 1]);
          }
        x[begin + k] += level * env * v;
      }
  };

  // melody / chords
  double t = 0;
  while (t < seconds)
    {
      const double dur = p.note_min + (p.note_max - p.note_min) * unit (rng);
      add_note (t, dur * 1.3, log_uniform (p.melody_lo, p.melody_hi), 1.0, p.harmonics, p.harmonic_decay);
      if (unit (rng) < 0.5)
        add_note (t, dur * 1.3, log_uniform (p.melody_lo, p.melody_hi), 0.6, p.harmonics, p.harmonic_decay);
      t += -std::log (1 - unit (rng)) / p.notes_per_second + 0.02;
    }
  // bass line
  t = 0;
  while (t < seconds)
    {
      const double dur = 0.4 + 0.4 * unit (rng);
      add_note (t, dur, log_uniform (p.bass_lo, p.bass_hi), p.bass_level, 2, 1.5);
      t += dur;
    }

  // noise bed
  std::normal_distribution<double> gauss (0.0, 1.0);
  double state = 0;
  for (std::size_t k = 0; k < len; k++)
    {
      state = p.noise_pole * state + (1 - p.noise_pole) * gauss (rng);
      x[k] += p.noise_level * state * 4;
    }

  double energy = 0;
  for (double v : x)
    energy += v * v;
  const double gain = energy > 0 ? p.rms / std::sqrt (energy / static_cast<double> (len)) : 0.0;
  // soft ceiling so note pile-ups saturate gently instead of clipping
  constexpr double ceiling = 0.9;
  for (double& v : x)
    v = pcm16_to_sample (sample_to_pcm16 (ceiling * std::tanh (v * gain / ceiling)));
  return AudioClip (std::move (x), rate);
}

inline AudioClip
synth_clip (Style style, std::uint64_t seed, double seconds = 16.0, int rate = 44100)
{
  return synth_clip (style_profile (style), seed, seconds, rate, static_cast<std::uint64_t> (style));
}

}  // namespace mawsync
