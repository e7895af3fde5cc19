#pragma once

// Evaluation harness: embed every clip in every smoothing mode, run each
// attack chain on the marked clip, detect, and tabulate #NE / #ND / NP, the
// measured and predicted SNR, payload BER and the detector's extraction count.
//
// Config files are line oriented, `key = value`, `#` starts a comment:
//
//   clip = synth:pop:1          # synthetic clip (style:seed[:seconds]) or a WAV path
//   clip = song.wav
//   mode = EA EC
//   attack = none
//   attack = awgn:55:seed=7
//   attack = lowpass:8000 > requantize:8     # chains compose left to right
//   params = auto               # or: a=26 b=40 s=0.016
//   payload_bits = 84
//   scales = auto               # detector time-scale hypotheses: none, auto or a list
//
// Reports never contain timings unless `timing = on`, so identical inputs give
// byte-identical reports.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "attacks.hpp"
#include "core_signal.hpp"
#include "corpus.hpp"
#include "detector.hpp"
#include "embedder.hpp"
#include "metrics.hpp"
#include "params.hpp"
#include "sync_codes.hpp"
#include "wav.hpp"

namespace mawsync {

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Time-scale grid used by `scales = auto`: 0.90 .. 1.10 in steps of 0.02.
inline std::vector<double>
default_scale_grid()
{
  std::vector<double> g;
  for (int k = -5; k <= 5; k++)
    g.push_back (1.0 + 0.02 * k);
  return g;
}

struct FixedParams
{
  std::size_t a = 0;
  std::size_t b = 0;
  double strength = 0;
};

struct BenchConfig
{
  std::vector<std::string> clips;
  std::vector<Smoothing> modes { Smoothing::none, Smoothing::payload_only, Smoothing::all };
  std::vector<std::vector<AttackSpec>> attacks;  // empty: embed quality only
  std::optional<FixedParams> fixed;              // nullopt: choose_params per clip
  ParamOptions param_options;
  std::vector<AttackSpec> calibration = default_calibration_attacks();
  BitSequence sync = default_sync_code();
  std::size_t payload_bits = 84;
  std::uint64_t payload_seed = 1;
  std::size_t threshold = 0;
  std::vector<double> scales;
  bool quantize_output = true;
  bool timing = false;
  unsigned jobs = 1;

  static BenchConfig parse (std::string_view text);
  static BenchConfig load (const std::string& path);
};

namespace detail {

inline std::string
trim (std::string_view s)
{
  const auto b = s.find_first_not_of (" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of (" \t\r\n");
  return std::string (s.substr (b, e - b + 1));
}

inline std::vector<std::string>
split_words (const std::string& s)
{
  std::vector<std::string> out;
  std::istringstream in (s);
  for (std::string w; in >> w;)
    out.push_back (w);
  return out;
}

inline bool
parse_switch (const std::string& v, const std::string& key)
{
  if (v == "on" || v == "yes" || v == "true" || v == "1")
    return true;
  if (v == "off" || v == "no" || v == "false" || v == "0")
    return false;
  throw ConfigError ("'" + key + "' expects on/off, got '" + v + "'");
}

template <typename T>
T
parse_number (const std::string& v, const std::string& key)
{
  T out {};
  const auto [end, ec] = std::from_chars (v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size() || v.empty())
    throw ConfigError ("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

inline std::vector<AttackSpec>
parse_chain (const std::string& v)
{
  std::vector<AttackSpec> chain;
  if (v == "none")
    return chain;
  std::size_t start = 0;
  while (start <= v.size())
    {
      const auto gt = v.find ('>', start);
      const std::string part = trim (std::string_view (v).substr (start, gt == std::string::npos ? std::string::npos : gt - start));
      if (part.empty())
        throw ConfigError ("empty step in attack chain '" + v + "'");
      chain.push_back (AttackSpec::parse (part));
      if (gt == std::string::npos)
        break;
      start = gt + 1;
    }
  return chain;
}

}  // namespace detail

inline BenchConfig
BenchConfig::parse (std::string_view text)
{
  BenchConfig cfg;
  bool modes_set = false;
  std::istringstream in { std::string (text) };
  std::size_t lineno = 0;
  for (std::string raw; std::getline (in, raw);)
    {
      lineno++;
      const auto hash = raw.find ('#');
      const std::string line = detail::trim (std::string_view (raw).substr (0, hash));
      if (line.empty())
        continue;
      const auto eq = line.find ('=');
      if (eq == std::string::npos)
        throw ConfigError ("line " + std::to_string (lineno) + ": expected 'key = value'");
      const std::string key = detail::trim (std::string_view (line).substr (0, eq));
      const std::string val = detail::trim (std::string_view (line).substr (eq + 1));
      try
        {
          if (key == "clip")
            cfg.clips.push_back (val);
          else if (key == "mode")
            {
              if (!modes_set)
                cfg.modes.clear();
              modes_set = true;
              for (const auto& w : detail::split_words (val))
                cfg.modes.push_back (parse_smoothing (w));
            }
          else if (key == "attack")
            cfg.attacks.push_back (detail::parse_chain (val));
          else if (key == "params")
            {
              if (val == "auto")
                cfg.fixed.reset();
              else
                {
                  FixedParams fp;
                  for (const auto& w : detail::split_words (val))
                    {
                      const auto e = w.find ('=');
                      const std::string k = w.substr (0, e), v = e == std::string::npos ? "" : w.substr (e + 1);
                      if (k == "a")
                        fp.a = detail::parse_number<std::size_t> (v, "params a");
                      else if (k == "b")
                        fp.b = detail::parse_number<std::size_t> (v, "params b");
                      else if (k == "s")
                        fp.strength = detail::parse_number<double> (v, "params s");
                      else
                        throw ConfigError ("unknown params field '" + w + "'");
                    }
                  if (fp.a == 0 || fp.b == 0 || !(fp.strength > 0))
                    throw ConfigError ("fixed params need a, b and s");
                  cfg.fixed = fp;
                }
            }
          else if (key == "calibration")
            {
              cfg.calibration.clear();
              if (val != "default")
                for (const auto& w : detail::split_words (val))
                  cfg.calibration.push_back (AttackSpec::parse (w));
              else
                cfg.calibration = default_calibration_attacks();
            }
          else if (key == "sync")
            cfg.sync = parse_bits (val);
          else if (key == "payload_bits")
            cfg.payload_bits = detail::parse_number<std::size_t> (val, key);
          else if (key == "payload_seed")
            cfg.payload_seed = detail::parse_number<std::uint64_t> (val, key);
          else if (key == "threshold")
            cfg.threshold = detail::parse_number<std::size_t> (val, key);
          else if (key == "ramp")
            cfg.param_options.ramp_length = detail::parse_number<std::size_t> (val, key);
          else if (key == "guard")
            cfg.param_options.guard = detail::parse_number<std::size_t> (val, key);
          else if (key == "scales")
            {
              cfg.scales.clear();
              if (val == "auto")
                cfg.scales = default_scale_grid();
              else if (val != "none")
                for (const auto& w : detail::split_words (val))
                  cfg.scales.push_back (detail::parse_number<double> (w, key));
            }
          else if (key == "quantize_output")
            cfg.quantize_output = detail::parse_switch (val, key);
          else if (key == "timing")
            cfg.timing = detail::parse_switch (val, key);
          else if (key == "jobs")
            cfg.jobs = std::max (1u, detail::parse_number<unsigned> (val, key));
          else
            throw ConfigError ("unknown key '" + key + "'");
        }
      catch (const ConfigError& e)
        {
          throw ConfigError ("line " + std::to_string (lineno) + ": " + e.what());
        }
      catch (const InvalidParameter& e)
        {
          throw ConfigError ("line " + std::to_string (lineno) + ": " + e.what());
        }
    }
  if (cfg.clips.empty())
    throw ConfigError ("config names no clips");
  if (cfg.modes.empty())
    throw ConfigError ("config names no smoothing modes");
  return cfg;
}

inline BenchConfig
BenchConfig::load (const std::string& path)
{
  std::ifstream f (path);
  if (!f)
    throw ConfigError ("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse (ss.str());
}

// "synth:<style>:<seed>[:<seconds>]" or a WAV path.
inline AudioClip
load_clip_source (const std::string& source)
{
  if (source.rfind ("synth:", 0) != 0)
    return read_wav (source);
  std::vector<std::string> parts;
  std::stringstream ss (source.substr (6));
  for (std::string p; std::getline (ss, p, ':');)
    parts.push_back (p);
  if (parts.size() < 2 || parts.size() > 3)
    throw InvalidParameter ("synthetic clip source must be synth:<style>:<seed>[:<seconds>]");
  const auto seed = detail::parse_number<std::uint64_t> (parts[1], "seed");
  const double seconds = parts.size() == 3 ? detail::parse_number<double> (parts[2], "seconds") : 16.0;
  return synth_clip (parse_style (parts[0]), seed, seconds);
}

inline BitSequence
random_payload (std::size_t n, std::uint64_t seed)
{
  std::mt19937_64 rng (seed);
  std::vector<int> bits (n);
  for (auto& b : bits)
    b = (rng() >> 63) ? 1 : -1;
  return BitSequence (std::move (bits));
}

struct BenchRow
{
  std::string clip;
  std::string mode;
  std::string attack;  // empty in embed-quality rows
  std::string status = "ok";
  std::size_t ne = 0;
  std::size_t nd = 0;
  std::optional<double> np;
  double esnr = 0;
  double dsnr = 0;
  std::optional<double> ber;
  std::size_t ops = 0;
  std::optional<double> ops_per_code;
  double scale = 1.0;
  std::optional<double> runtime_ms;

  bool ok() const { return status == "ok"; }
};

struct ClipSummary
{
  std::string clip;
  std::string error;  // non-empty when the clip could not be used
  std::size_t length = 0;
  std::size_t zero_crossings = 0;
  double num = 0;
  EmbedParams params;
  bool capped = false;
};

struct EvalReport
{
  bool attacks_present = false;
  std::size_t sync_bits = 0;
  std::size_t payload_bits = 0;
  std::vector<double> scales;
  std::vector<ClipSummary> clips;
  std::vector<BenchRow> rows;
};

struct Aggregate
{
  std::size_t ne = 0;
  std::size_t nd = 0;
  std::size_t ops = 0;
  std::size_t cells = 0;

  double np() const { return ne ? static_cast<double> (nd) / static_cast<double> (ne) : 0.0; }
};

// Sum over all successful rows matching mode (and attack, when given).
inline Aggregate
aggregate (const EvalReport& rep, const std::string& mode, const std::optional<std::string>& attack = std::nullopt)
{
  Aggregate agg;
  for (const auto& r : rep.rows)
    if (r.ok() && r.mode == mode && (!attack || r.attack == *attack))
      {
        agg.ne += r.ne;
        agg.nd += r.nd;
        agg.ops += r.ops;
        agg.cells++;
      }
  return agg;
}

namespace detail {

struct ClipRun
{
  ClipSummary summary;
  std::vector<BenchRow> rows;
};

inline ClipRun
run_clip (const std::string& source, const BenchConfig& cfg, const BitSequence& payload)
{
  using clock = std::chrono::steady_clock;
  ClipRun run;
  run.summary.clip = source;

  AudioClip clip;
  try
    {
      clip = load_clip_source (source);
      run.summary.length = clip.size();
      if (cfg.fixed)
        {
          run.summary.params.ma = MAParams { cfg.fixed->a, cfg.fixed->b };
          run.summary.params.strength = cfg.fixed->strength;
          run.summary.params.ramp_length = cfg.param_options.ramp_length;
          run.summary.params.guard = cfg.param_options.guard;
          run.summary.params.ma.validate (clip.size());
        }
      else
        {
          const auto der = choose_params (clip, cfg.calibration, cfg.param_options);
          run.summary.zero_crossings = der.zero_crossings;
          run.summary.num = der.num;
          run.summary.params = der.params;
          run.summary.capped = der.capped;
        }
    }
  catch (const std::exception& e)
    {
      run.summary.error = e.what();
      return run;
    }

  const EmbedParams& ep = run.summary.params;
  DetectParams dp = DetectParams::for_frames (ep.ma, ep.strength, cfg.sync, cfg.payload_bits);
  dp.threshold = cfg.threshold;
  dp.scales = cfg.scales;
  const FrameLayout layout { cfg.sync, payload, true };

  for (Smoothing mode : cfg.modes)
    {
      BenchRow base;
      base.clip = source;
      base.mode = smoothing_name (mode);

      EmbedResult embedded;
      try
        {
          embedded = embed_frames (clip, layout, ep, mode);
        }
      catch (const std::exception& e)
        {
          base.status = std::string ("error: ") + e.what();
          if (cfg.attacks.empty())
            run.rows.push_back (base);
          for (const auto& chain : cfg.attacks)
            {
              BenchRow r = base;
              r.attack = chain_to_string (chain);
              run.rows.push_back (r);
            }
          continue;
        }
      AudioClip marked = cfg.quantize_output ? quantize_to_pcm16 (embedded.marked) : embedded.marked;
      base.ne = embedded.record.codes_embedded;
      base.esnr = snr_measured (clip, marked);
      base.dsnr = snr_predicted (clip, ep.strength);

      if (cfg.attacks.empty())
        {
          run.rows.push_back (base);
          continue;
        }

      for (const auto& chain : cfg.attacks)
        {
          BenchRow r = base;
          r.attack = chain_to_string (chain);
          const auto t0 = clock::now();
          try
            {
              const AttackResult attacked = apply_chain (marked, chain);
              if (!attacked.ran)
                {
                  r.status = attacked.note;
                  run.rows.push_back (r);
                  continue;
                }
              const DetectionReport det = detect (attacked.clip, dp, cfg.payload_bits,
                                                  cfg.payload_bits ? &payload : nullptr);
              r.nd = det.detected();
              r.np = r.ne ? std::optional<double> (static_cast<double> (r.nd) / static_cast<double> (r.ne)) : std::nullopt;
              r.ber = det.payload_ber;
              r.ops = det.extraction_ops;
              if (r.ne)
                r.ops_per_code = static_cast<double> (r.ops) / static_cast<double> (r.ne);
              r.scale = det.scale;
            }
          catch (const std::exception& e)
            {
              r.status = std::string ("error: ") + e.what();
            }
          if (cfg.timing)
            r.runtime_ms = std::chrono::duration<double, std::milli> (clock::now() - t0).count();
          run.rows.push_back (r);
        }
    }
  return run;
}

}  // namespace detail

/**
 * Run the whole matrix. Clips are independent and may be processed on
 * `cfg.jobs` threads; rows are always assembled in config order. A clip that
 * cannot be loaded or parameterized gets an error entry and the run goes on.
 */
inline EvalReport
run_benchmark (const BenchConfig& cfg)
{
  for (const auto& chain : cfg.attacks)
    for (const auto& spec : chain)
      spec.validate();
  const BitSequence payload = random_payload (cfg.payload_bits, cfg.payload_seed);

  EvalReport rep;
  rep.attacks_present = !cfg.attacks.empty();
  rep.sync_bits = cfg.sync.size();
  rep.payload_bits = cfg.payload_bits;
  rep.scales = cfg.scales;

  std::vector<detail::ClipRun> runs (cfg.clips.size());
  if (cfg.jobs <= 1)
    {
      for (std::size_t c = 0; c < cfg.clips.size(); c++)
        runs[c] = detail::run_clip (cfg.clips[c], cfg, payload);
    }
  else
    {
      for (std::size_t start = 0; start < cfg.clips.size(); start += cfg.jobs)
        {
          std::vector<std::future<detail::ClipRun>> batch;
          const std::size_t end = std::min (cfg.clips.size(), start + cfg.jobs);
          for (std::size_t c = start; c < end; c++)
            batch.push_back (std::async (std::launch::async, detail::run_clip, std::cref (cfg.clips[c]),
                                         std::cref (cfg), std::cref (payload)));
          for (std::size_t c = start; c < end; c++)
            runs[c] = batch[c - start].get();
        }
    }

  for (auto& run : runs)
    {
      rep.clips.push_back (std::move (run.summary));
      for (auto& row : run.rows)
        rep.rows.push_back (std::move (row));
    }
  return rep;
}

// Sample-exhaustive search cost l1*n1 + l2*n2, the work a detector does when
// it has to try every sample offset for every bit.
inline std::size_t
exhaustive_search_cost (std::size_t l1, std::size_t n1, std::size_t l2, std::size_t n2)
{
  return l1 * n1 + l2 * n2;
}

namespace detail {

inline std::string
fixed (double v, int digits)
{
  if (std::isinf (v))
    return v > 0 ? "inf" : "-inf";
  std::ostringstream o;
  o << std::fixed << std::setprecision (digits) << v;
  return o.str();
}

inline std::string
opt (const std::optional<double>& v, int digits)
{
  return v ? fixed (*v, digits) : "-";
}

}  // namespace detail

inline std::string
format_report (const EvalReport& rep)
{
  using detail::fixed;
  using detail::opt;
  std::ostringstream o;
  o << "report = mawsync-bench 1\n";
  o << "sync_bits = " << rep.sync_bits << "\n";
  o << "payload_bits = " << rep.payload_bits << "\n";
  o << "detector_scales = ";
  if (rep.scales.empty())
    o << "none";
  for (std::size_t i = 0; i < rep.scales.size(); i++)
    o << (i ? " " : "") << fixed (rep.scales[i], 2);
  o << "\n";
  o << "odg = n/a (out of scope)\n";

  for (const auto& c : rep.clips)
    {
      o << "clip = " << c.clip;
      if (!c.error.empty())
        {
          o << " error=\"" << c.error << "\"\n";
          continue;
        }
      o << " length=" << c.length;
      if (c.zero_crossings)
        o << " z_m10=" << c.zero_crossings << " num=" << fixed (c.num, 3);
      o << " a=" << c.params.ma.a << " b=" << c.params.ma.b << " s=" << fixed (c.params.strength, 4)
        << " ramp=" << c.params.ramp_length << " guard=" << c.params.guard << (c.capped ? " capped=yes" : "") << "\n";
    }

  for (const auto& r : rep.rows)
    {
      o << "row clip=" << r.clip << " mode=" << r.mode;
      if (rep.attacks_present)
        o << " attack=\"" << r.attack << "\"";
      o << " status=\"" << r.status << "\" ne=" << r.ne << " esnr=" << fixed (r.esnr, 3) << " dsnr=" << fixed (r.dsnr, 3);
      if (rep.attacks_present)
        {
          o << " nd=" << r.nd << " np=" << opt (r.np, 4) << " ber=" << opt (r.ber, 4) << " ops=" << r.ops
            << " ops_per_ne=" << opt (r.ops_per_code, 2) << " scale=" << fixed (r.scale, 2);
          if (r.runtime_ms)
            o << " runtime_ms=" << fixed (*r.runtime_ms, 1);
        }
      o << "\n";
    }

  // columnar table
  std::vector<std::vector<std::string>> table;
  if (rep.attacks_present)
    {
      table.push_back ({ "clip", "mode", "attack", "#NE", "#ND", "NP", "ESNR", "DSNR", "BER", "ops", "ops/NE", "ODG", "status" });
      for (const auto& r : rep.rows)
        table.push_back ({ r.clip, r.mode, r.attack, std::to_string (r.ne), r.ok() ? std::to_string (r.nd) : "-",
                           opt (r.np, 3), fixed (r.esnr, 2), fixed (r.dsnr, 2), opt (r.ber, 3),
                           r.ok() ? std::to_string (r.ops) : "-", opt (r.ops_per_code, 1), "n/a", r.status });
    }
  else
    {
      table.push_back ({ "clip", "mode", "#NE", "ESNR", "DSNR", "ODG", "status" });
      for (const auto& r : rep.rows)
        table.push_back ({ r.clip, r.mode, std::to_string (r.ne), fixed (r.esnr, 2), fixed (r.dsnr, 2), "n/a", r.status });
    }
  std::vector<std::size_t> width (table[0].size(), 0);
  for (const auto& line : table)
    for (std::size_t k = 0; k < line.size(); k++)
      width[k] = std::max (width[k], line[k].size());
  o << "\n";
  for (const auto& line : table)
    {
      for (std::size_t k = 0; k < line.size(); k++)
        {
          o << line[k];
          if (k + 1 < line.size())
            o << std::string (width[k] - line[k].size() + 2, ' ');
        }
      o << "\n";
    }

  if (rep.attacks_present)
    {
      // per mode and attack, summed over clips
      std::vector<std::string> modes, attacks;
      for (const auto& r : rep.rows)
        {
          if (std::find (modes.begin(), modes.end(), r.mode) == modes.end())
            modes.push_back (r.mode);
          if (std::find (attacks.begin(), attacks.end(), r.attack) == attacks.end())
            attacks.push_back (r.attack);
        }
      o << "\n";
      for (const auto& a : attacks)
        for (const auto& m : modes)
          {
            const Aggregate agg = aggregate (rep, m, a);
            o << "total mode=" << m << " attack=\"" << a << "\" ne=" << agg.ne << " nd=" << agg.nd
              << " np=" << (agg.ne ? fixed (agg.np(), 4) : "-") << "\n";
          }

      std::size_t ops = 0, ne = 0;
      for (const auto& r : rep.rows)
        if (r.ok() && r.attack == "none")
          {
            ops += r.ops;
            ne += r.ne;
          }
      const std::size_t frame = rep.sync_bits + rep.payload_bits;
      o << "search_frame_bits = " << frame << "\n";
      if (ne)
        o << "search_ops_per_frame = " << fixed (static_cast<double> (ops) / static_cast<double> (ne), 2)
          << " (unattacked cells)\n";
      o << "search_baseline l1=4 l2=512 = " << exhaustive_search_cost (4, rep.sync_bits, 512, rep.payload_bits) << "\n";
      o << "search_baseline l1=l2=484 = " << exhaustive_search_cost (484, rep.sync_bits, 484, rep.payload_bits) << "\n";
      o << "search_baseline l1=l2=1020 = " << exhaustive_search_cost (1020, rep.sync_bits, 1020, rep.payload_bits) << "\n";
    }
  return o.str();
}

}  // namespace mawsync
