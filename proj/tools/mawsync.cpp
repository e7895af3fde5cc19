// mawsync: command-line front end for embedding, detection, attacks,
// parameter choice and the benchmark harness.

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mawsync.hpp"

using namespace mawsync;

namespace {

struct WindowArgs
{
  std::size_t a = 0;
  std::size_t b = 0;
  double strength = 0;
};

void
add_window_options (CLI::App* cmd, WindowArgs& w, bool required)
{
  auto* a = cmd->add_option ("--a", w.a, "short moving-average window");
  auto* b = cmd->add_option ("--b", w.b, "long moving-average window");
  auto* s = cmd->add_option ("--strength,-s", w.strength, "embedding strength (lattice step)");
  if (required)
    {
      a->required();
      b->required();
      s->required();
    }
}

std::string
bits_as_binary (const BitSequence& bits)
{
  std::string out;
  for (int v : bits)
    out += v > 0 ? '1' : '0';
  return out;
}

std::string
format_db (double v)
{
  if (std::isinf (v))
    return "inf";
  char buf[32];
  std::snprintf (buf, sizeof buf, "%.3f", v);
  return buf;
}

void
print_derivation (const ParamDerivation& d)
{
  std::cout << "length = " << d.length << "\n";
  std::cout << "z_m10 = " << d.zero_crossings << "\n";
  std::printf ("num = L / z_m10 = %.3f\n", d.num);
  std::cout << "b = " << d.params.ma.b << "\n";
  std::cout << "a = " << d.params.ma.a << "\n";
  for (const auto& sp : d.spreads)
    std::printf ("spread %s lag=%zu p=%.6f\n", sp.attack.c_str(), sp.lag, sp.percentile);
  std::printf ("strength_required = %.4f\n", d.required_strength);
  std::printf ("strength_cap = %.4f\n", d.strength_cap);
  std::printf ("s = %.4f%s\n", d.params.strength, d.capped ? " (capped)" : "");
}

int
cmd_embed (const std::string& in, const std::string& out, const std::string& sync, const std::string& payload_spec,
           const WindowArgs& w, std::size_t ramp, const std::string& mode, std::optional<std::size_t> guard)
{
  const AudioClip clip = read_wav (in);
  EmbedParams params;
  if (w.a || w.b || w.strength > 0)
    {
      if (!(w.a && w.b && w.strength > 0))
        throw InvalidParameter ("--a, --b and --strength go together (or omit all three for automatic choice)");
      params.ma = MAParams { w.a, w.b };
      params.ma.validate (clip.size());
      params.strength = w.strength;
    }
  else
    {
      const ParamDerivation d = choose_params (clip, default_calibration_attacks());
      params = d.params;
      std::printf ("params a=%zu b=%zu s=%.4f (automatic)\n", params.ma.a, params.ma.b, params.strength);
    }
  params.ramp_length = ramp;
  if (guard)
    params.guard = *guard;

  Smoothing smoothing = parse_smoothing (mode);
  if (ramp == 0)
    smoothing = Smoothing::none;

  FrameLayout layout;
  layout.sync = parse_bits (sync);
  if (!payload_spec.empty())
    layout.payload = parse_bits (payload_spec);

  const EmbedResult res = embed_frames (clip, layout, params, smoothing);
  const AudioClip marked = quantize_to_pcm16 (res.marked);
  write_wav (out, marked);

  std::cout << "codes_embedded = " << res.record.codes_embedded << "\n";
  std::cout << "frames_completed = " << res.record.frames_completed << "\n";
  std::cout << "bits_embedded = " << res.record.bits_embedded() << "\n";
  std::cout << "clamped_samples = " << res.record.clamped_samples << "\n";
  std::cout << "snr_measured = " << format_db (snr_measured (clip, marked)) << "\n";
  std::cout << "snr_predicted = " << format_db (snr_predicted (clip, params.strength)) << "\n";
  return 0;
}

int
cmd_detect (const std::string& in, const std::string& sync, const WindowArgs& w, std::size_t payload_len,
            std::size_t threshold, const std::string& reference, const std::vector<double>& scales, bool speed_search)
{
  const AudioClip clip = read_wav (in);
  std::optional<BitSequence> ref;
  if (!reference.empty())
    {
      ref = parse_bits (reference);
      if (payload_len == 0)
        payload_len = ref->size();
    }
  DetectParams params = DetectParams::for_frames (MAParams { w.a, w.b }, w.strength, parse_bits (sync), payload_len);
  params.threshold = threshold;
  params.scales = speed_search ? default_scale_grid() : scales;
  const DetectionReport rep = detect (clip, params, payload_len, ref ? &*ref : nullptr);

  std::cout << "windows = " << rep.windows.a << " " << rep.windows.b << "\n";
  std::printf ("scale = %.2f\n", rep.scale);
  std::cout << "extracted_bits = " << rep.bits.size() << "\n";
  std::cout << "extraction_ops = " << rep.extraction_ops << "\n";
  std::cout << "candidates = " << rep.candidates << "\n";
  std::cout << "dropped_close = " << rep.dropped_close << "\n";
  std::cout << "syncs = " << rep.detected() << "\n";
  for (const SyncHit& h : rep.syncs)
    std::cout << "sync position=" << h.position << " cross=" << h.cross_index << " r=" << h.correlation
              << (h.isolated ? " isolated" : "") << "\n";
  for (const auto& p : rep.payloads)
    std::cout << "payload " << bits_as_binary (p) << "\n";
  if (rep.payload_ber)
    std::printf ("payload_ber = %.6f\n", *rep.payload_ber);
  return 0;
}

int
cmd_attack (const std::string& in, const std::string& out, const std::vector<std::string>& specs)
{
  const AudioClip clip = read_wav (in);
  std::vector<AttackSpec> chain;
  for (const auto& s : specs)
    chain.push_back (AttackSpec::parse (s));
  const AttackResult res = apply_chain (clip, chain);
  if (!res.ran)
    {
      std::cerr << "mawsync: " << chain_to_string (chain) << ": " << res.note << "\n";
      return 3;
    }
  write_wav (out, quantize_to_pcm16 (res.clip));
  std::cout << "chain = " << chain_to_string (chain) << "\n";
  std::cout << "samples = " << res.clip.size() << "\n";
  if (res.clip.size() == clip.size())
    std::cout << "snr = " << format_db (snr_measured (clip, quantize_to_pcm16 (res.clip))) << "\n";
  return 0;
}

int
cmd_params (const std::string& in, const std::vector<std::string>& calibration)
{
  const AudioClip clip = read_wav (in);
  std::vector<AttackSpec> cal;
  if (calibration.empty())
    cal = default_calibration_attacks();
  for (const auto& s : calibration)
    cal.push_back (AttackSpec::parse (s));
  print_derivation (choose_params (clip, cal));
  return 0;
}

int
cmd_bench (const std::string& config, const std::string& out, unsigned jobs)
{
  BenchConfig cfg = BenchConfig::load (config);
  if (jobs > 0)
    cfg.jobs = jobs;
  const std::string text = format_report (run_benchmark (cfg));
  if (out.empty())
    std::cout << text;
  else
    {
      std::ofstream f (out);
      if (!f)
        throw std::runtime_error ("cannot write report '" + out + "'");
      f << text;
    }
  return 0;
}

int
cmd_synth (const std::string& style, std::uint64_t seed, double seconds, const std::string& out)
{
  write_wav (out, synth_clip (parse_style (style), seed, seconds));
  return 0;
}

}  // namespace

int
main (int argc, char** argv)
{
  CLI::App app { "Blind audio synchronization-code watermarking" };
  app.require_subcommand (1);

  std::string in, out, sync = "barker16", payload, mode = "EC", reference, config, style = "pop";
  WindowArgs w;
  std::size_t ramp = 5, payload_len = 0, threshold = 0;
  std::optional<std::size_t> guard;
  std::vector<std::string> specs, calibration;
  std::vector<double> scales;
  bool speed_search = false;
  unsigned jobs = 0;
  std::uint64_t seed = 1;
  double seconds = 16;

  auto* embed = app.add_subcommand ("embed", "embed sync (+ payload) frames into a WAV file");
  embed->add_option ("--in", in, "input WAV (16-bit PCM mono)")->required();
  embed->add_option ("--out", out, "output WAV")->required();
  embed->add_option ("--sync", sync, "sync code: barker16, barkerN, mseq:K[:seed], bin:..., hex:...");
  embed->add_option ("--payload", payload, "payload bits: hex:... or bin:...");
  add_window_options (embed, w, false);
  embed->add_option ("--smooth", ramp, "ramp length T_N (0 disables smoothing)");
  embed->add_option ("--mode", mode, "smoothing mode EA, EB or EC");
  embed->add_option ("--guard", guard, "margin below b for crosses skipped inside a sync code (default 1 with automatic parameters, else 0)");

  auto* det = app.add_subcommand ("detect", "detect sync codes and read payloads");
  det->add_option ("--in", in, "input WAV")->required();
  det->add_option ("--sync", sync, "sync code spec");
  add_window_options (det, w, true);
  det->add_option ("--payload-len", payload_len, "payload bits after each sync");
  det->add_option ("--payload", reference, "reference payload for BER (hex:... or bin:...)");
  det->add_option ("--threshold", threshold, "bits that must match (default: all)");
  det->add_option ("--scales", scales, "time-scale hypotheses, e.g. 0.98 1 1.02")->delimiter (',');
  det->add_flag ("--speed-search", speed_search, "try time scales 0.90 .. 1.10");

  auto* atk = app.add_subcommand ("attack", "apply an attack chain to a WAV file");
  atk->add_option ("--in", in, "input WAV")->required();
  atk->add_option ("--out", out, "output WAV")->required();
  atk->add_option ("--spec", specs, "attack spec, repeatable (e.g. awgn:55:seed=7)")->required();

  auto* prm = app.add_subcommand ("params", "derive a, b and s for a clip");
  prm->add_option ("--in", in, "input WAV")->required();
  prm->add_option ("--calibration", calibration, "calibration attack, repeatable");

  auto* bench = app.add_subcommand ("bench", "run a benchmark matrix from a config file");
  bench->add_option ("--config", config, "benchmark config")->required();
  bench->add_option ("--out", out, "report file (default: stdout)");
  bench->add_option ("--jobs,-j", jobs, "clips processed in parallel");

  auto* syn = app.add_subcommand ("synth", "write a synthetic corpus clip");
  syn->add_option ("--style", style, "light, pop or blues");
  syn->add_option ("--seed", seed, "corpus seed");
  syn->add_option ("--seconds", seconds, "duration");
  syn->add_option ("--out", out, "output WAV")->required();

  CLI11_PARSE (app, argc, argv);

  try
    {
      if (*embed)
        return cmd_embed (in, out, sync, payload, w, ramp, mode, guard);
      if (*det)
        return cmd_detect (in, sync, w, payload_len, threshold, reference, scales, speed_search);
      if (*atk)
        return cmd_attack (in, out, specs);
      if (*prm)
        return cmd_params (in, calibration);
      if (*bench)
        return cmd_bench (config, out, jobs);
      if (*syn)
        return cmd_synth (style, seed, seconds, out);
    }
  catch (const std::exception& e)
    {
      std::cerr << "mawsync: " << e.what() << "\n";
      return 2;
    }
  return 1;
}
