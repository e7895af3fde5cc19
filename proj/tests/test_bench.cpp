#include <gtest/gtest.h>

#include "mawsync/bench.hpp"

using namespace mawsync;

namespace {

std::string
error_of (std::string_view text)
{
  try
    {
      BenchConfig::parse (text);
    }
  catch (const ConfigError& e)
    {
      return e.what();
    }
  return {};
}

}  // namespace

TEST (BenchConfig, Parse)
{
  const auto cfg = BenchConfig::parse (R"(
# corpus
clip = synth:pop:1:4
clip = synth:blues:2:4   # trailing comment
mode = EA EC
attack = none
attack = requantize:8 > awgn:40:seed=3
params = a=26 b=40 s=0.016
payload_bits = 32
scales = auto
timing = on
)");
  EXPECT_EQ (cfg.clips.size(), 2u);
  EXPECT_EQ (cfg.modes, (std::vector<Smoothing> { Smoothing::none, Smoothing::all }));
  ASSERT_EQ (cfg.attacks.size(), 2u);
  EXPECT_TRUE (cfg.attacks[0].empty());
  EXPECT_EQ (chain_to_string (cfg.attacks[1]), "requantize:8 > awgn:40:seed=3");
  ASSERT_TRUE (cfg.fixed.has_value());
  EXPECT_EQ (cfg.fixed->b, 40u);
  EXPECT_EQ (cfg.payload_bits, 32u);
  EXPECT_EQ (cfg.scales, default_scale_grid());
  EXPECT_TRUE (cfg.timing);
}

TEST (BenchConfig, ErrorsCarryLineNumbers)
{
  EXPECT_EQ (error_of ("clip = synth:pop:1\nbogus = 1\n"), "line 2: unknown key 'bogus'");
  EXPECT_EQ (error_of ("clip synth:pop:1\n"), "line 1: expected 'key = value'");
  EXPECT_NE (error_of ("clip = a\n\nattack = awgn:30\n").find ("line 3:"), std::string::npos);
  EXPECT_NE (error_of ("clip = a\nmode = ED\n").find ("line 2:"), std::string::npos);
  EXPECT_NE (error_of ("clip = a\nparams = a=26 b=40\n").find ("line 2:"), std::string::npos);
  EXPECT_NE (error_of ("clip = a\npayload_bits = -3\n").find ("line 2:"), std::string::npos);
  EXPECT_NE (error_of ("clip = a\ntiming = maybe\n").find ("line 2:"), std::string::npos);
  EXPECT_EQ (error_of ("mode = EA\n"), "config names no clips");
  EXPECT_THROW (BenchConfig::load ("/nonexistent/bench.cfg"), ConfigError);
}

TEST (DefaultScaleGrid, Values)
{
  const auto g = default_scale_grid();
  ASSERT_EQ (g.size(), 11u);
  EXPECT_DOUBLE_EQ (g.front(), 0.90);
  EXPECT_DOUBLE_EQ (g[5], 1.0);
  EXPECT_DOUBLE_EQ (g.back(), 1.10);
}

TEST (ExhaustiveSearchCost, Arithmetic)
{
  EXPECT_EQ (exhaustive_search_cost (4, 16, 512, 84), 4u * 16 + 512 * 84);
  EXPECT_EQ (exhaustive_search_cost (484, 16, 484, 84), 48400u);
}

TEST (Bench, EmbedQualityOnlyReport)
{
  const auto cfg = BenchConfig::parse ("clip = synth:pop:1:6\nmode = EA EC\npayload_bits = 16\n");
  const auto rep = run_benchmark (cfg);
  ASSERT_EQ (rep.rows.size(), 2u);
  EXPECT_FALSE (rep.attacks_present);
  for (const auto& r : rep.rows)
    {
      EXPECT_TRUE (r.ok()) << r.status;
      EXPECT_GT (r.ne, 0u);
      EXPECT_TRUE (r.attack.empty());
      EXPECT_GT (r.esnr, 20.0);
    }
  const std::string text = format_report (rep);
  EXPECT_NE (text.find ("mode=EA"), std::string::npos);
  EXPECT_EQ (text.find ("nd="), std::string::npos);
  EXPECT_EQ (text.find ("runtime"), std::string::npos);
}

TEST (Bench, DeterministicReportAndNpArithmetic)
{
  const std::string cfg_text = "clip = synth:blues:4:6\nclip = synth:light:5:6\nmode = EA\n"
                               "attack = none\nattack = requantize:10\npayload_bits = 16\njobs = 2\n";
  const auto cfg = BenchConfig::parse (cfg_text);
  const auto rep = run_benchmark (cfg);
  EXPECT_EQ (format_report (rep), format_report (run_benchmark (cfg)));

  ASSERT_EQ (rep.rows.size(), 4u);
  for (const auto& r : rep.rows)
    {
      ASSERT_TRUE (r.ok()) << r.status;
      ASSERT_TRUE (r.np.has_value());
      EXPECT_DOUBLE_EQ (*r.np, static_cast<double> (r.nd) / static_cast<double> (r.ne));
    }
  const Aggregate clean = aggregate (rep, "EA", std::string ("none"));
  EXPECT_EQ (clean.cells, 2u);
  EXPECT_EQ (clean.ne, rep.rows[0].ne + rep.rows[2].ne);
  EXPECT_EQ (clean.nd, rep.rows[0].nd + rep.rows[2].nd);
  EXPECT_GE (static_cast<double> (clean.nd), 0.98 * static_cast<double> (clean.ne));
  EXPECT_EQ (aggregate (rep, "EA").cells, 4u);
}

TEST (Bench, BadClipIsReportedAndRunContinues)
{
  const auto cfg = BenchConfig::parse ("clip = /nonexistent/a.wav\nclip = synth:pop:2:6\nmode = EA\n"
                                       "attack = none\npayload_bits = 16\n");
  const auto rep = run_benchmark (cfg);
  ASSERT_EQ (rep.clips.size(), 2u);
  EXPECT_FALSE (rep.clips[0].error.empty());
  EXPECT_TRUE (rep.clips[1].error.empty());
  ASSERT_EQ (rep.rows.size(), 1u);
  EXPECT_EQ (rep.rows[0].clip, "synth:pop:2:6");
  EXPECT_NE (format_report (rep).find ("clip = /nonexistent/a.wav error="), std::string::npos);
}

TEST (Bench, ClipSourceErrors)
{
  EXPECT_THROW (load_clip_source ("synth:pop"), InvalidParameter);
  EXPECT_THROW (load_clip_source ("synth:jazz:1"), InvalidParameter);
  EXPECT_EQ (load_clip_source ("synth:pop:1:0.5").size(), 22050u);
}
