#include "stgvt/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "stgvt/synthetic.hpp"

namespace stgvt {
namespace {

namespace fs = std::filesystem;

SyntheticDataset small_dataset(std::uint64_t seed, int scenes = 15) {
  DatasetSpec spec;
  spec.n_scenes = scenes;
  spec.seed = seed;
  return generate_dataset(spec);
}

PipelineConfig config_for(ScorerKind kind) {
  PipelineConfig cfg;
  cfg.scoring.kind = kind;
  cfg.scoring.seed = 7;
  return cfg;
}

TEST(Pipeline, OracleRecoversNoiselessScenes) {
  const SyntheticDataset d = small_dataset(1);
  const PipelineResult r = run_pipeline(d.detections, d.annotations, config_for(ScorerKind::kOracle));
  EXPECT_EQ(r.report.rows.size(), 15u);
  EXPECT_GE(r.report.m_viou, 0.9);
  EXPECT_GE(r.report.m_tiou, 0.9);
}

TEST(Pipeline, RandomScorerDoesWorse) {
  const SyntheticDataset d = small_dataset(2);
  const double oracle =
      run_pipeline(d.detections, d.annotations, config_for(ScorerKind::kOracle)).report.m_viou;
  const double random =
      run_pipeline(d.detections, d.annotations, config_for(ScorerKind::kRandom)).report.m_viou;
  EXPECT_LT(random, oracle);
}

TEST(Pipeline, ToyScorerRunsAndIsDeterministic) {
  const SyntheticDataset d = small_dataset(3, 5);
  const PipelineResult a = run_pipeline(d.detections, d.annotations, config_for(ScorerKind::kToy));
  const PipelineResult b = run_pipeline(d.detections, d.annotations, config_for(ScorerKind::kToy));
  EXPECT_EQ(a.predictions.size(), 5u);
  EXPECT_EQ(predictions_to_string(a.predictions), predictions_to_string(b.predictions));
  EXPECT_EQ(a.scores, b.scores);
}

TEST(Pipeline, SampleWithoutProposalsScoresZero) {
  SyntheticDataset d = small_dataset(4, 2);
  GroundTruthAnnotation orphan = d.annotations.front();
  orphan.sample_id = "zz_orphan";
  orphan.video_id = "missing_video";
  d.annotations.push_back(orphan);
  const PipelineResult r = run_pipeline(d.detections, d.annotations, config_for(ScorerKind::kOracle));
  ASSERT_EQ(r.report.rows.size(), 3u);
  EXPECT_EQ(r.report.rows.back().sample_id, "zz_orphan");
  EXPECT_FALSE(r.report.rows.back().predicted);
  EXPECT_EQ(r.report.rows.back().viou, 0.0);
}

TEST(Pipeline, ErrorsCarryStageName) {
  const SyntheticDataset d = small_dataset(5, 1);
  PipelineConfig cfg = config_for(ScorerKind::kOracle);
  cfg.linker.max_gap = -1;
  try {
    run_pipeline(d.detections, d.annotations, cfg);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "link");
    EXPECT_EQ(std::string(e.what()).rfind("link: ", 0), 0u);
  }
  cfg = config_for(ScorerKind::kOracle);
  cfg.decoder.epsilon = 2.0;
  try {
    run_pipeline(d.detections, d.annotations, cfg);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "trim");
  }
}

TEST(LabelStage, EmitsLabelsAndTargets) {
  const SyntheticDataset d = small_dataset(6, 1);
  const ProposalSet props = link_stage(d.detections, LinkerConfig{});
  const std::vector<Json> rows = label_stage(props, d.annotations, 6);
  ASSERT_EQ(rows.size(), props.begin()->second.size());
  int positives = 0;
  for (const Json& j : rows) {
    positives += j["label"] == "positive";
    for (const Json& f : j["frames"]) {
      EXPECT_EQ(f["offsets"].is_null(), f["relevance"] == 0);
    }
  }
  EXPECT_GE(positives, 1);
}

TEST(ScorerKindParsing, Names) {
  EXPECT_EQ(parse_scorer_kind("toy"), ScorerKind::kToy);
  EXPECT_EQ(parse_scorer_kind("oracle"), ScorerKind::kOracle);
  EXPECT_EQ(parse_scorer_kind("random"), ScorerKind::kRandom);
  EXPECT_THROW(parse_scorer_kind("learned"), InvalidInput);
}

// Runs the CLI through the shell inside a scratch directory.
class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stgvt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = "cd '" + dir_.string() + "' && '" STGVT_CLI "' " + args +
                            " > stdout.txt 2> stderr.txt";
    return std::system(cmd.c_str());
  }
  std::string slurp(const std::string& name) {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, ChainedStagesEqualFusedPipeline) {
  ASSERT_EQ(run("--seed 3 synth --scenes 6 --detections det.jsonl --annotations ann.jsonl"), 0);
  for (const std::string scorer : {"oracle", "random", "toy"}) {
    ASSERT_EQ(run("--seed 5 link --detections det.jsonl --out props.jsonl"), 0);
    ASSERT_EQ(run("--seed 5 score --proposals props.jsonl --annotations ann.jsonl --scorer " +
                  scorer + " --out scores.jsonl"), 0);
    ASSERT_EQ(run("--seed 5 trim --proposals props.jsonl --scores scores.jsonl --out pred.jsonl"), 0);
    ASSERT_EQ(run("--seed 5 eval --predictions pred.jsonl --annotations ann.jsonl "
                  "--report chained_report.json"), 0);
    ASSERT_EQ(run("--seed 5 pipeline --detections det.jsonl --annotations ann.jsonl --scorer " +
                  scorer + " --out fused.jsonl --report fused_report.json"), 0);
    EXPECT_FALSE(slurp("pred.jsonl").empty());
    EXPECT_EQ(slurp("pred.jsonl"), slurp("fused.jsonl")) << scorer;
    EXPECT_EQ(slurp("chained_report.json"), slurp("fused_report.json")) << scorer;
  }
}

TEST_F(CliTest, SameSeedSameBytes) {
  ASSERT_EQ(run("--seed 9 synth --scenes 3 --noise 2 --detections d1.jsonl --annotations a1.jsonl"), 0);
  ASSERT_EQ(run("--seed 9 synth --scenes 3 --noise 2 --detections d2.jsonl --annotations a2.jsonl"), 0);
  EXPECT_EQ(slurp("d1.jsonl"), slurp("d2.jsonl"));
  EXPECT_EQ(slurp("a1.jsonl"), slurp("a2.jsonl"));
  ASSERT_EQ(run("--seed 4 pipeline --detections d1.jsonl --annotations a1.jsonl --scorer random --out p1.jsonl"), 0);
  ASSERT_EQ(run("--seed 4 pipeline --detections d1.jsonl --annotations a1.jsonl --scorer random --out p2.jsonl"), 0);
  EXPECT_EQ(slurp("p1.jsonl"), slurp("p2.jsonl"));
}

TEST_F(CliTest, FailureIsStageTagged) {
  {
    std::ofstream bad(dir_ / "bad.jsonl");
    bad << R"({"video_id":"v","frame_idx":0,"bbox":[5,0,1,1],"confidence":0.5,"feature":[1]})" "\n";
  }
  EXPECT_NE(run("link --detections bad.jsonl --out props.jsonl"), 0);
  const std::string err = slurp("stderr.txt");
  EXPECT_EQ(err.rfind("link: ", 0), 0u) << err;
  EXPECT_NE(err.find("line 1"), std::string::npos) << err;
}

TEST_F(CliTest, AnnotateCommands) {
  {
    std::ofstream f(dir_ / "fwd.jsonl");
    f << R"({"video_id":"v","boxes":{"0":[0,0,10,10],"1":[0,0,10,10]}})" "\n";
    std::ofstream b(dir_ / "bwd.jsonl");
    b << R"({"video_id":"v","boxes":{"0":[2,2,12,12],"1":[0,0,10,10]}})" "\n";
  }
  ASSERT_EQ(run("annotate average --forward fwd.jsonl --backward bwd.jsonl --out avg.jsonl"), 0);
  const std::string avg = slurp("avg.jsonl");
  EXPECT_NE(avg.find("[1.0,1.0,11.0,11.0]"), std::string::npos) << avg;

  ASSERT_EQ(run("--seed 2 synth --scenes 2 --min-frames 60 --max-frames 60 "
                "--detections det.jsonl --annotations ann.jsonl"), 0);
  ASSERT_EQ(run("--seed 1 annotate extend --annotations ann.jsonl --target-frames 60 "
                "--video-frames 60 --out ext.jsonl"), 0);
  std::istringstream in(slurp("ext.jsonl"));
  int lines = 0;
  for (std::string line; std::getline(in, line);) {
    const Json j = Json::parse(line);
    EXPECT_EQ(j["clip_span"][0], 0);
    EXPECT_EQ(j["clip_span"][1], 59);
    ++lines;
  }
  EXPECT_EQ(lines, 2);
}

}  // namespace
}  // namespace stgvt
