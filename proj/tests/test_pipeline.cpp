#include <gtest/gtest.h>

#include <cstdio>
#include <random>
#include <string>

#include <json.hpp>

#include "anemone/checkpoint.hpp"
#include "anemone/errors.hpp"
#include "anemone/pipeline.hpp"
#include "synthetic.hpp"

namespace anemone {
namespace {

namespace fs = std::filesystem;

struct CommandResult {
  int status = -1;
  std::string output;
};

// Runs the command-line tool and captures stdout and stderr.
CommandResult anemone_cli(const std::string& args) {
  const std::string cmd = std::string(ANEMONE_CLI) + " " + args + " 2>&1";
  CommandResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

struct Dataset {
  fs::path dir, edges, features;
};

Dataset clean_dataset(const std::string& name) {
  testing::CommunitySpec cs;
  cs.nodes = 150;
  cs.dim = 30;
  const auto g = testing::community_graph(cs);
  Dataset d{testing::fresh_dir(name), {}, {}};
  d.edges = d.dir / "edges.txt";
  d.features = d.dir / "features.txt";
  save_graph(g, d.edges, d.features);
  return d;
}

PipelineConfig small_config(const Dataset& d, const std::string& out) {
  PipelineConfig cfg;
  cfg.edges = d.edges;
  cfg.features = d.features;
  cfg.out = d.dir / out;
  cfg.inject = InjectionSpec{2, 5, 10, 20, 0};
  cfg.train.epochs = 3;
  cfg.train.batch_size = 64;
  cfg.train.embed_dim = 8;
  cfg.rounds = 4;
  cfg.seed = 3;
  return cfg;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

TEST(Pipeline, StageSeedsDiffer) {
  EXPECT_NE(stage_seed(1, stream::kInject), stage_seed(1, stream::kTrain));
  EXPECT_NE(stage_seed(1, stream::kTrain), stage_seed(2, stream::kTrain));
  EXPECT_EQ(stage_seed(5, stream::kScore), stage_seed(5, stream::kScore));
}

TEST(Pipeline, InjectNothingKeepsGraph) {
  const auto d = clean_dataset("inject_nothing");
  auto cfg = small_config(d, "out");
  cfg.inject.num_cliques = 0;
  cfg.inject.num_contextual = 0;
  const auto o = run_inject(cfg);
  EXPECT_TRUE(o.result.anomaly_ids().empty());
  const auto before = load_graph(d.edges, d.features);
  const auto after = load_graph(o.paths.edges, o.paths.features);
  EXPECT_EQ(before.adjacency, after.adjacency);
  EXPECT_EQ(before.features, after.features);
  const auto manifest = nlohmann::json::parse(testing::read_text(o.paths.manifest));
  EXPECT_TRUE(manifest["anomaly_ids"].empty());
}

TEST(Pipeline, InjectManifestAndRerunAreIdentical) {
  const auto d = clean_dataset("inject_rerun");
  const auto cfg = small_config(d, "out");
  const auto a = run_inject(cfg);
  const auto edges = testing::read_text(a.paths.edges);
  const auto manifest_text = testing::read_text(a.paths.manifest);
  run_inject(cfg);
  EXPECT_EQ(testing::read_text(a.paths.edges), edges);
  EXPECT_EQ(testing::read_text(a.paths.manifest), manifest_text);
  const auto m = nlohmann::json::parse(manifest_text);
  EXPECT_EQ(m["anomaly_ids"].size(), 20u);
  EXPECT_EQ(m["num_cliques"], 2);
  EXPECT_EQ(m["config"]["seed"], 3);
  const auto g = load_graph(a.paths.edges, a.paths.features, a.paths.labels);
  std::size_t positives = 0;
  for (int l : *g.labels) positives += l;
  EXPECT_EQ(positives, 20u);
}

TEST(Pipeline, ZeroEpochCheckpointHoldsInitialParams) {
  const auto d = clean_dataset("train_zero");
  auto cfg = small_config(d, "out");
  cfg.train.epochs = 0;
  const auto o = run_train(cfg);
  const auto ck = load_checkpoint(o.paths.checkpoint);
  auto rng = make_rng(stage_seed(cfg.seed, stream::kTrain), stream::kInit);
  EXPECT_EQ(ck.params, ModelParams::glorot(30, 8, rng));
}

TEST(Pipeline, FewShotTrainingIsDeterministicAndScoresSkipLabeled) {
  const auto d = clean_dataset("few_shot");
  auto cfg = small_config(d, "out");
  const auto inj = run_inject(cfg);
  cfg.edges = inj.paths.edges;
  cfg.features = inj.paths.features;
  cfg.labels = inj.paths.labels;
  cfg.few_shot = 3;
  const auto a = run_train(cfg);
  const auto first = testing::read_text(a.paths.checkpoint);
  run_train(cfg);
  EXPECT_EQ(testing::read_text(a.paths.checkpoint), first);
  const auto report = run_score(cfg);
  EXPECT_EQ(report.nodes.size(), 147u);
  for (const auto& n : report.nodes) {
    for (NodeId v : a.checkpoint.labeled_ids) EXPECT_NE(n.node, v);
  }
}

TEST(Pipeline, RunIsDeterministic) {
  const auto d = clean_dataset("run_determinism");
  const auto cfg = small_config(d, "out");
  const auto s1 = run_pipeline(cfg);
  const auto paths = ArtifactPaths::under(cfg.out, 0);
  const auto scores = testing::read_text(paths.scores);
  const auto summary = testing::read_text(paths.summary);
  const auto s2 = run_pipeline(cfg);
  EXPECT_EQ(s1.aucs.per_run, s2.aucs.per_run);
  EXPECT_EQ(testing::read_text(paths.scores), scores);
  EXPECT_EQ(testing::read_text(paths.summary), summary);
  EXPECT_GE(s1.aucs.mean, 0.0);
  EXPECT_LE(s1.aucs.mean, 1.0);
}

TEST(Pipeline, ShuffledLabelsAverageOneHalf) {
  const auto dir = testing::fresh_dir("shuffled");
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise;
  std::string csv = "node_id,y,y_patch,y_context,mean_b_p,std_b_p,mean_b_c,std_b_c\n";
  std::vector<int> labels(200, 0);
  for (int i = 0; i < 200; ++i) {
    const double y = noise(rng);
    csv += std::to_string(i) + "," + std::to_string(y) + ",0,0,0,0,0,0\n";
    if (i < 20) labels[i] = 1;
  }
  testing::write_text(dir / "scores.csv", csv);
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::shuffle(labels.begin(), labels.end(), rng);
    std::string text;
    for (int l : labels) text += std::to_string(l) + "\n";
    testing::write_text(dir / "labels.txt", text);
    PipelineConfig cfg;
    cfg.labels = dir / "labels.txt";
    cfg.scores = dir / "scores.csv";
    cfg.out = dir / "out";
    sum += run_eval(cfg).auc;
  }
  EXPECT_NEAR(sum / 30.0, 0.5, 0.05);
}

TEST(Cli, EndToEndSubcommands) {
  const auto d = clean_dataset("cli_end_to_end");
  const auto out = d.dir / "out";
  const auto inject = anemone_cli("inject --edges " + q(d.edges) + " --features " +
                                  q(d.features) + " --out " + q(out) +
                                  " --cliques 1 --clique-size 5 --contextual 5 --candidates 10");
  ASSERT_EQ(inject.status, 0) << inject.output;
  EXPECT_NE(inject.output.find("anomalies: 10"), std::string::npos);

  const auto paths = ArtifactPaths::under(out, 0);
  const std::string graph = " --edges " + q(paths.edges) + " --features " + q(paths.features) +
                            " --out " + q(out);
  const auto train = anemone_cli("train" + graph + " --epochs 2 --dim 8 --batch-size 50");
  ASSERT_EQ(train.status, 0) << train.output;

  const auto score = anemone_cli("score" + graph + " --rounds 1");
  ASSERT_EQ(score.status, 0) << score.output;
  for (const auto& n : read_scores_csv(paths.scores)) {
    EXPECT_EQ(n.std_b_p, 0.0);
    EXPECT_EQ(n.std_b_c, 0.0);
  }
  const auto again = testing::read_text(paths.scores);
  ASSERT_EQ(anemone_cli("score" + graph + " --rounds 1").status, 0);
  EXPECT_EQ(testing::read_text(paths.scores), again);

  const auto eval = anemone_cli("eval --labels " + q(paths.labels) + " --out " + q(out));
  ASSERT_EQ(eval.status, 0) << eval.output;
  const double auc = std::stod(eval.output);
  EXPECT_GE(auc, 0.0);
  EXPECT_LE(auc, 1.0);
  EXPECT_TRUE(fs::exists(paths.roc_csv));
  EXPECT_TRUE(fs::exists(paths.roc_json));
}

TEST(Cli, EvalOnPerfectFixtureAndSingleClass) {
  const auto dir = testing::fresh_dir("cli_eval");
  testing::write_text(dir / "scores.csv",
                      "node_id,y,y_patch,y_context,mean_b_p,std_b_p,mean_b_c,std_b_c\n"
                      "0,0.9,0,0,0,0,0,0\n1,0.1,0,0,0,0,0,0\n2,0.8,0,0,0,0,0,0\n");
  testing::write_text(dir / "labels.txt", "1\n0\n1\n");
  testing::write_text(dir / "ones.txt", "1\n1\n1\n");
  const auto ok = anemone_cli("eval --scores " + q(dir / "scores.csv") + " --labels " +
                              q(dir / "labels.txt") + " --out " + q(dir / "out"));
  EXPECT_EQ(ok.status, 0) << ok.output;
  EXPECT_EQ(ok.output, "1.000000\n");
  const auto bad = anemone_cli("eval --scores " + q(dir / "scores.csv") + " --labels " +
                               q(dir / "ones.txt") + " --out " + q(dir / "out"));
  EXPECT_NE(bad.status, 0);
  EXPECT_NE(bad.output.find("undefined"), std::string::npos);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto d = clean_dataset("cli_config");
  testing::write_text(d.dir / "run.ini",
                      "seed = 4\n[paths]\nedges = edges.txt\nfeatures = features.txt\n"
                      "out = out\n[inject]\ncliques = 1\nclique_size = 3\ncontextual = 0\n");
  const auto r = anemone_cli("inject --config " + q(d.dir / "run.ini") + " --clique-size 6");
  ASSERT_EQ(r.status, 0) << r.output;
  const auto m = nlohmann::json::parse(
      testing::read_text(ArtifactPaths::under(d.dir / "out", 0).manifest));
  EXPECT_EQ(m["clique_size"], 6);
  EXPECT_EQ(m["seed"], 4);
  EXPECT_EQ(m["anomaly_ids"].size(), 6u);
}

TEST(Cli, RunPrintsPerRunAndMean) {
  const auto d = clean_dataset("cli_run");
  const auto r = anemone_cli("run --edges " + q(d.edges) + " --features " + q(d.features) +
                             " --out " + q(d.dir / "out") +
                             " --cliques 1 --clique-size 5 --contextual 5 --candidates 10"
                             " --epochs 0 --dim 4 --rounds 2 --runs 2");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("run 1 auc"), std::string::npos);
  EXPECT_NE(r.output.find("mean auc"), std::string::npos);
  EXPECT_TRUE(fs::exists(d.dir / "out" / "summary.json"));
}

TEST(Cli, ErrorsGiveNonZeroExit) {
  EXPECT_NE(anemone_cli("").status, 0);
  EXPECT_NE(anemone_cli("train --edges /nonexistent/e --features /nonexistent/f").status, 0);
  EXPECT_NE(anemone_cli("train --epochs lots").status, 0);
}

TEST(Convert, LinqsExport) {
  const auto dir = testing::fresh_dir("convert");
  testing::write_text(dir / "toy.content",
                      "31336 0 1 0 Neural_Networks\n"
                      "1061127 1 0 0 Rule_Learning\n"
                      "1106406 0 0 1 Neural_Networks\n");
  testing::write_text(dir / "toy.cites", "31336 1061127\n1061127 31336\n1106406 1106406\n");
  const auto s = convert_linqs(dir / "toy.content", dir / "toy.cites", dir / "out");
  EXPECT_EQ(s.nodes, 3u);
  EXPECT_EQ(s.features, 3u);
  EXPECT_EQ(s.edges, 1u);
  EXPECT_EQ(s.self_loops_dropped, 1u);
  const auto g = load_graph(dir / "out" / "edges.txt", dir / "out" / "features.txt");
  EXPECT_TRUE(g.adjacency.has_edge(0, 1));
  EXPECT_DOUBLE_EQ(g.features(2, 2), 1.0);
}

}  // namespace
}  // namespace anemone
