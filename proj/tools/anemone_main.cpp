// anemone: inject -> train -> score -> eval driver, plus `run` for the whole
// chain and `convert` for LINQS style dataset exports.

#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "anemone/config.hpp"
#include "anemone/errors.hpp"
#include "anemone/pipeline.hpp"

namespace {

using anemone::PipelineConfig;

// Flag storage shared by every subcommand. Only flags given on the command
// line are applied, on top of the --config file.
struct Flags {
  std::string config, edges, features, labels, out, checkpoint, scores, feature_norm;
  std::uint64_t seed = 0;
  double alpha = 0.0, lr = 0.0, restart_prob = 0.0;
  std::size_t rounds = 0, subgraph_size = 0, dim = 0, epochs = 0, batch_size = 0;
  std::size_t few_shot = 0, runs = 0, run_index = 0;
  std::size_t cliques = 0, clique_size = 0, contextual = 0, candidates = 0;
};

class Command {
 public:
  Command(CLI::App& parent, const std::string& name, const std::string& about, Flags& f)
      : app_(parent.add_subcommand(name, about)), f_(f) {
    app_->add_option("--config", f_.config, "key = value config file")->check(CLI::ExistingFile);
  }

  CLI::App* app() const { return app_; }

  template <typename T>
  Command& flag(const std::string& names, T& var, const std::string& help,
                std::function<void(PipelineConfig&)> apply) {
    appliers_.emplace_back(app_->add_option(names, var, help), std::move(apply));
    return *this;
  }

  PipelineConfig build() const {
    PipelineConfig cfg =
        f_.config.empty() ? PipelineConfig{} : anemone::load_config_file(f_.config);
    for (const auto& [opt, apply] : appliers_) {
      if (opt->count() > 0) apply(cfg);
    }
    return cfg;
  }

  // Graph inputs and output directory.
  Command& io(bool labels) {
    flag("--edges", f_.edges, "edge list", [this](auto& c) { c.edges = f_.edges; });
    flag("--features", f_.features, "feature matrix",
         [this](auto& c) { c.features = f_.features; });
    if (labels) {
      flag("--labels", f_.labels, "0/1 anomaly labels", [this](auto& c) { c.labels = f_.labels; });
    }
    return out();
  }
  Command& out() {
    return flag("--out", f_.out, "output directory", [this](auto& c) { c.out = f_.out; })
        .flag("--run-index", f_.run_index, "run index used in artifact names",
              [this](auto& c) { c.run_index = f_.run_index; });
  }
  Command& seed() {
    return flag("--seed", f_.seed, "master seed", [this](auto& c) { c.seed = f_.seed; });
  }
  Command& injection() {
    return flag("--cliques", f_.cliques, "number of injected cliques",
                [this](auto& c) { c.inject.num_cliques = f_.cliques; })
        .flag("--clique-size", f_.clique_size, "nodes per clique",
              [this](auto& c) { c.inject.clique_size = f_.clique_size; })
        .flag("--contextual", f_.contextual, "number of contextual anomalies",
              [this](auto& c) { c.inject.num_contextual = f_.contextual; })
        .flag("--candidates", f_.candidates, "candidate pool per contextual anomaly",
              [this](auto& c) { c.inject.num_candidates = f_.candidates; });
  }
  Command& training() {
    return flag("--alpha", f_.alpha, "context weight in loss and score",
                [this](auto& c) { c.train.alpha = f_.alpha; })
        .flag("--subgraph-size,--k", f_.subgraph_size, "nodes per sampled subgraph",
              [this](auto& c) { c.train.subgraph_size = f_.subgraph_size; })
        .flag("--dim", f_.dim, "embedding dimension",
              [this](auto& c) { c.train.embed_dim = f_.dim; })
        .flag("--epochs", f_.epochs, "training epochs",
              [this](auto& c) { c.train.epochs = f_.epochs; })
        .flag("--batch-size", f_.batch_size, "nodes per mini-batch",
              [this](auto& c) { c.train.batch_size = f_.batch_size; })
        .flag("--lr", f_.lr, "Adam learning rate",
              [this](auto& c) { c.train.learning_rate = f_.lr; })
        .flag("--restart-prob", f_.restart_prob, "random walk restart probability",
              [this](auto& c) { c.train.restart_prob = f_.restart_prob; })
        .flag("--few-shot", f_.few_shot, "number of labeled anomalies (0 = unsupervised)",
              [this](auto& c) { c.few_shot = f_.few_shot; })
        .flag("--feature-norm", f_.feature_norm, "row | none",
              [this](auto& c) { c.feature_norm = anemone::parse_feature_norm(f_.feature_norm); });
  }
  Command& rounds() {
    return flag("--rounds", f_.rounds, "scoring rounds",
                [this](auto& c) { c.rounds = f_.rounds; });
  }

 private:
  CLI::App* app_;
  Flags& f_;
  std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> appliers_;
};

void print_inject(const anemone::InjectOutcome& o) {
  const auto& r = o.result;
  std::printf("anomalies: %zu (structural %zu, contextual %zu)\n", r.anomaly_ids().size(),
              r.structural.size(), r.contextual.size());
  std::printf("manifest: %s\n", o.paths.manifest.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ANEMONE graph anomaly detection"};
  app.require_subcommand(1);
  Flags f;

  Command inject(app, "inject", "inject structural and contextual anomalies", f);
  inject.io(true).seed().injection();

  Command train(app, "train", "train the contrastive detector", f);
  train.io(true).seed().training();

  Command score(app, "score", "score nodes with a trained checkpoint", f);
  score.io(false).seed().rounds();
  score.flag("--alpha", f.alpha, "context weight (default: the trained value)",
             [&f](auto& c) { c.score_alpha = f.alpha; })
      .flag("--checkpoint", f.checkpoint, "checkpoint file",
            [&f](auto& c) { c.checkpoint = f.checkpoint; })
      .flag("--scores", f.scores, "output score CSV", [&f](auto& c) { c.scores = f.scores; });

  Command eval(app, "eval", "AUC of a score CSV against labels", f);
  eval.out();
  eval.flag("--labels", f.labels, "0/1 anomaly labels", [&f](auto& c) { c.labels = f.labels; })
      .flag("--scores", f.scores, "score CSV", [&f](auto& c) { c.scores = f.scores; });

  Command run(app, "run", "inject, train, score and evaluate over several runs", f);
  run.io(true).seed().injection().training().rounds();
  run.flag("--runs", f.runs, "number of runs", [&f](auto& c) { c.runs = f.runs; });

  std::string content, cites, convert_out;
  auto* convert = app.add_subcommand("convert", "convert a .content/.cites dataset export");
  convert->add_option("--content", content, "node rows: id features... class")
      ->required()
      ->check(CLI::ExistingFile);
  convert->add_option("--cites", cites, "edge rows: id id")->required()->check(CLI::ExistingFile);
  convert->add_option("--out", convert_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*inject.app()) {
      print_inject(anemone::run_inject(inject.build()));
    } else if (*train.app()) {
      const auto o = anemone::run_train(train.build());
      const auto& losses = o.result.epoch_mean_loss;
      if (!losses.empty()) std::printf("final epoch mean loss: %.6f\n", losses.back());
      std::printf("checkpoint: %s\n", o.paths.checkpoint.string().c_str());
    } else if (*score.app()) {
      const auto r = anemone::run_score(score.build());
      std::printf("scored %zu nodes over %zu rounds\n", r.nodes.size(), r.rounds);
    } else if (*eval.app()) {
      std::printf("%.6f\n", anemone::run_eval(eval.build()).auc);
    } else if (*run.app()) {
      const auto s = anemone::run_pipeline(run.build());
      for (std::size_t r = 0; r < s.aucs.per_run.size(); ++r) {
        std::printf("run %zu auc %.6f\n", r, s.aucs.per_run[r]);
      }
      std::printf("mean auc %.6f\n", s.aucs.mean);
    } else if (*convert) {
      const auto s = anemone::convert_linqs(content, cites, convert_out);
      std::printf("nodes %zu features %zu edges %zu self-loops dropped %zu\n", s.nodes,
                  s.features, s.edges, s.self_loops_dropped);
    }
  } catch (const anemone::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
