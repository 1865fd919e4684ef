#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "anemone/types.hpp"

namespace anemone {

// Mann-Whitney AUC: P(anomaly outranks normal) + 0.5 * P(tie), computed from
// midranks in O(n log n). Throws UndefinedMetricError when either class is
// empty.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr)
  double auc = 0.0;                               // trapezoidal area
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

// Threshold sweep over the distinct scores in descending order, from (0,0)
// to (1,1).
RocCurve roc_points(std::span<const double> scores, std::span<const int> labels);

void save_roc_csv(const std::filesystem::path& path, const RocCurve& curve);
// {auc, n_pos, n_neg, runs: [...]}
void save_roc_sidecar(const std::filesystem::path& path, const RocCurve& curve,
                      std::span<const double> run_aucs);

struct KShotSplit {
  std::vector<NodeId> labeled;    // ascending
  std::vector<NodeId> unlabeled;  // ascending, all other nodes
  std::size_t k = 0;
  std::uint64_t seed = 0;
};

// Uniformly picks k true anomalies as the labeled set. Throws CapacityError
// when k exceeds the number of anomalies.
KShotSplit kshot_split(std::span<const int> labels, std::size_t k, std::uint64_t seed);

struct MultiRunResult {
  std::vector<double> per_run;
  double mean = 0.0;
};

// Runs pipeline(seed + r, r) for r in [0, runs) and averages the AUCs.
MultiRunResult multi_run(std::size_t runs, std::uint64_t base_seed,
                         const std::function<double(std::uint64_t seed, std::size_t run)>& pipeline);

}  // namespace anemone
