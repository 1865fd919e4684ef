#include "anemone/eval.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>

#include <json.hpp>

#include "anemone/errors.hpp"
#include "anemone/rng.hpp"
#include "text_io.hpp"

namespace anemone {
namespace {

std::pair<std::size_t, std::size_t> class_counts(std::span<const double> scores,
                                                 std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("scores and labels differ in length");
  }
  std::size_t pos = 0;
  for (int l : labels) pos += l != 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) {
    throw UndefinedMetricError("AUC is undefined: labels contain a single class");
  }
  return {pos, neg};
}

std::vector<std::size_t> order_by_score(std::span<const double> scores, bool descending) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  return order;
}

}  // namespace

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  const auto [n_pos, n_neg] = class_counts(scores, labels);
  const auto order = order_by_score(scores, false);

  // Twice the midrank of each tie group is first + last rank, an integer, so
  // the U statistic is accumulated exactly.
  std::int64_t rank_sum_x2 = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const auto twice_midrank = static_cast<std::int64_t>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) rank_sum_x2 += twice_midrank;
    }
    i = j;
  }
  const auto p = static_cast<std::int64_t>(n_pos);
  const std::int64_t u_x2 = rank_sum_x2 - p * (p + 1);
  return static_cast<double>(u_x2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

RocCurve roc_points(std::span<const double> scores, std::span<const int> labels) {
  const auto [n_pos, n_neg] = class_counts(scores, labels);
  const auto order = order_by_score(scores, true);
  RocCurve curve;
  curve.n_pos = n_pos;
  curve.n_neg = n_neg;
  curve.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0;
  double area_x2 = 0.0;  // in units of (1/n_neg) * (1/n_pos)
  for (std::size_t i = 0; i < order.size();) {
    const std::size_t tp_before = tp, fp_before = fp;
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] != 0 ? tp : fp) += 1;
      ++j;
    }
    area_x2 += static_cast<double>((fp - fp_before) * (tp + tp_before));
    curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                              static_cast<double>(tp) / static_cast<double>(n_pos));
    i = j;
  }
  curve.auc = area_x2 / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return curve;
}

void save_roc_csv(const std::filesystem::path& path, const RocCurve& curve) {
  auto out = detail::open_for_write(path);
  out << "fpr,tpr\n";
  std::string line;
  for (const auto& [fpr, tpr] : curve.points) {
    line.clear();
    detail::append_double(line, fpr);
    line.push_back(',');
    detail::append_double(line, tpr);
    line.push_back('\n');
    out << line;
  }
  detail::finish_write(out, path);
}

void save_roc_sidecar(const std::filesystem::path& path, const RocCurve& curve,
                      std::span<const double> run_aucs) {
  nlohmann::json j;
  j["auc"] = curve.auc;
  j["n_pos"] = curve.n_pos;
  j["n_neg"] = curve.n_neg;
  j["runs"] = std::vector<double>(run_aucs.begin(), run_aucs.end());
  auto out = detail::open_for_write(path);
  out << j.dump(2) << '\n';
  detail::finish_write(out, path);
}

KShotSplit kshot_split(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  std::vector<NodeId> anomalies;
  for (NodeId v = 0; v < labels.size(); ++v) {
    if (labels[v] != 0) anomalies.push_back(v);
  }
  if (k > anomalies.size()) {
    throw CapacityError("cannot label " + std::to_string(k) + " anomalies, only " +
                        std::to_string(anomalies.size()) + " exist");
  }
  auto rng = make_rng(seed, stream::kSplit);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, anomalies.size() - 1);
    std::swap(anomalies[i], anomalies[pick(rng)]);
  }
  KShotSplit split;
  split.k = k;
  split.seed = seed;
  split.labeled.assign(anomalies.begin(), anomalies.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(split.labeled.begin(), split.labeled.end());
  std::vector<bool> is_labeled(labels.size(), false);
  for (NodeId v : split.labeled) is_labeled[v] = true;
  for (NodeId v = 0; v < labels.size(); ++v) {
    if (!is_labeled[v]) split.unlabeled.push_back(v);
  }
  return split;
}

MultiRunResult multi_run(std::size_t runs, std::uint64_t base_seed,
                         const std::function<double(std::uint64_t, std::size_t)>& pipeline) {
  if (runs < 1) throw ArgumentError("runs must be at least 1");
  MultiRunResult result;
  double sum = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    result.per_run.push_back(pipeline(base_seed + r, r));
    sum += result.per_run.back();
  }
  result.mean = sum / static_cast<double>(runs);
  return result;
}

}  // namespace anemone
