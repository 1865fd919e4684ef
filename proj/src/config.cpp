#include "anemone/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "anemone/errors.hpp"
#include "text_io.hpp"

namespace anemone {
namespace {

namespace pt = boost::property_tree;

// Drops a trailing '#' or ';' comment that sits outside quotes. The ini
// reader only understands whole-line comments.
std::string strip_inline_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote != 0) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if ((c == '#' || c == ';') && i > 0) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// 1-based line of every "section/key" (or top-level "key") for messages; the
// ini reader does not keep positions.
std::map<std::string, std::size_t> key_lines(const std::string& text) {
  std::map<std::string, std::size_t> out;
  std::istringstream in(text);
  std::string section;
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    const auto t = trim(line);
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
    } else if (const auto eq = t.find('='); eq != std::string::npos) {
      const auto key = trim(t.substr(0, eq));
      out.emplace(section.empty() ? key : section + "/" + key, n);
    }
  }
  return out;
}

bool is_section(const std::string& name) {
  return name == "paths" || name == "inject" || name == "train" || name == "score";
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::filesystem::path base_dir, std::string source,
         std::map<std::string, std::size_t> lines)
      : tree_(tree),
        base_dir_(std::move(base_dir)),
        source_(std::move(source)),
        lines_(std::move(lines)) {}

  std::size_t line_of(const std::string& key) const {
    const auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ParseError(source_, line_of(key), what);
  }

  std::optional<std::string> get(const std::string& key) {
    seen_.insert(key);
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '/'));
    if (!v) return std::nullopt;
    return unquote(*v);
  }

  void count(const std::string& key, std::size_t& dst) {
    if (auto v = get(key)) dst = static_cast<std::size_t>(number<std::uint64_t>(key, *v));
  }
  void seed(const std::string& key, std::uint64_t& dst) {
    if (auto v = get(key)) dst = number<std::uint64_t>(key, *v);
  }
  void real(const std::string& key, double& dst) {
    if (auto v = get(key)) dst = number<double>(key, *v);
  }
  void real(const std::string& key, std::optional<double>& dst) {
    if (auto v = get(key)) dst = number<double>(key, *v);
  }
  void path(const std::string& key, std::filesystem::path& dst) {
    if (auto v = get(key)) dst = resolve(*v);
  }
  void path(const std::string& key, std::optional<std::filesystem::path>& dst) {
    if (auto v = get(key)) dst = resolve(*v);
  }

  // Every key in the tree must have been asked for.
  void reject_unknown() const {
    for (const auto& [name, node] : tree_) {
      if (node.empty()) {
        if (is_section(name)) continue;
        if (!seen_.count(name)) {
          fail(name, "unknown key '" + name + "'");
        }
        continue;
      }
      for (const auto& [key, leaf] : node) {
        (void)leaf;
        const auto full = name + "/" + key;
        if (!seen_.count(full)) {
          fail(full, "unknown key '" + key + "' in [" + name + "]");
        }
      }
    }
  }

 private:
  template <typename T>
  T number(const std::string& key, const std::string& text) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        return detail::parse_double(text, "config", 0);
      } else {
        return detail::parse_uint(text, "config", 0);
      }
    } catch (const ParseError&) {
      fail(key, "bad value '" + text + "' for key '" + key + "'");
    }
  }

  std::filesystem::path resolve(const std::string& v) const {
    std::filesystem::path p(v);
    if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
    return p;
  }

  const pt::ptree& tree_;
  std::filesystem::path base_dir_;
  std::string source_;
  std::map<std::string, std::size_t> lines_;
  std::set<std::string> seen_;
};

PipelineConfig parse_impl(const std::string& text, PipelineConfig base,
                          const std::filesystem::path& base_dir, const std::string& source);

}  // namespace

FeatureNorm parse_feature_norm(const std::string& s) {
  if (s == "row") return FeatureNorm::kRow;
  if (s == "none") return FeatureNorm::kNone;
  throw ArgumentError("feature_norm must be 'row' or 'none', got '" + s + "'");
}

std::string to_string(FeatureNorm norm) { return norm == FeatureNorm::kRow ? "row" : "none"; }

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["runs"] = runs;
  j["run_index"] = run_index;
  j["paths"] = {{"edges", edges.string()},
                {"features", features.string()},
                {"labels", labels ? labels->string() : std::string()},
                {"out", out.string()}};
  j["inject"] = {{"cliques", inject.num_cliques},
                 {"clique_size", inject.clique_size},
                 {"contextual", inject.num_contextual},
                 {"candidates", inject.num_candidates}};
  j["train"] = {{"epochs", train.epochs},
                {"batch_size", train.batch_size},
                {"subgraph_size", train.subgraph_size},
                {"dim", train.embed_dim},
                {"lr", train.learning_rate},
                {"alpha", train.alpha},
                {"restart_prob", train.restart_prob},
                {"few_shot", few_shot},
                {"feature_norm", to_string(feature_norm)}};
  j["score"] = {{"rounds", rounds}, {"alpha", scorer_alpha()}};
  return j;
}

PipelineConfig parse_config(const std::string& text, PipelineConfig base,
                            const std::filesystem::path& base_dir) {
  return parse_impl(text, std::move(base), base_dir, "config");
}

namespace {

PipelineConfig parse_impl(const std::string& text, PipelineConfig base,
                          const std::filesystem::path& base_dir, const std::string& source) {
  std::istringstream in(text);
  std::ostringstream cleaned;
  for (std::string line; std::getline(in, line);) cleaned << strip_inline_comment(line) << '\n';

  pt::ptree tree;
  std::istringstream cleaned_in(cleaned.str());
  try {
    pt::ini_parser::read_ini(cleaned_in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(source, e.line(), e.message());
  }

  Reader r(tree, base_dir, source, key_lines(cleaned.str()));
  auto& c = base;
  r.seed("seed", c.seed);
  r.count("runs", c.runs);

  r.path("paths/edges", c.edges);
  r.path("paths/features", c.features);
  r.path("paths/labels", c.labels);
  r.path("paths/out", c.out);

  r.count("inject/cliques", c.inject.num_cliques);
  r.count("inject/clique_size", c.inject.clique_size);
  r.count("inject/contextual", c.inject.num_contextual);
  r.count("inject/candidates", c.inject.num_candidates);

  r.count("train/epochs", c.train.epochs);
  r.count("train/batch_size", c.train.batch_size);
  r.count("train/subgraph_size", c.train.subgraph_size);
  r.count("train/dim", c.train.embed_dim);
  r.real("train/lr", c.train.learning_rate);
  r.real("train/alpha", c.train.alpha);
  r.real("train/restart_prob", c.train.restart_prob);
  r.count("train/few_shot", c.few_shot);
  if (auto v = r.get("train/feature_norm")) {
    try {
      c.feature_norm = parse_feature_norm(*v);
    } catch (const ArgumentError& e) {
      r.fail("train/feature_norm", e.what());
    }
  }

  r.count("score/rounds", c.rounds);
  r.real("score/alpha", c.score_alpha);

  r.reject_unknown();
  return c;
}

}  // namespace

PipelineConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_impl(text.str(), {}, path.parent_path(), path.string());
}

}  // namespace anemone
