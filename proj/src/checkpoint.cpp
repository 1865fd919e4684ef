#include "anemone/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include "anemone/errors.hpp"
#include "anemone/rng.hpp"
#include "text_io.hpp"

namespace anemone {
namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
    throw json::other_error::create(501, "matrix shape does not match data length", &j);
  }
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json params_to_json(const ParamSet& p) {
  return {{"theta", matrix_to_json(p.theta)},
          {"phi", matrix_to_json(p.phi)},
          {"w_p", matrix_to_json(p.w_p)},
          {"w_c", matrix_to_json(p.w_c)}};
}

void params_from_json(const json& j, ParamSet& p) {
  p.theta = matrix_from_json(j.at("theta"));
  p.phi = matrix_from_json(j.at("phi"));
  p.w_p = matrix_from_json(j.at("w_p"));
  p.w_c = matrix_from_json(j.at("w_c"));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::uint64_t Checkpoint::config_hash() const { return fnv1a64(config.dump()); }

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json j;
  j["magic"] = kCheckpointMagic;
  j["version"] = kCheckpointVersion;
  j["config_hash"] = hex64(ckpt.config_hash());
  j["config"] = ckpt.config;
  j["labeled_ids"] = ckpt.labeled_ids;
  j["params"] = params_to_json(ckpt.params);
  j["adam"] = {{"step_count", ckpt.adam.step_count},
               {"learning_rate", ckpt.adam.learning_rate},
               {"beta1", ckpt.adam.beta1},
               {"beta2", ckpt.adam.beta2},
               {"epsilon", ckpt.adam.epsilon},
               {"first_moment", params_to_json(ckpt.adam.first_moment)},
               {"second_moment", params_to_json(ckpt.adam.second_moment)}};
  auto out = detail::open_for_write(path);
  out << j.dump() << '\n';
  detail::finish_write(out, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Checkpoint ckpt;
  try {
    const json j = json::parse(in);
    if (j.at("magic").get<std::string>() != kCheckpointMagic) {
      throw ParseError(path.string(), 1, "not an anemone checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw ParseError(path.string(), 1, "unsupported checkpoint version");
    }
    ckpt.config = j.at("config");
    ckpt.labeled_ids = j.at("labeled_ids").get<std::vector<NodeId>>();
    params_from_json(j.at("params"), ckpt.params);
    const auto& a = j.at("adam");
    ckpt.adam.step_count = a.at("step_count").get<std::uint64_t>();
    ckpt.adam.learning_rate = a.at("learning_rate").get<double>();
    ckpt.adam.beta1 = a.at("beta1").get<double>();
    ckpt.adam.beta2 = a.at("beta2").get<double>();
    ckpt.adam.epsilon = a.at("epsilon").get<double>();
    params_from_json(a.at("first_moment"), ckpt.adam.first_moment);
    params_from_json(a.at("second_moment"), ckpt.adam.second_moment);
    if (j.at("config_hash").get<std::string>() != hex64(ckpt.config_hash())) {
      throw ParseError(path.string(), 1, "config hash mismatch");
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 1, e.what());
  }
  if (!ckpt.params.same_shape(ckpt.adam.first_moment) ||
      !ckpt.params.same_shape(ckpt.adam.second_moment)) {
    throw ParseError(path.string(), 1, "parameter and moment shapes differ");
  }
  return ckpt;
}

}  // namespace anemone
