#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiercoll/io_model.hpp"
#include "hiercoll/models.hpp"
#include "hiercoll/simulator.hpp"
#include "hiercoll/topology.hpp"
#include "hiercoll/training.hpp"

#include <nlohmann/json.hpp>

namespace hiercoll {

/// Raised for malformed experiment configs; the message always names the
/// offending field or file.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Algorithm { tree_allreduce, ring_allreduce };

inline Algorithm algorithm_from_string(const std::string& name) {
  if (name == "tree_allreduce") return Algorithm::tree_allreduce;
  if (name == "ring_allreduce") return Algorithm::ring_allreduce;
  throw ConfigError("config field 'algorithm': unknown value '" + name +
                    "' (expected tree_allreduce or ring_allreduce)");
}

struct TrainBlock {
  int steps = 10;
  int dim = 8;
  int sub_batch = 16;
  double learning_rate = 0.01;
  int local_groups = 4;
  double local_gamma = 0;
};

struct IoBlock {
  std::int64_t read_bytes = 0;
  StripeLayout layout;
  std::int64_t procs = 1;
  bool aligned = false;
};

struct FitTargetSpec {
  std::string model;
  int nodes = 1;
  int sub_batch = 1;
  double observed = 0;
  bool is_speedup = false;
};

struct FitBlock {
  std::vector<FitTargetSpec> targets;
  double beta2_ratio = 4.0;
  int supernode_capacity = 256;
};

/// Everything one batch experiment needs; populated from a JSON file.
/// Blocks used only by some subcommands may be absent.
struct ExperimentConfig {
  TopologySpec topology;
  std::vector<MappingKind> mappings{MappingKind::contiguous}; // "both" expands to two runs
  Algorithm algorithm = Algorithm::tree_allreduce;
  std::optional<std::uint64_t> payload_bytes;
  std::optional<ModelDescriptor> model;
  std::size_t elem_bytes = 4;
  SimMode sim_mode = SimMode::fixed_beta;
  std::vector<int> p_sweep;
  std::vector<int> b_sweep;
  std::optional<TrainBlock> train;
  std::optional<IoBlock> io;
  std::optional<FitBlock> fit;
  std::string output_basename = "report";
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key,
                                           const std::string& path) {
  if (!j.contains(key)) throw ConfigError("config: missing field '" + path + "'");
  return j.at(key);
}

inline double number_field(const nlohmann::json& j, const std::string& key,
                           const std::string& path, std::optional<double> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("config: missing field '" + path + "'");
  }
  if (!j.at(key).is_number())
    throw ConfigError("config field '" + path + "': expected a number");
  return j.at(key).get<double>();
}

inline std::int64_t integer_field(const nlohmann::json& j, const std::string& key,
                                  const std::string& path,
                                  std::optional<std::int64_t> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("config: missing field '" + path + "'");
  }
  if (!j.at(key).is_number_integer())
    throw ConfigError("config field '" + path + "': expected an integer");
  return j.at(key).get<std::int64_t>();
}

inline std::string string_field(const nlohmann::json& j, const std::string& key,
                                const std::string& path,
                                std::optional<std::string> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("config: missing field '" + path + "'");
  }
  if (!j.at(key).is_string())
    throw ConfigError("config field '" + path + "': expected a string");
  return j.at(key).get<std::string>();
}

inline std::vector<int> int_array_field(const nlohmann::json& j, const std::string& key,
                                        const std::string& path) {
  if (!j.contains(key)) return {};
  if (!j.at(key).is_array())
    throw ConfigError("config field '" + path + "': expected an array of integers");
  std::vector<int> values;
  for (const auto& v : j.at(key)) {
    if (!v.is_number_integer())
      throw ConfigError("config field '" + path + "': expected an array of integers");
    values.push_back(v.get<int>());
  }
  if (values.empty()) throw ConfigError("config field '" + path + "': sweep must be non-empty");
  return values;
}

inline MappingKind mapping_from_string(const std::string& name, const std::string& path) {
  if (name == "contiguous") return MappingKind::contiguous;
  if (name == "round_robin") return MappingKind::round_robin;
  throw ConfigError("config field '" + path + "': unknown mapping kind '" + name +
                    "' (expected contiguous, round_robin or both)");
}

} // namespace detail

/// Parses and validates an experiment config, resolving model names against
/// the built-in registry or an adjacent descriptor file. Errors carry the
/// offending field path.
inline ExperimentConfig parse_config_json(const nlohmann::json& root) {
  using namespace detail;
  if (!root.is_object()) throw ConfigError("config: top level must be a JSON object");

  ExperimentConfig config;

  const nlohmann::json& topo = require_field(root, "topology", "topology");
  if (!topo.is_object()) throw ConfigError("config field 'topology': expected an object");
  const int p = static_cast<int>(integer_field(topo, "p", "topology.p"));
  const int q = static_cast<int>(integer_field(topo, "q", "topology.q"));
  const double alpha = number_field(topo, "alpha", "topology.alpha", 1e-5);
  const double beta1 = number_field(topo, "beta1", "topology.beta1", 1.0 / 12e9);
  const double beta2 = number_field(topo, "beta2", "topology.beta2", 4.0 * beta1);
  const double gamma = number_field(topo, "gamma", "topology.gamma", 0.0);
  const double oversub = number_field(topo, "oversub_factor", "topology.oversub_factor", 0.25);
  const bool allow_beta2 = topo.value("allow_beta2_below_beta1", false);
  try {
    config.topology = build_topology(p, q, alpha, beta1, beta2, gamma, oversub, allow_beta2);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  const std::string mapping = string_field(root, "mapping", "mapping", std::string("contiguous"));
  if (mapping == "both")
    config.mappings = {MappingKind::contiguous, MappingKind::round_robin};
  else
    config.mappings = {mapping_from_string(mapping, "mapping")};

  if (root.contains("algorithm"))
    config.algorithm = algorithm_from_string(string_field(root, "algorithm", "algorithm"));

  if (root.contains("payload_bytes")) {
    const std::int64_t n = integer_field(root, "payload_bytes", "payload_bytes");
    if (n < 0) throw ConfigError("config field 'payload_bytes': must be >= 0");
    config.payload_bytes = static_cast<std::uint64_t>(n);
  }
  if (root.contains("model")) {
    const std::string name = string_field(root, "model", "model");
    try {
      config.model = builtin_model(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config field 'model': ") + e.what());
    }
  }
  if (root.contains("model_file")) {
    const std::string path = string_field(root, "model_file", "model_file");
    std::ifstream in(path);
    if (!in) throw ConfigError("config field 'model_file': cannot open '" + path + "'");
    nlohmann::json mj;
    try {
      in >> mj;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config field 'model_file': invalid JSON in '" + path + "': " + e.what());
    }
    try {
      config.model = model_from_json(mj);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config field 'model_file': " + std::string(e.what()));
    }
  }

  const std::int64_t elem_bytes = integer_field(root, "elem_bytes", "elem_bytes", 4);
  if (elem_bytes < 1) throw ConfigError("config field 'elem_bytes': must be >= 1");
  config.elem_bytes = static_cast<std::size_t>(elem_bytes);

  if (root.contains("sim_mode")) {
    try {
      config.sim_mode = sim_mode_from_string(string_field(root, "sim_mode", "sim_mode"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config field 'sim_mode': ") + e.what());
    }
  }

  config.p_sweep = int_array_field(root, "p_sweep", "p_sweep");
  config.b_sweep = int_array_field(root, "b_sweep", "b_sweep");

  if (root.contains("train")) {
    const nlohmann::json& t = root.at("train");
    if (!t.is_object()) throw ConfigError("config field 'train': expected an object");
    TrainBlock train;
    train.steps = static_cast<int>(integer_field(t, "steps", "train.steps", 10));
    train.dim = static_cast<int>(integer_field(t, "dim", "train.dim", 8));
    train.sub_batch = static_cast<int>(integer_field(t, "sub_batch", "train.sub_batch", 16));
    train.learning_rate = number_field(t, "learning_rate", "train.learning_rate", 0.01);
    train.local_groups = static_cast<int>(integer_field(t, "local_groups", "train.local_groups", 4));
    train.local_gamma = number_field(t, "local_gamma", "train.local_gamma", 0.0);
    if (train.steps < 1) throw ConfigError("config field 'train.steps': must be >= 1");
    if (train.dim < 1) throw ConfigError("config field 'train.dim': must be >= 1");
    config.train = train;
  }

  if (root.contains("io")) {
    const nlohmann::json& io = root.at("io");
    if (!io.is_object()) throw ConfigError("config field 'io': expected an object");
    IoBlock block;
    block.read_bytes = integer_field(io, "read_bytes", "io.read_bytes");
    block.layout.stripe_size = integer_field(io, "stripe_size", "io.stripe_size");
    block.layout.array_count = static_cast<int>(integer_field(io, "array_count", "io.array_count"));
    block.procs = integer_field(io, "procs", "io.procs", 1);
    block.aligned = io.value("aligned", false);
    if (block.read_bytes < 0) throw ConfigError("config field 'io.read_bytes': must be >= 0");
    if (block.layout.stripe_size <= 0)
      throw ConfigError("config field 'io.stripe_size': must be > 0");
    if (block.layout.array_count < 1)
      throw ConfigError("config field 'io.array_count': must be >= 1");
    if (block.procs < 1) throw ConfigError("config field 'io.procs': must be >= 1");
    config.io = block;
  }

  if (root.contains("fit")) {
    const nlohmann::json& fit = root.at("fit");
    if (!fit.is_object()) throw ConfigError("config field 'fit': expected an object");
    FitBlock block;
    block.beta2_ratio = number_field(fit, "beta2_ratio", "fit.beta2_ratio", 4.0);
    block.supernode_capacity =
        static_cast<int>(integer_field(fit, "supernode_capacity", "fit.supernode_capacity", 256));
    const nlohmann::json& targets = require_field(fit, "targets", "fit.targets");
    if (!targets.is_array()) throw ConfigError("config field 'fit.targets': expected an array");
    std::size_t index = 0;
    for (const auto& t : targets) {
      const std::string path = "fit.targets[" + std::to_string(index++) + "]";
      if (!t.is_object()) throw ConfigError("config field '" + path + "': expected an object");
      FitTargetSpec spec;
      spec.model = string_field(t, "model", path + ".model");
      spec.nodes = static_cast<int>(integer_field(t, "p", path + ".p"));
      spec.sub_batch = static_cast<int>(integer_field(t, "b", path + ".b"));
      if (t.contains("comm_fraction")) {
        spec.observed = number_field(t, "comm_fraction", path + ".comm_fraction");
        spec.is_speedup = false;
      } else if (t.contains("speedup")) {
        spec.observed = number_field(t, "speedup", path + ".speedup");
        spec.is_speedup = true;
      } else {
        throw ConfigError("config: missing field '" + path + ".comm_fraction' (or '.speedup')");
      }
      block.targets.push_back(std::move(spec));
    }
    if (block.targets.empty())
      throw ConfigError("config field 'fit.targets': must be non-empty");
    config.fit = block;
  }

  if (root.contains("output"))
    config.output_basename = detail::string_field(root, "output", "output");

  return config;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file '" + path + "'");
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: invalid JSON in '" + path + "': " + e.what());
  }
  return parse_config_json(root);
}

} // namespace hiercoll
