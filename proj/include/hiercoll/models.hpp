#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hiercoll {

/// One named parameter block. synthetic marks sizes that are placeholders
/// rather than published figures, so reports can flag them.
struct LayerSpec {
  std::string name;
  std::uint64_t param_bytes = 0;
  bool synthetic = false;
};

/// A network described only as far as the timing model needs: per-layer
/// parameter bytes and the single-node training throughput used to
/// calibrate compute time.
struct ModelDescriptor {
  std::string name;
  std::vector<LayerSpec> layers;
  std::uint64_t total_param_bytes = 0;
  double node_throughput = 0; // images/second for one node

  bool has_synthetic_layers() const {
    for (const auto& layer : layers)
      if (layer.synthetic) return true;
    return false;
  }
};

namespace detail {
inline std::uint64_t mib(double x) {
  return static_cast<std::uint64_t>(std::llround(x * 1048576.0));
}

inline ModelDescriptor finish_model(ModelDescriptor model) {
  if (model.layers.empty())
    throw std::invalid_argument("model '" + model.name + "': layers must be non-empty");
  if (!(model.node_throughput > 0))
    throw std::invalid_argument("model '" + model.name + "': node_throughput must be > 0");
  model.total_param_bytes = 0;
  for (const auto& layer : model.layers) model.total_param_bytes += layer.param_bytes;
  return model;
}
} // namespace detail

/// Built-in descriptors. Totals for alexnet/resnet50 and the two named vgg16
/// layers are published figures; everything marked synthetic fills the gaps
/// with conventional sizes so packing and sweeps have realistic shapes.
inline ModelDescriptor builtin_model(const std::string& name) {
  using detail::mib;
  ModelDescriptor m;
  m.name = name;
  if (name == "alexnet") {
    m.node_throughput = 94.17;
    m.layers = {{"all_parameters", mib(232.6), false}};
  } else if (name == "resnet50") {
    m.node_throughput = 5.56;
    m.layers = {{"all_parameters", mib(97.7), false}};
  } else if (name == "vgg16") {
    m.node_throughput = 6.21;
    const std::uint64_t conv1_1 = 1741; // 1.7 KB
    const std::uint64_t fc6 = mib(102.0);
    m.layers = {{"conv1_1", conv1_1, false},
                {"fc6", fc6, false},
                {"remaining_parameters", mib(528.0) - fc6 - conv1_1, true}};
  } else if (name == "vgg19") {
    m.node_throughput = 5.52;
    m.layers = {{"all_parameters", mib(548.0), true}};
  } else if (name == "googlenet") {
    m.node_throughput = 14.97;
    m.layers = {{"all_parameters", mib(26.0), true}};
  } else {
    throw std::invalid_argument("unknown model '" + name +
                                "' (built-ins: alexnet, resnet50, vgg16, vgg19, googlenet)");
  }
  return detail::finish_model(std::move(m));
}

inline std::vector<std::string> builtin_model_names() {
  return {"alexnet", "resnet50", "vgg16", "vgg19", "googlenet"};
}

/// Loads a descriptor from JSON:
/// {"name": ..., "node_throughput": ..., "layers": [{"name", "param_bytes", "synthetic"?}]}
inline ModelDescriptor model_from_json(const nlohmann::json& j) {
  ModelDescriptor m;
  if (!j.is_object()) throw std::invalid_argument("model: expected a JSON object");
  if (!j.contains("name") || !j.at("name").is_string())
    throw std::invalid_argument("model.name: missing or not a string");
  m.name = j.at("name").get<std::string>();
  if (!j.contains("node_throughput") || !j.at("node_throughput").is_number())
    throw std::invalid_argument("model.node_throughput: missing or not a number");
  m.node_throughput = j.at("node_throughput").get<double>();
  if (!j.contains("layers") || !j.at("layers").is_array())
    throw std::invalid_argument("model.layers: missing or not an array");
  std::size_t index = 0;
  for (const auto& entry : j.at("layers")) {
    const std::string path = "model.layers[" + std::to_string(index++) + "]";
    if (!entry.is_object()) throw std::invalid_argument(path + ": expected an object");
    LayerSpec layer;
    if (!entry.contains("name") || !entry.at("name").is_string())
      throw std::invalid_argument(path + ".name: missing or not a string");
    layer.name = entry.at("name").get<std::string>();
    if (!entry.contains("param_bytes") || !entry.at("param_bytes").is_number_integer() ||
        entry.at("param_bytes").get<std::int64_t>() < 0)
      throw std::invalid_argument(path + ".param_bytes: missing or not a non-negative integer");
    layer.param_bytes = entry.at("param_bytes").get<std::uint64_t>();
    layer.synthetic = entry.value("synthetic", false);
    m.layers.push_back(std::move(layer));
  }
  return detail::finish_model(std::move(m));
}

inline nlohmann::json model_to_json(const ModelDescriptor& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : m.layers)
    layers.push_back(
        {{"name", layer.name}, {"param_bytes", layer.param_bytes}, {"synthetic", layer.synthetic}});
  return {{"name", m.name},
          {"node_throughput", m.node_throughput},
          {"total_param_bytes", m.total_param_bytes},
          {"layers", std::move(layers)}};
}

} // namespace hiercoll
