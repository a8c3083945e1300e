// Batch front-end: evaluates the cost model, runs schedule simulations and
// training-time sweeps from a JSON experiment config, and exposes the
// self-verification suite. Outputs are deterministic for a given config and
// seed so runs can be diffed byte for byte.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "hiercoll/hiercoll.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace {

using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "csv";
  std::string mode;
  std::uint64_t seed = 12345;
  std::string dump_schedule;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing output file '" + path.string() + "'");
}

std::filesystem::path output_path(const CommonOptions& opts, const std::string& name) {
  std::filesystem::create_directories(opts.out_dir);
  return std::filesystem::path(opts.out_dir) / name;
}

std::string mapping_name(hiercoll::MappingKind kind) {
  return kind == hiercoll::MappingKind::contiguous ? "contiguous" : "round_robin";
}

hiercoll::CommSchedule build_schedule(const hiercoll::ExperimentConfig& config) {
  if (!config.payload_bytes && !config.model)
    throw hiercoll::ConfigError("config: missing field 'payload_bytes' (or 'model')");
  const std::uint64_t payload =
      config.payload_bytes ? *config.payload_bytes : config.model->total_param_bytes;
  // Payloads that are not a whole number of elements pad up to one.
  const std::size_t n_elems = (payload + config.elem_bytes - 1) / config.elem_bytes;
  if (config.algorithm == hiercoll::Algorithm::tree_allreduce)
    return hiercoll::allreduce_schedule(config.topology.p, n_elems, config.elem_bytes);
  return hiercoll::ring_allreduce_schedule(config.topology.p, n_elems, config.elem_bytes);
}

int run_cost(const CommonOptions& opts) {
  using namespace hiercoll;
  const ExperimentConfig config = parse_config(opts.config_path);
  if (!config.payload_bytes && !config.model)
    throw ConfigError("config: missing field 'payload_bytes' (or 'model')");
  const std::uint64_t payload =
      config.payload_bytes ? *config.payload_bytes : config.model->total_param_bytes;

  std::vector<int> node_counts = config.p_sweep;
  if (node_counts.empty()) node_counts = {config.topology.p};

  std::vector<CostRow> rows;
  for (int p : node_counts) {
    const int q = std::min(config.topology.q, p);
    const TopologySpec topo =
        build_topology(p, q, config.topology.alpha, config.topology.beta1, config.topology.beta2,
                       config.topology.gamma, config.topology.oversub_factor, true);
    const CostParams params = CostParams::from_topology(topo, static_cast<double>(payload));
    if (config.algorithm == Algorithm::tree_allreduce) {
      for (Variant variant : {Variant::baseline, Variant::renumbered})
        rows.push_back({p, q, payload, "tree_allreduce", to_string(variant),
                        cost_allreduce(params, variant)});
    } else {
      rows.push_back({p, q, payload, "ring_allreduce", "ring", cost_ring_allreduce(params)});
    }
  }

  const ReportFormat format = report_format_from_string(opts.format);
  const std::string ext = format == ReportFormat::csv ? ".csv" : ".json";
  const auto path = output_path(opts, config.output_basename + "_cost" + ext);
  write_file(path, emit_report(rows, format));
  for (const CostRow& row : rows)
    std::cout << "p=" << row.p << " q=" << row.q << " " << row.algorithm << "/" << row.variant
              << " total=" << format_double(row.cost.total) << " s\n";
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int run_simulate(const CommonOptions& opts) {
  using namespace hiercoll;
  const ExperimentConfig config = parse_config(opts.config_path);
  const SimMode mode = opts.mode.empty() ? config.sim_mode : sim_mode_from_string(opts.mode);
  const CommSchedule schedule = build_schedule(config);

  if (!opts.dump_schedule.empty())
    write_file(output_path(opts, opts.dump_schedule), schedule_to_json(schedule).dump(2) + "\n");

  for (MappingKind kind : config.mappings) {
    const RankMapping mapping = make_mapping(config.topology, kind);
    const SimReport report = simulate(schedule, config.topology, mapping, mode);
    json j = to_json(report);
    j["mapping"] = mapping_name(kind);
    j["mode"] = to_string(mode);
    j["rounds"] = report.round_times.size();
    const auto path = output_path(
        opts, config.output_basename + "_simulate_" + mapping_name(kind) + ".json");
    write_file(path, j.dump(2) + "\n");
    if (report_format_from_string(opts.format) == ReportFormat::csv) {
      const auto rounds_path = output_path(
          opts, config.output_basename + "_rounds_" + mapping_name(kind) + ".csv");
      write_file(rounds_path, sim_rounds_to_csv(report));
    }
    std::cout << mapping_name(kind) << ": total_time=" << format_double(report.total_time)
              << " s over " << report.round_times.size() << " rounds -> " << path.string()
              << "\n";
  }
  return 0;
}

int run_verify(const CommonOptions& opts) {
  using namespace hiercoll;
  const std::vector<CheckResult> checks = run_verification_suite(opts.seed);
  bool all_passed = true;
  json entries = json::array();
  for (const CheckResult& check : checks) {
    all_passed = all_passed && check.passed;
    entries.push_back({{"name", check.name}, {"passed", check.passed}, {"detail", check.detail}});
    std::cout << (check.passed ? "[PASS] " : "[FAIL] ") << check.name << ": " << check.detail
              << "\n";
  }
  json summary = {{"seed", opts.seed},
                  {"checks", std::move(entries)},
                  {"all_passed", all_passed}};
  const auto path = output_path(opts, "verify_report.json");
  write_file(path, summary.dump(2) + "\n");
  std::cout << (all_passed ? "verification suite passed" : "verification suite FAILED") << " ("
            << checks.size() << " checks) -> " << path.string() << "\n";
  return all_passed ? 0 : 1;
}

int run_train_sim(const CommonOptions& opts) {
  using namespace hiercoll;
  const ExperimentConfig config = parse_config(opts.config_path);
  const TrainBlock train = config.train.value_or(TrainBlock{});
  const int nodes = config.topology.p;
  const int groups = train.local_groups;
  if (train.sub_batch < groups || train.sub_batch % groups != 0)
    throw ConfigError("config field 'train.sub_batch': must be a positive multiple of "
                      "'train.local_groups'");
  const int per_group = train.sub_batch / groups;
  const std::size_t dim = static_cast<std::size_t>(train.dim);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> reals(-1.0, 1.0);

  // Toy objective: per-sample loss 0.5*(w - x)^2, so the gradient is w - x.
  LayerVectors initial = {std::vector<double>(dim), std::vector<double>(dim / 2 + 1)};
  for (auto& layer : initial)
    for (double& x : layer) x = reals(rng);
  std::vector<LayerVectors> weights(static_cast<std::size_t>(nodes), initial);
  LayerVectors serial = initial;

  LayerVectors zeros = initial;
  for (auto& layer : zeros) std::fill(layer.begin(), layer.end(), 0.0);

  double max_rel_dev = 0;
  bool replicas_identical = true;
  for (int step = 0; step < train.steps; ++step) {
    std::vector<std::vector<LayerVectors>> grads(static_cast<std::size_t>(nodes));
    LayerVectors sum_x = zeros;
    for (int k = 0; k < nodes; ++k) {
      grads[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(groups));
      for (int g = 0; g < groups; ++g) {
        LayerVectors grad = zeros;
        for (int s = 0; s < per_group; ++s)
          for (std::size_t layer = 0; layer < grad.size(); ++layer)
            for (std::size_t i = 0; i < grad[layer].size(); ++i) {
              const double x = reals(rng);
              grad[layer][i] += weights[static_cast<std::size_t>(k)][layer][i] - x;
              sum_x[layer][i] += x;
            }
        for (auto& layer : grad)
          for (double& v : layer) v /= per_group;
        grads[static_cast<std::size_t>(k)][static_cast<std::size_t>(g)] = std::move(grad);
      }
    }
    ssgd_step(weights, grads, train.learning_rate);

    const double total_samples = static_cast<double>(nodes) * train.sub_batch;
    for (std::size_t layer = 0; layer < serial.size(); ++layer)
      for (std::size_t i = 0; i < serial[layer].size(); ++i)
        serial[layer][i] -=
            train.learning_rate * (serial[layer][i] - sum_x[layer][i] / total_samples);

    for (int k = 1; k < nodes; ++k)
      replicas_identical =
          replicas_identical && weights[static_cast<std::size_t>(k)] == weights[0];
    for (std::size_t layer = 0; layer < serial.size(); ++layer)
      for (std::size_t i = 0; i < serial[layer].size(); ++i) {
        const double denom = std::max(std::abs(serial[layer][i]), 1e-300);
        max_rel_dev = std::max(max_rel_dev, std::abs(weights[0][layer][i] - serial[layer][i]) / denom);
      }
  }

  std::vector<std::vector<double>> flat_weights;
  for (const auto& layer : weights[0]) flat_weights.push_back(layer);
  const std::uint64_t checksum = checksum_payloads(flat_weights);
  const double tol = std::ldexp(1.0, -40);
  const bool ok = replicas_identical && max_rel_dev <= tol;

  json j = {{"nodes", nodes},
            {"sub_batch", train.sub_batch},
            {"local_groups", groups},
            {"steps", train.steps},
            {"seed", opts.seed},
            {"replicas_identical", replicas_identical},
            {"max_rel_deviation_vs_serial", max_rel_dev},
            {"tolerance", tol},
            {"weights_checksum", checksum},
            {"passed", ok}};
  const auto path = output_path(opts, config.output_basename + "_train.json");
  write_file(path, j.dump(2) + "\n");
  std::cout << "train-sim: P=" << nodes << " b=" << train.sub_batch
            << " max_rel_dev=" << format_double(max_rel_dev)
            << (ok ? " (matches serial SGD)" : " (DIVERGED)") << " -> " << path.string() << "\n";
  return ok ? 0 : 1;
}

int run_scale(const CommonOptions& opts) {
  using namespace hiercoll;
  const ExperimentConfig config = parse_config(opts.config_path);
  if (!config.model) throw ConfigError("config: missing field 'model' (or 'model_file')");

  std::vector<int> node_counts = config.p_sweep;
  if (node_counts.empty())
    for (int p = 1; p <= config.topology.p; p *= 2) node_counts.push_back(p);
  std::vector<int> batches = config.b_sweep;
  if (batches.empty())
    batches = config.train ? std::vector<int>{config.train->sub_batch}
                           : std::vector<int>{32, 64, 128, 256};

  TopologyFamily family;
  family.supernode_capacity = config.topology.q;
  family.alpha = config.topology.alpha;
  family.beta1 = config.topology.beta1;
  family.beta2 = config.topology.beta2;
  family.gamma = config.topology.gamma;
  family.oversub_factor = config.topology.oversub_factor;

  const TrainBlock train = config.train.value_or(TrainBlock{});
  const ReportFormat format = report_format_from_string(opts.format);
  const std::string ext = format == ReportFormat::csv ? ".csv" : ".json";

  for (MappingKind kind : config.mappings) {
    const Variant variant = variant_for(kind);
    std::vector<IterationReport> rows;
    for (int b : batches) {
      TrainConfig point;
      point.model = *config.model;
      point.sub_batch = b;
      point.local_groups = train.local_groups;
      point.local_gamma = train.local_gamma;
      point.learning_rate = train.learning_rate;
      const std::vector<IterationReport> sweep =
          scaling_report(point, node_counts, family, variant);
      rows.insert(rows.end(), sweep.begin(), sweep.end());
    }
    const auto path = output_path(
        opts, config.output_basename + "_scale_" + to_string(variant) + ext);
    write_file(path, emit_report(rows, format));
    std::cout << "scale (" << to_string(variant) << "): " << rows.size() << " rows, model "
              << config.model->name
              << (config.model->has_synthetic_layers() ? " [synthetic layer sizes]" : "")
              << " -> " << path.string() << "\n";
  }
  return 0;
}

int run_io_model(const CommonOptions& opts) {
  using namespace hiercoll;
  const ExperimentConfig config = parse_config(opts.config_path);
  if (!config.io) throw ConfigError("config: missing field 'io'");
  const IoBlock& io = *config.io;

  const int worst = worst_case_arrays_touched(io.read_bytes, io.layout);
  const int aligned = arrays_touched(io.read_bytes, io.layout, 0);
  const std::int64_t load = per_array_load(io.procs, io.read_bytes, io.layout, io.aligned);

  json j = {{"read_bytes", io.read_bytes},
            {"stripe_size", io.layout.stripe_size},
            {"array_count", io.layout.array_count},
            {"procs", io.procs},
            {"aligned", io.aligned},
            {"arrays_touched_aligned", aligned},
            {"arrays_touched_worst_case", worst},
            {"per_array_load", load}};
  const auto path = output_path(opts, config.output_basename + "_io.json");
  write_file(path, j.dump(2) + "\n");
  std::cout << "io-model: arrays_touched<=" << worst << " per_array_load=" << load << " -> "
            << path.string() << "\n";
  return 0;
}

int run_fit(const CommonOptions& opts) {
  using namespace hiercoll;
  const ExperimentConfig config = parse_config(opts.config_path);
  if (!config.fit) throw ConfigError("config: missing field 'fit'");

  std::vector<FitTarget> targets;
  for (const FitTargetSpec& spec : config.fit->targets) {
    FitTarget target;
    if (config.model && config.model->name == spec.model)
      target.model = *config.model;
    else
      target.model = builtin_model(spec.model);
    target.nodes = spec.nodes;
    target.sub_batch = spec.sub_batch;
    target.observed = spec.observed;
    target.is_speedup = spec.is_speedup;
    targets.push_back(std::move(target));
  }

  FitSettings settings;
  settings.supernode_capacity = config.fit->supernode_capacity;
  settings.beta2_ratio = config.fit->beta2_ratio;
  settings.gamma = config.topology.gamma;
  settings.oversub_factor = config.topology.oversub_factor;
  settings.variant = variant_for(config.mappings.front());
  const FitResult result = calibrate_fit(targets, settings);

  json predictions = json::array();
  for (const FitTarget& t : targets) {
    const double predicted = fit_prediction(t, result.alpha, result.beta1, settings);
    predictions.push_back({{"model", t.model.name},
                           {"p", t.nodes},
                           {"b", t.sub_batch},
                           {"observed", t.observed},
                           {"predicted", predicted}});
  }
  json j = {{"alpha", result.alpha},
            {"beta1", result.beta1},
            {"beta2_ratio", config.fit->beta2_ratio},
            {"residual_rms_rel", result.residual},
            {"variant", to_string(settings.variant)},
            {"targets", std::move(predictions)}};
  const auto path = output_path(opts, config.output_basename + "_fit.json");
  write_file(path, j.dump(2) + "\n");
  std::cout << "fit: alpha=" << format_double(result.alpha)
            << " beta1=" << format_double(result.beta1)
            << " residual=" << format_double(result.residual) << " -> " << path.string() << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"cost model, schedule simulator and scaling analysis for hierarchical allreduce"};
  app.require_subcommand(1);

  CommonOptions opts;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* config_opt = sub->add_option("--config", opts.config_path, "experiment config (JSON)");
    if (needs_config) config_opt->required();
    sub->add_option("--out", opts.out_dir, "output directory (default .)");
    sub->add_option("--format", opts.format, "report format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", opts.seed, "RNG seed for randomized checks");
  };

  add_common(app.add_subcommand("cost", "evaluate the closed-form allreduce cost model"), true);
  auto* simulate = app.add_subcommand("simulate", "run the round-synchronized schedule simulator");
  add_common(simulate, true);
  simulate->add_option("--mode", opts.mode, "override sim mode: fixed_beta or contention")
      ->check(CLI::IsMember({"fixed_beta", "contention"}));
  simulate->add_option("--dump-schedule", opts.dump_schedule,
                       "also write the schedule as JSON (file name inside --out)");
  add_common(app.add_subcommand("verify", "run the full invariant suite"), false);
  add_common(app.add_subcommand("train-sim", "numeric SSGD on the toy objective"), true);
  add_common(app.add_subcommand("scale", "speedup / comm-fraction sweeps"), true);
  add_common(app.add_subcommand("io-model", "striped read load bounds"), true);
  add_common(app.add_subcommand("fit", "calibrate alpha/beta1 against observed fractions"), true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("cost")) return run_cost(opts);
    if (app.got_subcommand("simulate")) return run_simulate(opts);
    if (app.got_subcommand("verify")) return run_verify(opts);
    if (app.got_subcommand("train-sim")) return run_train_sim(opts);
    if (app.got_subcommand("scale")) return run_scale(opts);
    if (app.got_subcommand("io-model")) return run_io_model(opts);
    if (app.got_subcommand("fit")) return run_fit(opts);
  } catch (const hiercoll::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
