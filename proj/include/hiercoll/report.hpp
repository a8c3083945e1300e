#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiercoll/cost_model.hpp"
#include "hiercoll/simulator.hpp"
#include "hiercoll/training.hpp"

#include <nlohmann/json.hpp>

namespace hiercoll {

enum class ReportFormat { csv, json };

inline ReportFormat report_format_from_string(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw std::invalid_argument("unknown report format '" + name + "' (expected csv or json)");
}

/// Shortest round-trippable decimal form, '.' separator, locale-independent.
inline std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

inline nlohmann::json to_json(const CostBreakdown& cost) {
  return {{"latency_s", cost.latency_term},
          {"intra_s", cost.intra_term},
          {"cross_s", cost.cross_term},
          {"compute_s", cost.compute_term},
          {"total_s", cost.total}};
}

/// One labelled cost-model evaluation, ready for tabulation.
struct CostRow {
  int p = 0;
  int q = 0;
  std::uint64_t n_bytes = 0;
  std::string algorithm; // tree_allreduce or ring_allreduce
  std::string variant;
  CostBreakdown cost;
};

inline nlohmann::json to_json(const CostRow& row) {
  nlohmann::json j = to_json(row.cost);
  j["p"] = row.p;
  j["q"] = row.q;
  j["n_bytes"] = row.n_bytes;
  j["algorithm"] = row.algorithm;
  j["variant"] = row.variant;
  return j;
}

inline nlohmann::json to_json(const IterationReport& report) {
  return {{"P", report.nodes},
          {"b", report.sub_batch},
          {"compute_s", report.compute_time},
          {"local_reduce_s", report.local_reduce_time},
          {"comm_s", report.comm_time},
          {"total_s", report.total},
          {"fraction", report.comm_fraction},
          {"speedup", report.speedup_vs_one_node}};
}

inline nlohmann::json to_json(const SimReport& report) {
  return {{"total_time_s", report.total_time},
          {"round_times_s", report.round_times},
          {"per_rank_intra_bytes", report.per_rank_intra_bytes},
          {"per_rank_cross_bytes", report.per_rank_cross_bytes},
          {"reduced_bytes", report.reduced_bytes},
          {"payload_checksum", report.payload_checksum}};
}

namespace detail {
inline void append_csv_line(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  out += '\n';
}
} // namespace detail

/// CSV with the stable column set (P, b, compute_s, comm_s, fraction, speedup).
inline std::string iteration_reports_to_csv(const std::vector<IterationReport>& reports) {
  std::string out;
  detail::append_csv_line(out, {"P", "b", "compute_s", "comm_s", "fraction", "speedup"});
  for (const IterationReport& r : reports)
    detail::append_csv_line(out, {std::to_string(r.nodes), std::to_string(r.sub_batch),
                                  format_double(r.compute_time), format_double(r.comm_time),
                                  format_double(r.comm_fraction),
                                  format_double(r.speedup_vs_one_node)});
  return out;
}

inline std::string cost_rows_to_csv(const std::vector<CostRow>& rows) {
  std::string out;
  detail::append_csv_line(
      out, {"p", "q", "n_bytes", "algorithm", "variant", "latency_s", "intra_s", "cross_s",
            "compute_s", "total_s"});
  for (const CostRow& r : rows)
    detail::append_csv_line(out, {std::to_string(r.p), std::to_string(r.q),
                                  std::to_string(r.n_bytes), r.algorithm, r.variant,
                                  format_double(r.cost.latency_term),
                                  format_double(r.cost.intra_term),
                                  format_double(r.cost.cross_term),
                                  format_double(r.cost.compute_term),
                                  format_double(r.cost.total)});
  return out;
}

inline std::string sim_rounds_to_csv(const SimReport& report) {
  std::string out;
  detail::append_csv_line(out, {"round", "time_s"});
  for (std::size_t i = 0; i < report.round_times.size(); ++i)
    detail::append_csv_line(out, {std::to_string(i), format_double(report.round_times[i])});
  return out;
}

/// Renders a non-empty report list in the requested format; JSON output is a
/// fixed point under parse-and-dump.
inline std::string emit_report(const std::vector<IterationReport>& reports, ReportFormat format) {
  if (reports.empty()) throw std::invalid_argument("emit_report: report list is empty");
  if (format == ReportFormat::csv) return iteration_reports_to_csv(reports);
  nlohmann::json j = nlohmann::json::array();
  for (const IterationReport& r : reports) j.push_back(to_json(r));
  return j.dump(2) + "\n";
}

inline std::string emit_report(const std::vector<CostRow>& rows, ReportFormat format) {
  if (rows.empty()) throw std::invalid_argument("emit_report: report list is empty");
  if (format == ReportFormat::csv) return cost_rows_to_csv(rows);
  nlohmann::json j = nlohmann::json::array();
  for (const CostRow& r : rows) j.push_back(to_json(r));
  return j.dump(2) + "\n";
}

} // namespace hiercoll
