#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqsum/analysis.hpp"

namespace sqsum {

// The fully resolved knob set a run executed with; echoed verbatim into every
// report so results are reproducible from the report alone.
struct ResolvedConfig {
  std::size_t n = 8;
  int r = 1;
  int d = 1;
  double delta = 1.0;
  std::string adversary = "passive";
  std::string target = "alice";
  std::string channel = "noiseless";
  std::optional<double> phase;  // fixed dephasing angle, when one was given
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  std::string x = "random";
  std::string y = "random";
  double threshold = 0.0;
  unsigned workers = 0;
  std::string format = "human";
};

struct Report {
  ResolvedConfig config;
  std::string verdict;  // "success", "abort:<reason>:step<k>" or "experiment"
  std::optional<std::string> result_bits;
  double detection_rate = 0.0;
  std::optional<Ci95> ci95;
  std::optional<double> analytic_prediction;
  std::map<std::string, std::size_t> abort_breakdown;  // all four reasons, zero-filled
  std::size_t successes = 0;
  std::size_t correctness_failures = 0;
  std::optional<double> key_leakage;
  double wall_time_s = 0.0;
  std::optional<std::string> transcript_path;

  static Report from_single_run(const ResolvedConfig& config, const RunOutcome& outcome,
                                double wall_time_s, std::optional<std::string> transcript_path);
  static Report from_experiment(const ResolvedConfig& config, const ExperimentReport& experiment);
};

std::string abort_reason_key(AbortReason reason);

// One flat (field, value) view drives the CSV and human emitters, and the
// JSON emitter renders the same values, so the three formats agree
// field-for-field by construction.
std::vector<std::pair<std::string, std::string>> flatten_report(const Report& report);
std::string report_to_json(const Report& report);
std::string report_to_csv(const Report& report);
std::string report_to_human(const Report& report);

// Line-delimited JSON, one record per particle group.
std::string transcript_to_jsonl(const std::vector<GroupRecord>& records);

}  // namespace sqsum
