#include "sqsum/report.hpp"

#include <json.hpp>

#include <algorithm>

namespace sqsum {
namespace {

using nlohmann::json;

json optional_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::map<std::string, std::size_t> zero_filled_breakdown() {
  std::map<std::string, std::size_t> out;
  for (const AbortReason reason :
       {AbortReason::EveDetectedCtrl, AbortReason::EveDetectedSift, AbortReason::TpDishonest,
        AbortReason::InsufficientSiftGroups}) {
    out[abort_reason_key(reason)] = 0;
  }
  return out;
}

json config_json(const ResolvedConfig& c) {
  json out;
  out["n"] = c.n;
  out["r"] = c.r;
  out["d"] = c.d;
  out["delta"] = c.delta;
  out["adversary"] = c.adversary;
  out["target"] = c.target;
  out["channel"] = c.channel;
  out["phase"] = optional_json(c.phase);
  out["trials"] = c.trials;
  out["seed"] = c.seed;
  out["x"] = c.x;
  out["y"] = c.y;
  out["threshold"] = c.threshold;
  out["workers"] = c.workers;
  out["format"] = c.format;
  return out;
}

// Scalar-to-text used by the flat view; JSON literals so all three formats
// print the same bytes for the same value.
std::string scalar(const json& value) {
  return value.is_string() ? value.get<std::string>() : value.dump();
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

std::string abort_reason_key(AbortReason reason) { return to_string(reason); }

Report Report::from_single_run(const ResolvedConfig& config, const RunOutcome& outcome,
                               double wall_time_s, std::optional<std::string> transcript_path) {
  Report rep;
  rep.config = config;
  rep.abort_breakdown = zero_filled_breakdown();
  rep.wall_time_s = wall_time_s;
  rep.transcript_path = std::move(transcript_path);
  if (outcome.success()) {
    rep.verdict = "success";
    rep.result_bits = bits_to_string(*outcome.result);
    rep.successes = 1;
  } else {
    rep.verdict = "abort:" + abort_reason_key(outcome.abort->reason) + ":step" +
                  std::to_string(outcome.abort->step);
    ++rep.abort_breakdown[abort_reason_key(outcome.abort->reason)];
    if (outcome.abort->reason != AbortReason::InsufficientSiftGroups) rep.detection_rate = 1.0;
  }
  return rep;
}

Report Report::from_experiment(const ResolvedConfig& config, const ExperimentReport& experiment) {
  Report rep;
  rep.config = config;
  rep.verdict = "experiment";
  rep.detection_rate = experiment.detection_rate;
  rep.ci95 = experiment.detection_ci;
  rep.analytic_prediction = experiment.analytic_prediction;
  // Schema stability: every abort reason appears as a column even when the
  // source map is sparse.
  rep.abort_breakdown = zero_filled_breakdown();
  for (const auto& [reason, count] : experiment.abort_breakdown) {
    rep.abort_breakdown[reason] = count;
  }
  rep.successes = experiment.successes;
  rep.correctness_failures = experiment.correctness_failures;
  rep.key_leakage = experiment.key_leakage;
  rep.wall_time_s = experiment.wall_time_s;
  return rep;
}

std::vector<std::pair<std::string, std::string>> flatten_report(const Report& report) {
  std::vector<std::pair<std::string, std::string>> out;
  const json config = config_json(report.config);
  for (const auto& [key, value] : config.items()) {
    out.emplace_back("config." + key, scalar(value));
  }
  out.emplace_back("verdict", report.verdict);
  out.emplace_back("result_bits", scalar(optional_json(report.result_bits)));
  out.emplace_back("detection_rate", scalar(json(report.detection_rate)));
  out.emplace_back("ci95_lo", report.ci95 ? scalar(json(report.ci95->lo)) : "null");
  out.emplace_back("ci95_hi", report.ci95 ? scalar(json(report.ci95->hi)) : "null");
  out.emplace_back("analytic_prediction", scalar(optional_json(report.analytic_prediction)));
  for (const auto& [reason, count] : report.abort_breakdown) {
    out.emplace_back("abort_breakdown." + reason, scalar(json(count)));
  }
  out.emplace_back("successes", scalar(json(report.successes)));
  out.emplace_back("correctness_failures", scalar(json(report.correctness_failures)));
  out.emplace_back("key_leakage", scalar(optional_json(report.key_leakage)));
  out.emplace_back("wall_time_s", scalar(json(report.wall_time_s)));
  out.emplace_back("transcript_path", scalar(optional_json(report.transcript_path)));
  return out;
}

std::string report_to_json(const Report& report) {
  json out;
  out["config"] = config_json(report.config);
  out["verdict"] = report.verdict;
  out["result_bits"] = optional_json(report.result_bits);
  out["detection_rate"] = report.detection_rate;
  if (report.ci95) {
    out["ci95"] = json{{"lo", report.ci95->lo}, {"hi", report.ci95->hi}};
  } else {
    out["ci95"] = nullptr;
  }
  out["analytic_prediction"] = optional_json(report.analytic_prediction);
  out["abort_breakdown"] = report.abort_breakdown;
  out["successes"] = report.successes;
  out["correctness_failures"] = report.correctness_failures;
  out["key_leakage"] = optional_json(report.key_leakage);
  out["wall_time_s"] = report.wall_time_s;
  out["transcript_path"] = optional_json(report.transcript_path);
  return out.dump(2) + "\n";
}

std::string report_to_csv(const Report& report) {
  const auto flat = flatten_report(report);
  std::string header, row;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (i) {
      header += ',';
      row += ',';
    }
    header += csv_quote(flat[i].first);
    row += csv_quote(flat[i].second);
  }
  return header + "\n" + row + "\n";
}

std::string report_to_human(const Report& report) {
  const auto flat = flatten_report(report);
  std::size_t width = 0;
  for (const auto& [key, value] : flat) width = std::max(width, key.size());
  std::string out;
  for (const auto& [key, value] : flat) {
    out += key;
    out.append(width - key.size() + 2, ' ');
    out += value;
    out += '\n';
  }
  return out;
}

std::string transcript_to_jsonl(const std::vector<GroupRecord>& records) {
  std::string out;
  for (const GroupRecord& rec : records) {
    json line;
    line["index"] = rec.index;
    line["alice_op"] = to_string(rec.alice_op);
    line["bob_op"] = to_string(rec.bob_op);
    line["alice_result"] = rec.alice_result ? json(to_string(*rec.alice_result)) : json(nullptr);
    line["bob_result"] = rec.bob_result ? json(to_string(*rec.bob_result)) : json(nullptr);
    line["role"] = to_string(rec.role);
    line["tp_announcement"] =
        rec.tp_announcement ? json(to_string(*rec.tp_announcement)) : json(nullptr);
    if (rec.honesty_check) line["honesty_check"] = to_string(*rec.honesty_check);
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace sqsum
