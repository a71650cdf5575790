#include <CLI11.hpp>
#include <json.hpp>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include "sqsum/report.hpp"

namespace {

using nlohmann::json;
using namespace sqsum;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitProtocol = 2;  // single-run abort or failed verification

int fail_usage(const std::string& message) {
  std::cerr << "error: " << message << '\n';
  return kExitUsage;
}

// SQSUM_SEED overrides the built-in default seed (1); an explicit --seed or a
// config-file seed still wins over it.
std::optional<std::uint64_t> env_seed(std::string& error) {
  const char* raw = std::getenv("SQSUM_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const unsigned long long value = std::strtoull(raw, &end, 10);
  if (errno != 0 || end == raw || *end != '\0') {
    error = "SQSUM_SEED must be a decimal unsigned integer, got '" + std::string(raw) + "'";
  }
  return value;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw Error("config file '" + path + "' must hold a JSON object");
  static const std::set<std::string> known = {
      "n",     "r",    "d",         "delta",     "adversary", "target",  "channel", "phase",
      "trials", "seed", "x",         "y",         "threshold", "workers", "format"};
  for (const auto& [key, value] : cfg.items()) {
    if (!known.count(key)) throw Error("unknown config key '" + key + "' in " + path);
  }
  return cfg;
}

// Precedence: explicit flag > config-file key > built-in default.
template <typename T>
void pick(const CLI::Option* opt, const json& cfg, const char* key, T& var) {
  if (opt->count() > 0 || !cfg.contains(key) || cfg.at(key).is_null()) return;
  try {
    var = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error("config key '" + std::string(key) + "' has the wrong type");
  }
}

bool write_file(const std::string& path, const std::string& text, std::string& error) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    error = "cannot open '" + path + "' for writing";
    return false;
  }
  out << text;
  out.flush();
  if (!out) {
    error = "failed while writing '" + path + "'";
    return false;
  }
  return true;
}

int emit_report(const Report& report, const std::string& out_path) {
  std::string rendered;
  if (report.config.format == "json") {
    rendered = report_to_json(report);
  } else if (report.config.format == "csv") {
    rendered = report_to_csv(report);
  } else if (report.config.format == "human") {
    rendered = report_to_human(report);
  } else {
    return fail_usage("format must be one of json, csv, human (key 'format')");
  }
  if (out_path.empty()) {
    std::cout << rendered;
    return kExitOk;
  }
  std::string error;
  if (!write_file(out_path, rendered, error)) return fail_usage(error);
  return kExitOk;
}

std::string fraction_note(double numerator, double denominator) {
  if (std::abs(denominator - std::round(denominator)) > 1e-9) return "";
  char buf[48];
  std::snprintf(buf, sizeof buf, "  (= %.0f/%.0f)", numerator, std::round(denominator));
  return buf;
}

void print_check_line(const CheckResult& check) {
  const char* status = check.pass ? (check.warn ? "WARN" : "PASS") : "FAIL";
  std::printf("[%s] %-34s %s\n", status, check.name.c_str(), check.detail.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact simulator of a two-party semiquantum summation protocol on a "
               "collective-dephasing channel"};
  app.require_subcommand(1);

  // ---- run ----------------------------------------------------------------
  auto* cmd_run = app.add_subcommand(
      "run", "Execute the protocol once, or as a Monte Carlo experiment (--trials > 1)");
  std::string config_path;
  cmd_run->add_option("--config", config_path, "JSON config file (flags override its keys)");
  std::size_t n = 8;
  auto* opt_n = cmd_run->add_option("--n", n, "Result length in bits");
  int r = 1;
  auto* opt_r = cmd_run->add_option("--r", r, "Eavesdropping-check groups per result bit");
  int d = 1;
  auto* opt_d = cmd_run->add_option("--d", d, "Honesty-check groups per result bit");
  double delta = 1.0;
  auto* opt_delta = cmd_run->add_option("--delta", delta, "Surplus factor");
  std::string adversary = "passive";
  auto* opt_adversary = cmd_run->add_option(
      "--adversary", adversary,
      "passive | eve-double-cnot | eve-single-cnot | eve-measure-resend | tp-attack-1 | "
      "tp-attack-2");
  std::string target = "alice";
  auto* opt_target =
      cmd_run->add_option("--target", target, "Channel an outside attacker taps: alice | bob");
  std::string channel = "noiseless";
  auto* opt_channel = cmd_run->add_option("--channel", channel, "noiseless | dephasing");
  double phase = 0.0;
  auto* opt_phase = cmd_run->add_option(
      "--phase", phase, "Fix the dephasing angle in [0, 2*pi) instead of drawing per window");
  std::size_t trials = 1;
  auto* opt_trials = cmd_run->add_option("--trials", trials, "Independent protocol runs");
  std::uint64_t seed = 1;
  auto* opt_seed = cmd_run->add_option("--seed", seed, "Root seed (SQSUM_SEED overrides default)");
  std::string x_str = "random";
  auto* opt_x = cmd_run->add_option("--x", x_str, "Alice's input bits, MSB first, or 'random'");
  std::string y_str = "random";
  auto* opt_y = cmd_run->add_option("--y", y_str, "Bob's input bits, MSB first, or 'random'");
  double threshold = 0.0;
  auto* opt_threshold = cmd_run->add_option(
      "--threshold", threshold, "Tolerated step-3 error fraction per particle class");
  unsigned workers = 0;
  auto* opt_workers =
      cmd_run->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");
  std::string format = "human";
  auto* opt_format = cmd_run->add_option("--format", format, "Report format: json | csv | human");
  std::string out_path;
  cmd_run->add_option("--out", out_path, "Write the report here instead of stdout");
  std::string transcript_path;
  cmd_run->add_option("--transcript", transcript_path,
                      "Write the per-group transcript (single runs only) to this JSONL file");

  // ---- verify ---------------------------------------------------------------
  auto* cmd_verify =
      app.add_subcommand("verify", "Run the state-identity, dephasing and worked-example checks");
  std::string only_filter;
  cmd_verify->add_option("--only", only_filter, "Run only checks whose name contains this text");
  double inject_corruption = 0.0;
  cmd_verify->add_option("--inject-corruption", inject_corruption,
                         "Perturb one amplitude by this much (negative control; checks must fail)");
  std::size_t dfs_samples = 10000;
  cmd_verify->add_option("--samples", dfs_samples,
                         "Announcement samples per channel mode for the statistics check");
  std::uint64_t verify_seed = 1;
  cmd_verify->add_option("--seed", verify_seed, "Seed for the statistics check");

  // ---- efficiency -----------------------------------------------------------
  auto* cmd_eff = app.add_subcommand(
      "efficiency", "Qubit efficiency of this protocol vs the three-party baseline");
  int eff_r = 1, eff_d = 1;
  double eff_delta = 1.0;
  cmd_eff->add_option("--r", eff_r, "Eavesdropping-check groups per result bit");
  cmd_eff->add_option("--d", eff_d, "Honesty-check groups per result bit");
  cmd_eff->add_option("--delta", eff_delta, "Surplus factor");

  // ---- selftest ---------------------------------------------------------------
  auto* cmd_selftest =
      app.add_subcommand("selftest", "Fast end-to-end smoke checks of the whole stack");
  std::uint64_t selftest_seed = 42;
  cmd_selftest->add_option("--seed", selftest_seed, "Seed for the sampled smoke checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_run->parsed()) {
      json cfg = json::object();
      if (!config_path.empty()) cfg = load_config_file(config_path);
      pick(opt_n, cfg, "n", n);
      pick(opt_r, cfg, "r", r);
      pick(opt_d, cfg, "d", d);
      pick(opt_delta, cfg, "delta", delta);
      pick(opt_adversary, cfg, "adversary", adversary);
      pick(opt_target, cfg, "target", target);
      pick(opt_channel, cfg, "channel", channel);
      pick(opt_trials, cfg, "trials", trials);
      pick(opt_x, cfg, "x", x_str);
      pick(opt_y, cfg, "y", y_str);
      pick(opt_threshold, cfg, "threshold", threshold);
      pick(opt_workers, cfg, "workers", workers);
      pick(opt_format, cfg, "format", format);

      std::optional<double> fixed_phase;
      if (opt_phase->count() > 0) {
        fixed_phase = phase;
      } else if (cfg.contains("phase") && !cfg.at("phase").is_null()) {
        pick(opt_phase, cfg, "phase", phase);
        fixed_phase = phase;
      }
      if (opt_seed->count() == 0) {
        if (cfg.contains("seed") && !cfg.at("seed").is_null()) {
          pick(opt_seed, cfg, "seed", seed);
        } else {
          std::string env_error;
          const auto from_env = env_seed(env_error);
          if (!env_error.empty()) return fail_usage(env_error);
          seed = from_env.value_or(1);
        }
      }

      const ProtocolParams params{n, r, d, delta};
      params.validate();
      if (trials < 1) return fail_usage("'trials' must be at least 1");
      if (threshold < 0.0 || threshold >= 1.0) {
        return fail_usage("'threshold' must lie in [0, 1)");
      }

      ChannelConfig channel_cfg;
      if (channel == "noiseless") {
        if (fixed_phase) return fail_usage("'phase' needs channel=dephasing");
        channel_cfg = ChannelConfig::noiseless();
      } else if (channel == "dephasing") {
        channel_cfg =
            fixed_phase ? ChannelConfig::dephasing_fixed(*fixed_phase) : ChannelConfig::dephasing();
      } else {
        return fail_usage("'channel' must be noiseless or dephasing, got '" + channel + "'");
      }

      TargetUser eve_target;
      if (target == "alice") {
        eve_target = TargetUser::Alice;
      } else if (target == "bob") {
        eve_target = TargetUser::Bob;
      } else {
        return fail_usage("'target' must be alice or bob, got '" + target + "'");
      }
      (void)make_adversary(adversary, eve_target);  // validates the name

      const auto parse_input = [&](const std::string& text, const char* key) {
        std::optional<Bits> bits;
        if (text != "random") {
          bits = bits_from_string(text);
          if (bits->size() != n) {
            throw Error("'" + std::string(key) + "' must have exactly n=" + std::to_string(n) +
                        " bits, got " + std::to_string(bits->size()));
          }
        }
        return bits;
      };
      const std::optional<Bits> x_fixed = parse_input(x_str, "x");
      const std::optional<Bits> y_fixed = parse_input(y_str, "y");

      ResolvedConfig resolved;
      resolved.n = n;
      resolved.r = r;
      resolved.d = d;
      resolved.delta = delta;
      resolved.adversary = adversary;
      resolved.target = target;
      resolved.channel = channel;
      resolved.phase = fixed_phase;
      resolved.trials = trials;
      resolved.seed = seed;
      resolved.x = x_str;
      resolved.y = y_str;
      resolved.threshold = threshold;
      resolved.workers = workers;
      resolved.format = format;

      if (trials == 1) {
        // A single run consumes exactly the trial-0 stream of the equivalent
        // one-trial experiment, so both paths replay identically from a seed.
        Rng rng(Rng::derive_seed(seed, 0));
        const Bits x = x_fixed ? *x_fixed : random_bits(n, rng);
        const Bits y = y_fixed ? *y_fixed : random_bits(n, rng);
        resolved.x = bits_to_string(x);
        resolved.y = bits_to_string(y);
        const auto adv = make_adversary(adversary, eve_target);
        const auto started = std::chrono::steady_clock::now();
        const RunOutcome outcome =
            run_protocol(params, x, y, *adv, channel_cfg, rng, CheckPolicy{threshold});
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        std::optional<std::string> transcript_ref;
        if (!transcript_path.empty()) {
          std::string error;
          if (!write_file(transcript_path, transcript_to_jsonl(outcome.transcript), error)) {
            return fail_usage(error);
          }
          transcript_ref = transcript_path;
        }
        const Report report = Report::from_single_run(resolved, outcome, wall, transcript_ref);
        const int emit = emit_report(report, out_path);
        if (emit != kExitOk) return emit;
        return outcome.success() ? kExitOk : kExitProtocol;
      }

      if (!transcript_path.empty()) {
        return fail_usage("'transcript' records a single run; drop it or use --trials 1");
      }
      ExperimentSpec spec;
      spec.params = params;
      spec.adversary = adversary;
      spec.eve_target = eve_target;
      spec.channel = channel_cfg;
      spec.trials = trials;
      spec.seed = seed;
      spec.x = x_fixed;
      spec.y = y_fixed;
      spec.policy = CheckPolicy{threshold};
      spec.workers = workers;
      const ExperimentReport experiment = run_experiment(spec);
      const Report report = Report::from_experiment(resolved, experiment);
      return emit_report(report, out_path);
    }

    if (cmd_verify->parsed()) {
      const auto checks =
          run_verification(only_filter, inject_corruption, dfs_samples, verify_seed);
      if (checks.empty()) {
        return fail_usage("no checks match filter '" + only_filter + "'");
      }
      std::size_t passed = 0, warned = 0, failed = 0;
      for (const CheckResult& check : checks) {
        print_check_line(check);
        if (!check.pass) {
          ++failed;
        } else if (check.warn) {
          ++warned;
        } else {
          ++passed;
        }
      }
      std::printf("%zu checks: %zu passed, %zu warned, %zu failed\n", checks.size(), passed,
                  warned, failed);
      return failed == 0 ? kExitOk : kExitProtocol;
    }

    if (cmd_eff->parsed()) {
      if (eff_r < 1 || eff_d < 1 || !(eff_delta > 0.0)) {
        return fail_usage("'r', 'd' and 'delta' must all be positive");
      }
      const ProtocolParams params{1, eff_r, eff_d, eff_delta};
      const double mine = qubit_efficiency(params);
      const double baseline = three_party_efficiency(eff_r, eff_d, eff_delta);
      std::printf("parameters            r=%d d=%d delta=%g\n", eff_r, eff_d, eff_delta);
      std::printf("this-protocol         %.10f%s\n", mine,
                  fraction_note(1.0, 6.0 * params.q() + 6.0).c_str());
      std::printf("three-party-baseline  %.10f%s\n", baseline,
                  fraction_note(2.0, 9.0 * (32.0 + eff_r + eff_d + eff_delta) + 6.0).c_str());
      std::printf("ratio                 %.6f\n", mine / baseline);
      return kExitOk;
    }

    if (cmd_selftest->parsed()) {
      std::size_t failed = 0;
      const auto report = [&](const char* name, bool ok, const std::string& detail) {
        std::printf("[%s] %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
        if (!ok) ++failed;
      };

      bool identities_ok = true;
      double worst = 0.0;
      for (const CheckResult& check : run_identity_checks()) {
        identities_ok = identities_ok && check.pass;
        worst = std::max(worst, check.deviation);
      }
      report("state-identities", identities_ok,
             "max deviation " + std::to_string(worst) + " across 9 identities");

      const CheckResult dfs = check_dfs_amplitudes();
      report("dephasing-invariance", dfs.pass, dfs.detail);

      const CheckResult table = check_table1();
      report("worked-example-table", table.pass,
             table.warn ? "passes with a flagged printed-cell discrepancy" : table.detail);

      ExperimentSpec spec;
      spec.params = ProtocolParams{2, 1, 1, 1.0};
      spec.trials = 50;
      spec.seed = selftest_seed;
      const ExperimentReport honest = run_experiment(spec);
      report("honest-protocol", honest.detections == 0 && honest.correctness_failures == 0,
             std::to_string(honest.successes) + "/50 runs reached a result, " +
                 std::to_string(honest.correctness_failures) + " wrong results, " +
                 std::to_string(honest.detections) + " spurious detections");

      const double rate = single_group_detection_rate("tp-attack-1", 4000, selftest_seed);
      report("dishonest-tp-detection", std::abs(rate - 0.125) < 0.03,
             "per-checked-group rate " + std::to_string(rate) + " (expect 0.125)");

      const double eta = qubit_efficiency(ProtocolParams{1, 1, 1, 1.0});
      report("efficiency-closed-form",
             std::abs(eta - 1.0 / 48.0) < 1e-15 &&
                 std::abs(three_party_efficiency(1, 1, 1.0) - 2.0 / 321.0) < 1e-15,
             "1/48 vs 2/321 at r=d=delta=1");

      std::printf("selftest: %zu failure(s)\n", failed);
      return failed == 0 ? kExitOk : kExitProtocol;
    }
  } catch (const Error& e) {
    return fail_usage(e.what());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
