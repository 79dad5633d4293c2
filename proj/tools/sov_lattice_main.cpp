#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sovlat/report.hpp"

namespace {

using sovlat::RunConfig;
using sovlat::VerificationReport;

void print_report(const VerificationReport& rep) {
  for (const auto& c : rep.checks) {
    const char* tag = c.status == "pass" ? "PASS" : (c.status == "fail" ? "FAIL" : "SKIP");
    if (c.status == "expected-skip")
      std::printf("[%s] %-28s %s\n", tag, c.name.c_str(), c.identity.c_str());
    else
      std::printf("[%s] %-28s residual %.3e (threshold %.1e)\n", tag, c.name.c_str(), c.residual,
                  c.threshold);
  }
  std::printf("%s: %s (%.2fs)\n", rep.command.c_str(), rep.overall() ? "pass" : "FAIL",
              rep.elapsed_seconds);
}

int run_one(const std::string& command, const RunConfig& cfg, const std::string& out_dir,
            VerificationReport& merged, std::string& csv) {
  VerificationReport rep;
  if (command == "verify-algebra") {
    rep = sovlat::run_verify_algebra(cfg);
  } else if (command == "spectrum") {
    rep = sovlat::run_spectrum(cfg, &csv);
  } else if (command == "qcurve") {
    rep = sovlat::run_qcurve(cfg);
  } else if (command == "qop") {
    rep = sovlat::run_qop(cfg);
  } else if (command == "aba") {
    rep = sovlat::run_aba(cfg);
  } else {
    throw sovlat::ConfigError("unknown command: " + command);
  }
  print_report(rep);
  merged.checks.insert(merged.checks.end(), rep.checks.begin(), rep.checks.end());
  if (!rep.spectrum.is_null()) merged.spectrum = rep.spectrum;
  merged.elapsed_seconds += rep.elapsed_seconds;
  (void)out_dir;
  return rep.overall() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-periodic gl_n fundamental spin chains: build, solve and cross-verify the "
               "transfer-matrix spectrum by separation of variables"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "run";
  double tol_override = -1.0;
  long long seed_override = -1;

  const std::vector<std::string> names = {"verify-algebra", "spectrum", "qcurve", "qop", "aba",
                                          "all"};
  std::vector<CLI::App*> subs;
  for (const auto& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory for report.json / spectrum.csv");
    sub->add_option("--tol", tol_override, "override the default pass tolerance");
    sub->add_option("--seed", seed_override, "override rng_seed");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  std::string command;
  for (size_t i = 0; i < names.size(); ++i)
    if (subs[i]->parsed()) command = names[i];

  try {
    sovlat::json raw;
    {
      std::ifstream in(config_path);
      if (!in) throw sovlat::ConfigError("config: cannot open " + config_path);
      in >> raw;
    }
    if (seed_override >= 0) raw["rng_seed"] = static_cast<std::uint64_t>(seed_override);
    if (tol_override > 0.0) raw["tolerances"]["pass"] = tol_override;
    if (const char* cap = std::getenv("SOV_LATTICE_MAX_DIM")) raw["max_state_dim"] = std::atoi(cap);
    RunConfig cfg = sovlat::config_from_json(raw);

    std::vector<std::string> commands;
    if (command == "all") {
      // The config may restrict which suites "all" runs.
      commands = cfg.commands.empty()
                     ? std::vector<std::string>{"verify-algebra", "spectrum", "qcurve", "qop", "aba"}
                     : cfg.commands;
    } else {
      commands = {command};
    }

    VerificationReport merged;
    merged.command = command;
    merged.config_echo = cfg.echo;
    std::string csv;
    int rc = 0;
    for (const auto& c : commands) rc = std::max(rc, run_one(c, cfg, out_dir, merged, csv));

    std::filesystem::create_directories(out_dir);
    {
      std::ofstream out(out_dir + "/report.json");
      out << merged.to_json().dump(2) << "\n";
    }
    if (!csv.empty()) {
      std::ofstream out(out_dir + "/spectrum.csv");
      out << csv;
    }
    std::printf("report written to %s/report.json\n", out_dir.c_str());
    return rc;
  } catch (const sovlat::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const sovlat::ConstructionError& e) {
    std::cerr << "construction error: " << e.what() << "\n";
    return 2;
  } catch (const sovlat::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
