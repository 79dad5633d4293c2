#ifndef SOVLAT_REPORT_HPP
#define SOVLAT_REPORT_HPP

#include <string>

#include <json.hpp>

#include "sovlat/qsc.hpp"

namespace sovlat {

using json = nlohmann::ordered_json;

// Materialized run configuration: every "random" field is already drawn
// (deterministically from rng_seed) by load time.
struct RunConfig {
  int n = 2, N = 1;
  cplx eta{1.0, 0.0};
  Vec xi;
  bool xi_random = false;
  cplx xi_extra{std::nan(""), 0.0};  // NaN means auto
  Mat K;
  std::string twist_kind;  // diagonal | jordan | matrix | random-simple
  std::vector<Vec> seed_weights;  // empty means all ones
  Tolerances tol;
  std::uint64_t rng_seed = 1;
  int max_state_dim = 256;
  std::vector<std::string> commands;
  json echo;  // canonical echo for reports
};

RunConfig config_from_json(const json& j);
RunConfig load_config(const std::string& path);

// Instance assembly with the documented retry policy: a degenerate SoV basis
// triggers up to 8 fresh xi draws (when xi was random), then up to 8 fresh
// seed weight draws.
struct Workspace {
  ModelContext ctx;
  TransferFamily fam;
  SovBasis basis;
  bool basis_built = false;
  int xi_redraws = 0;
  int seed_redraws = 0;
};
Workspace build_workspace(const RunConfig& cfg, bool need_basis);

struct CheckRecord {
  std::string name;
  std::string identity;  // the equation or property the check verifies
  double residual = 0.0;
  double threshold = 0.0;
  std::string status;  // pass | fail | expected-skip
};

struct VerificationReport {
  std::string command;
  std::vector<CheckRecord> checks;
  json spectrum;  // populated by the spectrum command
  json config_echo;
  double elapsed_seconds = 0.0;

  void add(const std::string& name, const std::string& identity, double residual,
           double threshold) {
    checks.push_back({name, identity, residual, threshold,
                      residual <= threshold ? "pass" : "fail"});
  }
  void add_flag(const std::string& name, const std::string& identity, bool ok) {
    checks.push_back({name, identity, ok ? 0.0 : 1.0, 0.5, ok ? "pass" : "fail"});
  }
  void add_skip(const std::string& name, const std::string& identity) {
    checks.push_back({name, identity, 0.0, 0.0, "expected-skip"});
  }
  bool overall() const {
    for (const auto& c : checks)
      if (c.status == "fail") return false;
    return true;
  }
  json to_json() const;
};

VerificationReport run_verify_algebra(const RunConfig& cfg);
VerificationReport run_spectrum(const RunConfig& cfg, std::string* csv_out = nullptr);
VerificationReport run_qcurve(const RunConfig& cfg);
VerificationReport run_qop(const RunConfig& cfg);
VerificationReport run_aba(const RunConfig& cfg);

}  // namespace sovlat

#endif
