#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailatlas/certify.hpp"
#include "tailatlas/config.hpp"
#include "tailatlas/decomposition.hpp"
#include "tailatlas/invariants.hpp"
#include "tailatlas/k_quotient.hpp"
#include "tailatlas/lorentz_ensemble.hpp"
#include "tailatlas/relabel.hpp"
#include "tailatlas/report.hpp"
#include "tailatlas/version.hpp"

namespace tailatlas {

/// Exit codes: 0 every embedded check passed, 2 at least one check failed.
/// Input and engine errors are thrown instead and map to exit code 1 at the
/// command line.
struct RunResult {
  nlohmann::json report;
  int exit_code = 0;
};

namespace detail {

inline constexpr int kProjectionTrials = 200;

/// Damages the computed atoms so the downstream invariant checks must fail.
/// Exists for tests that assert the checks are live, never for normal runs.
inline void corrupt_atoms(const ProductSystem& p, DecompositionReport& rep) {
  for (auto& comp : rep.components)
    for (auto& atom : comp.atoms) {
      if (atom.states.size() >= 2) {
        atom.states.pop_back();
        return;
      }
    }
  if (!rep.components.empty() && !rep.components[0].atoms.empty()) {
    int& s = rep.components[0].atoms[0].states[0];
    s = (s + 1) % p.node_count();
  }
}

inline nlohmann::json make_header(const RunConfig& cfg) {
  nlohmann::json h;
  h["tool"] = kToolName;
  h["version"] = kVersion;
  h["schema_version"] = kSchemaVersion;
  h["mode"] = cfg.mode;
  h["config_digest"] = config_digest(cfg);
  return h;
}

inline nlohmann::json assemble(const RunConfig& cfg, nlohmann::json header,
                               nlohmann::json body,
                               const std::vector<CheckReport>& checks,
                               const std::vector<std::string>& warnings) {
  bool passed = true;
  nlohmann::json jchecks = nlohmann::json::array();
  for (const CheckReport& c : checks) {
    passed = passed && c.all_passed();
    jchecks.push_back(check_report_to_json(c));
  }
  nlohmann::json out;
  out["header"] = std::move(header);
  out["config"] = canonical_config(cfg);
  out["body"] = std::move(body);
  out["checks"] = jchecks;
  out["passed"] = passed;
  out["warnings"] = warnings;
  return out;
}

inline RunResult run_decompose(const RunConfig& cfg) {
  std::vector<CheckReport> checks;
  std::vector<std::string> warnings;

  BaseValidation bv = validate_base(
      cfg.base, cfg.has_realization ? &cfg.realization : nullptr);
  checks.push_back(bv.report);
  ActionValidation av = validate_action(cfg.base, cfg.fiber, cfg.action);
  checks.push_back(av.report);
  if (!bv.report.all_passed() || !av.report.all_passed()) {
    RunResult out;
    out.report = assemble(cfg, make_header(cfg), nlohmann::json::object(),
                          checks, warnings);
    out.exit_code = 2;
    return out;
  }

  ProductSystem p = build_product(cfg.base, cfg.fiber, cfg.action);
  DecompositionReport rep = decompose(p);
  if (cfg.hooks.corrupt_atoms) {
    corrupt_atoms(p, rep);
    warnings.push_back("test hook corrupt_atoms is active");
  }
  rep.certificates =
      certify_exactness(p, rep, cfg.numeric.tolerance, cfg.numeric.max_power);

  checks.push_back(verify_theorem_invariants(p, rep));
  checks.push_back(project_atoms(p, rep));
  checks.push_back(
      check_projection_identity(p, kProjectionTrials, cfg.seed));
  checks.push_back(check_measure_preservation(p));

  nlohmann::json body = decomposition_to_json(p, rep);
  body["certificates"] = certificates_to_json(rep.certificates);

  bool relabelable = cfg.fiber.kind == FiberKind::Finite;
  for (const Component& comp : rep.components)
    relabelable = relabelable && comp.kind == ComponentKind::Cycle &&
                  comp.conservative;
  relabelable = relabelable && !rep.components.empty() &&
                !cfg.hooks.corrupt_atoms;
  if (relabelable) {
    RelabelResult rl = relabel_levels(p, rep);
    checks.push_back(rl.verification);
    nlohmann::json jr;
    jr["refined"] = rl.refined;
    jr["cells"] = rl.base.cells;
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& row : rl.relabel_finite) labels.push_back(row);
    jr["relabel"] = labels;
    body["relabel"] = jr;
  }

  RunResult out;
  out.report = assemble(cfg, make_header(cfg), std::move(body), checks,
                        warnings);
  for (const CheckReport& c : checks)
    if (!c.all_passed()) out.exit_code = 2;
  return out;
}

inline RunResult run_k_decompose(const RunConfig& cfg) {
  std::vector<CheckReport> checks;
  std::vector<std::string> warnings;

  BaseValidation bv = validate_base(
      cfg.base, cfg.has_realization ? &cfg.realization : nullptr);
  checks.push_back(bv.report);
  ActionValidation av = validate_action(cfg.base, cfg.fiber, cfg.action);
  checks.push_back(av.report);
  if (!bv.report.all_passed() || !av.report.all_passed()) {
    RunResult out;
    out.report = assemble(cfg, make_header(cfg), nlohmann::json::object(),
                          checks, warnings);
    out.exit_code = 2;
    return out;
  }

  TwoSidedSystem ts;
  ts.base = cfg.base;
  ts.history_depth = cfg.k.depth;
  ts.action_reads_future = cfg.k.action_reads_future;

  KDecompositionReport krep = decompose_k(ts, cfg.fiber, cfg.action,
                                          cfg.numeric.tolerance,
                                          cfg.numeric.max_power);
  ProductSystem q = build_product(krep.quotient.base, cfg.fiber, cfg.action);
  if (cfg.hooks.corrupt_atoms) {
    corrupt_atoms(q, krep.report);
    warnings.push_back("test hook corrupt_atoms is active");
  }

  checks.push_back(krep.quotient.wellposed);
  checks.push_back(check_filtration_inclusions(ts, &cfg.fiber, &cfg.action));
  checks.push_back(verify_theorem_invariants(q, krep.report));
  checks.push_back(project_atoms(q, krep.report));
  checks.push_back(
      check_projection_identity(q, kProjectionTrials, cfg.seed));
  checks.push_back(check_measure_preservation(q));

  nlohmann::json body = k_report_to_json(q, krep, cfg.k.depth);

  RunResult out;
  out.report = assemble(cfg, make_header(cfg), std::move(body), checks,
                        warnings);
  for (const CheckReport& c : checks)
    if (!c.all_passed()) out.exit_code = 2;
  return out;
}

inline RunResult run_lorentz(const RunConfig& cfg) {
  validate_geometry(cfg.lorentz.geometry);

  EnsembleParams params;
  params.trajectories = cfg.lorentz.trajectories;
  params.collisions = cfg.lorentz.collisions;
  params.seed = cfg.seed;
  params.checkpoints = cfg.lorentz.checkpoints;
  params.threads = cfg.lorentz.threads;

  EnsembleStats stats = run_ensemble(cfg.lorentz.geometry, params);

  std::vector<std::string> warnings;
  if (stats.resample_warning) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", stats.resample_rate);
    warnings.push_back(std::string("resample rate ") + buf +
                       " exceeds 0.01; statistics may be biased");
  }

  nlohmann::json header = make_header(cfg);
  header["premise_note"] =
      "Mixing of the periodic dispersing billiard and ergodicity of its "
      "first-return maps are consumed from the literature, not proven here; "
      "this report verifies empirical surrogates only (drift, covariance "
      "growth, return statistics, per-scatterer visit counts).";

  if (!cfg.lorentz.csv_out.empty()) {
    std::ofstream csv(cfg.lorentz.csv_out);
    if (!csv)
      throw Error(ErrorKind::InvalidInput,
                  "cannot open csv output path '" + cfg.lorentz.csv_out + "'");
    write_displacement_csv(csv, stats);
  }

  RunResult out;
  out.report = assemble(cfg, std::move(header),
                        ensemble_to_json(cfg.lorentz.geometry, stats), {},
                        warnings);
  return out;
}

}  // namespace detail

/// Executes one parsed run end to end and returns the report. Decomposition
/// modes always embed the full verification suite; a failed check item turns
/// the exit code to 2 while still producing the complete report.
inline RunResult run(const RunConfig& cfg) {
  if (cfg.mode == "decompose") return detail::run_decompose(cfg);
  if (cfg.mode == "k-decompose") return detail::run_k_decompose(cfg);
  if (cfg.mode == "lorentz") return detail::run_lorentz(cfg);
  throw Error(ErrorKind::InvalidInput, "unknown mode '" + cfg.mode + "'");
}

}  // namespace tailatlas
