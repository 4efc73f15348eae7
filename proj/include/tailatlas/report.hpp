#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tailatlas/checks.hpp"
#include "tailatlas/decomposition.hpp"
#include "tailatlas/k_quotient.hpp"
#include "tailatlas/lorentz_ensemble.hpp"
#include "tailatlas/product_system.hpp"

namespace tailatlas {

// ---------------------------------------------------------------------------
// JSON views of the result types. Objects serialize with sorted keys and
// shortest round-trip numbers, so identical results give identical bytes.
// ---------------------------------------------------------------------------

inline nlohmann::json check_report_to_json(const CheckReport& rep) {
  nlohmann::json items = nlohmann::json::array();
  for (const CheckItem& it : rep.items) {
    nlohmann::json item;
    item["name"] = it.name;
    item["passed"] = it.passed;
    if (!it.detail.empty()) item["detail"] = it.detail;
    items.push_back(item);
  }
  return {{"title", rep.title}, {"passed", rep.all_passed()}, {"items", items}};
}

namespace detail {

/// Decodes a product node to ["cell name", fiber label]; the label is an
/// integer for finite fibers and the window point for lattice fibers.
inline nlohmann::json node_to_json(const ProductSystem& p, int node) {
  nlohmann::json out = nlohmann::json::array();
  out.push_back(p.base.cells[p.cell_of(node)]);
  if (p.fiber.kind == FiberKind::Finite) {
    out.push_back(p.fiber_of(node));
  } else {
    const FiberVec& v = p.window_points[p.fiber_of(node)];
    nlohmann::json jv = nlohmann::json::array();
    for (int j = 0; j < p.fiber.dimension; ++j) jv.push_back(v[j]);
    out.push_back(jv);
  }
  return out;
}

inline nlohmann::json fiber_vec_to_json(const FiberVec& v, int dim) {
  nlohmann::json out = nlohmann::json::array();
  for (int j = 0; j < dim; ++j) out.push_back(v[j]);
  return out;
}

}  // namespace detail

inline nlohmann::json decomposition_to_json(const ProductSystem& p,
                                            const DecompositionReport& rep) {
  nlohmann::json out;

  nlohmann::json comps = nlohmann::json::array();
  for (const Component& comp : rep.components) {
    nlohmann::json jc;
    jc["kind"] = to_string(comp.kind);
    jc["period"] = comp.period;
    if (comp.n_e < 0)
      jc["n_e"] = "infinity";
    else
      jc["n_e"] = comp.n_e;
    jc["conservative"] = comp.conservative;
    jc["conservativity_rule"] = comp.conservativity_rule;
    jc["base_class"] = comp.base_class;

    if (comp.lattice) {
      nlohmann::json drift = nlohmann::json::array();
      for (const Rat& r : comp.drift) drift.push_back(format_rational(r));
      jc["drift"] = drift;
      nlohmann::json sub = nlohmann::json::array();
      for (const FiberVec& v : comp.coset_subgroup)
        sub.push_back(detail::fiber_vec_to_json(v, p.fiber.dimension));
      jc["coset_subgroup"] = sub;
      if (comp.translation_family) {
        jc["translation_family"] = true;
        nlohmann::json fam = nlohmann::json::array();
        for (const FiberVec& v : comp.family_basis)
          fam.push_back(detail::fiber_vec_to_json(v, p.fiber.dimension));
        jc["family_basis"] = fam;
      }
    }

    nlohmann::json atoms = nlohmann::json::array();
    for (const Atom& a : comp.atoms) {
      nlohmann::json ja;
      nlohmann::json states = nlohmann::json::array();
      for (int s : a.states) states.push_back(detail::node_to_json(p, s));
      ja["states"] = states;
      if (a.n_p < 0)
        ja["n_p"] = "infinity";
      else
        ja["n_p"] = a.n_p;
      if (a.measure_finite) {
        ja["measure"] = format_rational(a.measure);
      } else {
        ja["measure"] = "infinity";
        if (a.base_atom >= 0)
          ja["per_level_measure"] =
              format_rational(rep.base_atoms[a.base_atom].measure);
      }
      ja["base_atom"] = a.base_atom;
      if (comp.kind == ComponentKind::Chain) ja["position"] = a.chain_position;
      atoms.push_back(ja);
    }
    jc["atoms"] = atoms;
    comps.push_back(jc);
  }
  out["components"] = comps;

  nlohmann::json bas = nlohmann::json::array();
  for (const BaseAtom& b : rep.base_atoms) {
    nlohmann::json jb;
    jb["closed_class"] = b.closed_class;
    jb["cyclic_index"] = b.cyclic_index;
    nlohmann::json cells = nlohmann::json::array();
    for (int c : b.cells) cells.push_back(p.base.cells[c]);
    jb["cells"] = cells;
    jb["measure"] = format_rational(b.measure);
    bas.push_back(jb);
  }
  out["base_atoms"] = bas;

  nlohmann::json trans = nlohmann::json::array();
  for (int c : rep.transient_cells) trans.push_back(p.base.cells[c]);
  out["transient_cells"] = trans;

  if (!rep.suppressed_states.empty() || rep.suppressed_components > 0) {
    nlohmann::json sup = nlohmann::json::array();
    for (int s : rep.suppressed_states) sup.push_back(detail::node_to_json(p, s));
    out["suppressed_states"] = sup;
    out["suppressed_components"] = rep.suppressed_components;
  }
  return out;
}

inline nlohmann::json certificates_to_json(
    const std::vector<ExactnessCertificate>& certs) {
  nlohmann::json out = nlohmann::json::array();
  for (const ExactnessCertificate& c : certs) {
    nlohmann::json jc;
    jc["component"] = c.component;
    jc["atom"] = c.atom;
    jc["method"] = c.method;
    jc["primitive"] = c.primitive;
    jc["n"] = c.power;
    jc["norm"] = c.norm;
    out.push_back(jc);
  }
  return out;
}

/// Body of a k-mode report: the quotient summary, the quotient decomposition,
/// and the lift back to the bounded-memory model. `q` must be the product
/// system of the quotient the decomposition ran on.
inline nlohmann::json k_report_to_json(const ProductSystem& q,
                                       const KDecompositionReport& krep,
                                       int depth) {
  nlohmann::json out;
  out["quotient"] = {{"depth", depth},
                     {"class_count", q.base.size()},
                     {"word_count", krep.quotient.word_count}};
  out["decomposition"] = decomposition_to_json(q, krep.report);
  out["certificates"] = certificates_to_json(krep.certificates);
  out["lifted_counts"] = krep.lifted_counts;
  out["k_mixing"] = krep.k_mixing;
  return out;
}

inline nlohmann::json ensemble_to_json(const LorentzConfig& cfg,
                                       const EnsembleStats& stats) {
  nlohmann::json out;
  out["geometry"] = to_string(cfg.kind);
  out["trajectories"] = stats.trajectories;
  out["collisions"] = stats.collisions;
  out["displacement_dim"] = stats.dim;
  out["checkpoints"] = stats.checkpoints;
  out["drift_mean"] = stats.drift_mean;
  out["drift_se"] = stats.drift_se;
  out["covariance"] = stats.covariance;
  out["return_fraction"] = stats.return_fraction;

  nlohmann::json hist = nlohmann::json::array();
  for (const auto& kv : stats.cell_histogram)
    hist.push_back({{"cell", {kv.first[0], kv.first[1]}},
                    {"count", kv.second}});
  out["final_cell_histogram"] = hist;

  out["scatterer_visits"] = stats.scatterer_visits;
  out["tangency_resamples"] = stats.tangency_resamples;
  out["grazing_resamples"] = stats.grazing_resamples;
  out["horizon_escapes"] = stats.horizon_escapes;
  out["resample_rate"] = stats.resample_rate;
  return out;
}

}  // namespace tailatlas
