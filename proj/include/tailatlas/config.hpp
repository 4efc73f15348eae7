#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailatlas/errors.hpp"
#include "tailatlas/fiber_extension.hpp"
#include "tailatlas/lorentz_geometry.hpp"
#include "tailatlas/rational.hpp"
#include "tailatlas/symbolic_base.hpp"
#include "tailatlas/version.hpp"

namespace tailatlas {

// ---------------------------------------------------------------------------
// Run description
// ---------------------------------------------------------------------------

inline constexpr int kSchemaVersion = 1;

struct NumericConfig {
  double tolerance = 1e-9;
  long long max_power = 10000;
  int window = 6;  // lattice fiber window L
};

struct KConfig {
  int depth = 1;
  bool action_reads_future = false;
};

struct LorentzRun {
  LorentzConfig geometry;
  long long trajectories = 1000;
  long long collisions = 1000;
  std::vector<long long> checkpoints;  // resolved at parse time
  int threads = 1;                     // execution knob, not part of the digest
  std::string csv_out;                 // optional displacement table path
};

struct TestHooks {
  bool corrupt_atoms = false;  // damage the computed atoms before the checks
};

/// Everything one invocation needs. Exactly one of the mode-specific parts is
/// populated, selected by `mode`.
struct RunConfig {
  std::string mode;  // "decompose", "k-decompose" or "lorentz"
  std::uint64_t seed = 0;
  NumericConfig numeric;

  SymbolicBaseSystem base;
  bool has_realization = false;
  PiecewiseLinearRealization realization;
  FiberSet fiber;
  FiberAction action;

  KConfig k;
  LorentzRun lorentz;
  TestHooks hooks;
};

// ---------------------------------------------------------------------------
// Strict parsing: every violation carries the JSON path of the offending
// value, and unknown keys are rejected rather than ignored.
// ---------------------------------------------------------------------------

namespace detail {

using nlohmann::json;

struct SchemaErrors {
  std::vector<std::string> items;

  void add(const std::string& path, const std::string& message) {
    items.push_back(path + ": " + message);
  }

  void raise_if_any() const {
    if (items.empty()) return;
    std::string joined;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) joined += "; ";
      joined += items[i];
    }
    throw Error(ErrorKind::InvalidInput, joined);
  }
};

inline bool expect_object(const json& j, const std::string& path,
                          SchemaErrors& errs) {
  if (j.is_object()) return true;
  errs.add(path, "expected an object");
  return false;
}

inline void reject_unknown_keys(const json& obj, const std::string& path,
                                const std::set<std::string>& allowed,
                                SchemaErrors& errs) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) errs.add(path + "." + it.key(), "unknown key");
}

inline std::optional<bool> get_bool(const json& obj, const std::string& path,
                                    const std::string& key, SchemaErrors& errs) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (!v.is_boolean()) {
    errs.add(path + "." + key, "expected a boolean");
    return std::nullopt;
  }
  return v.get<bool>();
}

inline std::optional<std::string> get_string(const json& obj,
                                             const std::string& path,
                                             const std::string& key,
                                             SchemaErrors& errs) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (!v.is_string()) {
    errs.add(path + "." + key, "expected a string");
    return std::nullopt;
  }
  return v.get<std::string>();
}

inline std::optional<long long> get_integer(const json& obj,
                                            const std::string& path,
                                            const std::string& key,
                                            long long lo, long long hi,
                                            SchemaErrors& errs) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    errs.add(path + "." + key, "expected an integer");
    return std::nullopt;
  }
  long long x = v.get<long long>();
  if (x < lo || x > hi) {
    errs.add(path + "." + key, "value " + std::to_string(x) + " outside [" +
                                   std::to_string(lo) + ", " + std::to_string(hi) +
                                   "]");
    return std::nullopt;
  }
  return x;
}

inline std::optional<std::uint64_t> get_u64(const json& obj,
                                            const std::string& path,
                                            const std::string& key,
                                            SchemaErrors& errs) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (!(v.is_number_unsigned() ||
        (v.is_number_integer() && v.get<long long>() >= 0))) {
    errs.add(path + "." + key, "expected a nonnegative integer");
    return std::nullopt;
  }
  return v.get<std::uint64_t>();
}

inline std::optional<double> get_double(const json& obj, const std::string& path,
                                        const std::string& key, bool positive,
                                        SchemaErrors& errs) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (!v.is_number()) {
    errs.add(path + "." + key, "expected a number");
    return std::nullopt;
  }
  double x = v.get<double>();
  if (positive && !(x > 0.0)) {
    errs.add(path + "." + key, "expected a positive number");
    return std::nullopt;
  }
  return x;
}

inline std::optional<Rat> get_rational(const json& v, const std::string& path,
                                       SchemaErrors& errs) {
  if (v.is_number_integer()) return Rat(v.get<long long>());
  if (!v.is_string()) {
    errs.add(path, "expected a rational as a \"p/q\" string");
    return std::nullopt;
  }
  try {
    return parse_rational(v.get<std::string>(), path);
  } catch (const Error& e) {
    errs.items.push_back(e.what());
    return std::nullopt;
  }
}

// ---- base block -----------------------------------------------------------

inline void parse_base_block(const json& obj, RunConfig& cfg,
                             SchemaErrors& errs) {
  const std::string path = ".base";
  if (!expect_object(obj, path, errs)) return;
  reject_unknown_keys(
      obj, path, {"cells", "lengths", "transition", "measure_preserving",
                  "realization"},
      errs);

  SymbolicBaseSystem& base = cfg.base;

  if (!obj.contains("lengths") || !obj.at("lengths").is_array() ||
      obj.at("lengths").empty()) {
    errs.add(path + ".lengths", "expected a nonempty array of rationals");
    return;
  }
  const json& lengths = obj.at("lengths");
  const int n = static_cast<int>(lengths.size());
  for (int c = 0; c < n; ++c) {
    auto r = get_rational(lengths[c], path + ".lengths[" + std::to_string(c) + "]",
                          errs);
    base.cell_measure.push_back(r.value_or(Rat(0)));
  }

  if (obj.contains("cells")) {
    const json& cells = obj.at("cells");
    if (!cells.is_array() || static_cast<int>(cells.size()) != n) {
      errs.add(path + ".cells",
               "expected an array of " + std::to_string(n) + " names");
    } else {
      for (int c = 0; c < n; ++c) {
        if (!cells[c].is_string()) {
          errs.add(path + ".cells[" + std::to_string(c) + "]",
                   "expected a string");
          base.cells.push_back("c" + std::to_string(c));
        } else {
          base.cells.push_back(cells[c].get<std::string>());
        }
      }
    }
  }
  if (base.cells.empty())
    for (int c = 0; c < n; ++c) base.cells.push_back("c" + std::to_string(c));

  if (!obj.contains("transition") || !obj.at("transition").is_array() ||
      static_cast<int>(obj.at("transition").size()) != n) {
    errs.add(path + ".transition",
             "expected an array of " + std::to_string(n) + " rows");
    return;
  }
  const json& rows = obj.at("transition");
  for (int c = 0; c < n; ++c) {
    const std::string rpath = path + ".transition[" + std::to_string(c) + "]";
    std::vector<Rat> row;
    if (!rows[c].is_array() || static_cast<int>(rows[c].size()) != n) {
      errs.add(rpath, "expected " + std::to_string(n) + " entries");
      row.assign(n, Rat(0));
    } else {
      Rat sum = 0;
      bool parsed = true;
      for (int d = 0; d < n; ++d) {
        auto r = get_rational(rows[c][d], rpath + "[" + std::to_string(d) + "]",
                              errs);
        if (!r) parsed = false;
        Rat v = r.value_or(Rat(0));
        if (v < 0) errs.add(rpath + "[" + std::to_string(d) + "]", "negative entry");
        row.push_back(v);
        sum += v;
      }
      if (parsed && sum != 1)
        errs.add(rpath, "sums to " + format_rational(sum) + ", expected 1");
    }
    base.transition.push_back(std::move(row));
  }

  if (auto mp = get_bool(obj, path, "measure_preserving", errs)) {
    base.measure_preserving = *mp;
  } else if (!obj.contains("measure_preserving")) {
    // Absent: detect exactly whether the weights push the measure to itself.
    bool stationary = true;
    for (int d = 0; d < n && stationary; ++d) {
      Rat pushed = 0;
      for (int c = 0; c < n; ++c)
        pushed += base.cell_measure[c] * base.transition[c][d];
      stationary = pushed == base.cell_measure[d];
    }
    base.measure_preserving = stationary;
  }

  if (obj.contains("realization")) {
    const json& rz = obj.at("realization");
    const std::string zpath = path + ".realization";
    if (!expect_object(rz, zpath, errs)) return;
    reject_unknown_keys(rz, zpath, {"breakpoints", "branch_image"}, errs);
    PiecewiseLinearRealization& real = cfg.realization;
    if (!rz.contains("breakpoints") || !rz.at("breakpoints").is_array() ||
        static_cast<int>(rz.at("breakpoints").size()) != n + 1) {
      errs.add(zpath + ".breakpoints",
               "expected " + std::to_string(n + 1) + " rationals");
      return;
    }
    for (int i = 0; i <= n; ++i) {
      auto r = get_rational(rz.at("breakpoints")[i],
                            zpath + ".breakpoints[" + std::to_string(i) + "]",
                            errs);
      real.breakpoints.push_back(r.value_or(Rat(0)));
    }
    if (!rz.contains("branch_image") || !rz.at("branch_image").is_array() ||
        static_cast<int>(rz.at("branch_image").size()) != n) {
      errs.add(zpath + ".branch_image",
               "expected " + std::to_string(n) + " [first, last] pairs");
      return;
    }
    for (int c = 0; c < n; ++c) {
      const json& pr = rz.at("branch_image")[c];
      const std::string ppath = zpath + ".branch_image[" + std::to_string(c) + "]";
      if (!pr.is_array() || pr.size() != 2 || !pr[0].is_number_integer() ||
          !pr[1].is_number_integer()) {
        errs.add(ppath, "expected a pair of cell indices");
        real.branch_image.push_back({0, 0});
        continue;
      }
      int first = pr[0].get<int>();
      int last = pr[1].get<int>();
      if (first < 0 || last >= n || first > last)
        errs.add(ppath, "cell index range out of bounds");
      real.branch_image.push_back({first, last});
    }
    cfg.has_realization = true;
  }
}

// ---- fiber block ----------------------------------------------------------

inline void parse_fiber_block(const json& obj, RunConfig& cfg,
                              SchemaErrors& errs) {
  const std::string path = ".fiber";
  if (!expect_object(obj, path, errs)) return;
  reject_unknown_keys(
      obj, path, {"kind", "mode", "size", "maps", "dimension", "displacements"},
      errs);

  const int n_cells = cfg.base.size();
  FiberSet& fiber = cfg.fiber;
  FiberAction& action = cfg.action;

  auto kind = get_string(obj, path, "kind", errs);
  if (!kind) {
    errs.add(path + ".kind", "required, \"finite\" or \"lattice\"");
    return;
  }
  if (*kind == "finite") {
    fiber.kind = FiberKind::Finite;
  } else if (*kind == "lattice") {
    fiber.kind = FiberKind::Lattice;
  } else {
    errs.add(path + ".kind", "expected \"finite\" or \"lattice\", got \"" +
                                 *kind + "\"");
    return;
  }

  if (fiber.kind == FiberKind::Finite) {
    for (const char* key : {"dimension", "displacements"})
      if (obj.contains(key))
        errs.add(path + "." + std::string(key), "not valid for a finite fiber");
    auto size = get_integer(obj, path, "size", 1, 4096, errs);
    if (!size) {
      errs.add(path + ".size", "required for a finite fiber");
      return;
    }
    fiber.size = static_cast<int>(*size);

    auto mode = get_string(obj, path, "mode", errs);
    if (!mode) {
      errs.add(path + ".mode", "required, \"bijective\" or \"surjective\"");
    } else if (*mode == "bijective") {
      action.mode = ActionMode::Bijective;
    } else if (*mode == "surjective") {
      action.mode = ActionMode::Surjective;
    } else {
      errs.add(path + ".mode", "expected \"bijective\" or \"surjective\", got \"" +
                                   *mode + "\"");
    }

    if (!obj.contains("maps") || !obj.at("maps").is_array() ||
        (n_cells > 0 && static_cast<int>(obj.at("maps").size()) != n_cells)) {
      errs.add(path + ".maps", "expected " + std::to_string(n_cells) +
                                   " rows, one per base cell");
      return;
    }
    for (std::size_t c = 0; c < obj.at("maps").size(); ++c) {
      const json& row = obj.at("maps")[c];
      const std::string rpath = path + ".maps[" + std::to_string(c) + "]";
      std::vector<int> m;
      if (!row.is_array() || static_cast<int>(row.size()) != fiber.size) {
        errs.add(rpath, "expected " + std::to_string(fiber.size) + " entries");
        m.assign(fiber.size, 0);
      } else {
        for (std::size_t i = 0; i < row.size(); ++i) {
          if (!row[i].is_number_integer()) {
            errs.add(rpath + "[" + std::to_string(i) + "]", "expected an integer");
            m.push_back(0);
            continue;
          }
          int v = row[i].get<int>();
          if (v < 0 || v >= fiber.size) {
            errs.add(rpath + "[" + std::to_string(i) + "]",
                     "fiber index " + std::to_string(v) + " outside [0, " +
                         std::to_string(fiber.size - 1) + "]");
            v = 0;
          }
          m.push_back(v);
        }
      }
      action.maps.push_back(std::move(m));
    }
  } else {
    for (const char* key : {"size", "maps"})
      if (obj.contains(key))
        errs.add(path + "." + std::string(key), "not valid for a lattice fiber");
    if (auto mode = get_string(obj, path, "mode", errs)) {
      if (*mode != "bijective")
        errs.add(path + ".mode", "lattice translations are bijective");
    }
    action.mode = ActionMode::Bijective;

    auto dim = get_integer(obj, path, "dimension", 1, 3, errs);
    if (!dim) {
      errs.add(path + ".dimension", "required for a lattice fiber, 1 to 3");
      return;
    }
    fiber.dimension = static_cast<int>(*dim);
    fiber.window = cfg.numeric.window;

    if (!obj.contains("displacements") || !obj.at("displacements").is_array() ||
        (n_cells > 0 &&
         static_cast<int>(obj.at("displacements").size()) != n_cells)) {
      errs.add(path + ".displacements", "expected " + std::to_string(n_cells) +
                                            " vectors, one per base cell");
      return;
    }
    for (std::size_t c = 0; c < obj.at("displacements").size(); ++c) {
      const json& row = obj.at("displacements")[c];
      const std::string rpath = path + ".displacements[" + std::to_string(c) + "]";
      FiberVec v = fiber_vec();
      if (!row.is_array() || static_cast<int>(row.size()) != fiber.dimension) {
        errs.add(rpath,
                 "expected " + std::to_string(fiber.dimension) + " integers");
      } else {
        for (int j = 0; j < fiber.dimension; ++j) {
          if (!row[j].is_number_integer()) {
            errs.add(rpath + "[" + std::to_string(j) + "]", "expected an integer");
          } else {
            v[j] = row[j].get<std::int64_t>();
          }
        }
      }
      action.displacements.push_back(v);
    }
  }
}

// ---- lorentz block --------------------------------------------------------

inline void parse_lorentz_block(const json& obj, RunConfig& cfg,
                                SchemaErrors& errs) {
  const std::string path = ".lorentz";
  if (!expect_object(obj, path, errs)) return;
  reject_unknown_keys(obj, path,
                      {"preset", "geometry", "basis", "width", "scatterers",
                       "horizon_cells", "tangency_tol", "reversal_tol",
                       "trajectories", "collisions", "checkpoints", "threads",
                       "csv_out"},
                      errs);

  LorentzRun& lr = cfg.lorentz;

  const bool has_preset = obj.contains("preset");
  const bool has_explicit = obj.contains("geometry") || obj.contains("basis") ||
                            obj.contains("width") || obj.contains("scatterers");
  if (has_preset && has_explicit) {
    errs.add(path, "preset and explicit geometry are mutually exclusive");
    return;
  }

  if (has_preset) {
    auto name = get_string(obj, path, "preset", errs);
    if (name) {
      try {
        lr.geometry = make_lorentz_preset(*name);
      } catch (const Error&) {
        std::string known;
        for (const std::string& p : lorentz_preset_names()) {
          if (!known.empty()) known += ", ";
          known += p;
        }
        errs.add(path + ".preset", "unknown preset \"" + *name +
                                       "\"; known presets: " + known);
        return;
      }
    }
  } else if (has_explicit) {
    auto geom = get_string(obj, path, "geometry", errs);
    if (!geom) {
      errs.add(path + ".geometry",
               "required, \"plane\", \"tube\" or \"hardwall-tube\"");
      return;
    }
    if (*geom == "plane") {
      lr.geometry.kind = GeometryKind::Plane;
    } else if (*geom == "tube") {
      lr.geometry.kind = GeometryKind::Tube;
    } else if (*geom == "hardwall-tube") {
      lr.geometry.kind = GeometryKind::HardwallTube;
    } else {
      errs.add(path + ".geometry",
               "expected \"plane\", \"tube\" or \"hardwall-tube\", got \"" +
                   *geom + "\"");
      return;
    }

    if (lr.geometry.kind == GeometryKind::Plane) {
      if (obj.contains("width"))
        errs.add(path + ".width", "not valid for the plane geometry");
      if (obj.contains("basis")) {
        const json& b = obj.at("basis");
        if (!b.is_array() || b.size() != 2 || !b[0].is_array() ||
            b[0].size() != 2 || !b[1].is_array() || b[1].size() != 2 ||
            !b[0][0].is_number() || !b[0][1].is_number() ||
            !b[1][0].is_number() || !b[1][1].is_number()) {
          errs.add(path + ".basis", "expected two 2-vectors");
        } else {
          lr.geometry.basis[0] = {b[0][0].get<double>(), b[0][1].get<double>()};
          lr.geometry.basis[1] = {b[1][0].get<double>(), b[1][1].get<double>()};
        }
      }
    } else {
      if (obj.contains("basis"))
        errs.add(path + ".basis", "tube geometries fix the lattice to the x axis");
      auto w = get_double(obj, path, "width", true, errs);
      if (!w) {
        errs.add(path + ".width", "required for tube geometries");
      } else {
        lr.geometry.width = *w;
      }
    }

    if (!obj.contains("scatterers") || !obj.at("scatterers").is_array() ||
        obj.at("scatterers").empty()) {
      errs.add(path + ".scatterers", "expected a nonempty array");
      return;
    }
    for (std::size_t i = 0; i < obj.at("scatterers").size(); ++i) {
      const json& s = obj.at("scatterers")[i];
      const std::string spath = path + ".scatterers[" + std::to_string(i) + "]";
      if (!expect_object(s, spath, errs)) continue;
      reject_unknown_keys(s, spath, {"center", "radius"}, errs);
      Scatterer sc;
      if (!s.contains("center") || !s.at("center").is_array() ||
          s.at("center").size() != 2 || !s.at("center")[0].is_number() ||
          !s.at("center")[1].is_number()) {
        errs.add(spath + ".center", "expected [x, y]");
      } else {
        sc.center = {s.at("center")[0].get<double>(),
                     s.at("center")[1].get<double>()};
      }
      auto r = get_double(s, spath, "radius", true, errs);
      if (!r) {
        errs.add(spath + ".radius", "required, a positive number");
      } else {
        sc.radius = *r;
      }
      lr.geometry.scatterers.push_back(sc);
    }
  } else {
    errs.add(path, "either a preset name or an explicit geometry is required");
    return;
  }

  if (auto h = get_integer(obj, path, "horizon_cells", 1, 1000000, errs))
    lr.geometry.horizon_cells = *h;
  if (auto t = get_double(obj, path, "tangency_tol", true, errs))
    lr.geometry.tangency_tol = *t;
  if (auto t = get_double(obj, path, "reversal_tol", true, errs))
    lr.geometry.reversal_tol = *t;

  if (auto n = get_integer(obj, path, "trajectories", 1, 100000000, errs))
    lr.trajectories = *n;
  if (auto m = get_integer(obj, path, "collisions", 1, 1000000000, errs))
    lr.collisions = *m;
  if (auto t = get_integer(obj, path, "threads", 1, 256, errs))
    lr.threads = static_cast<int>(*t);
  if (auto p = get_string(obj, path, "csv_out", errs)) lr.csv_out = *p;

  if (obj.contains("checkpoints")) {
    const json& chk = obj.at("checkpoints");
    if (!chk.is_array() || chk.empty()) {
      errs.add(path + ".checkpoints", "expected a nonempty array of integers");
    } else {
      for (std::size_t i = 0; i < chk.size(); ++i) {
        const std::string cpath =
            path + ".checkpoints[" + std::to_string(i) + "]";
        if (!chk[i].is_number_integer()) {
          errs.add(cpath, "expected an integer");
          continue;
        }
        long long v = chk[i].get<long long>();
        if (v < 1 || v > lr.collisions) {
          errs.add(cpath, "checkpoint " + std::to_string(v) +
                              " outside [1, collisions]");
          continue;
        }
        if (!lr.checkpoints.empty() && v <= lr.checkpoints.back()) {
          errs.add(cpath, "checkpoints must be strictly increasing");
          continue;
        }
        lr.checkpoints.push_back(v);
      }
    }
  }
  if (lr.checkpoints.empty()) {
    for (int k = 1; k <= 10; ++k) {
      long long n = (lr.collisions * k) / 10;
      if (n >= 1 && (lr.checkpoints.empty() || n > lr.checkpoints.back()))
        lr.checkpoints.push_back(n);
    }
    if (lr.checkpoints.empty() || lr.checkpoints.back() != lr.collisions)
      lr.checkpoints.push_back(lr.collisions);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

/// Parses and validates a run description. Throws a single invalid-input
/// error listing every violation with its JSON path.
inline RunConfig parse_config(const nlohmann::json& j) {
  detail::SchemaErrors errs;
  RunConfig cfg;

  if (!j.is_object()) {
    errs.add(".", "expected a JSON object");
    errs.raise_if_any();
  }
  detail::reject_unknown_keys(j, "",
                              {"schema_version", "mode", "seed", "numeric",
                               "base", "fiber", "k", "lorentz", "test_hooks"},
                              errs);

  detail::get_integer(j, "", "schema_version", kSchemaVersion, kSchemaVersion,
                      errs);

  auto mode = detail::get_string(j, "", "mode", errs);
  if (!mode) {
    errs.add(".mode", "required, \"decompose\", \"k-decompose\" or \"lorentz\"");
    errs.raise_if_any();
  }
  cfg.mode = *mode;
  if (cfg.mode != "decompose" && cfg.mode != "k-decompose" &&
      cfg.mode != "lorentz") {
    errs.add(".mode", "expected \"decompose\", \"k-decompose\" or \"lorentz\", "
                      "got \"" + cfg.mode + "\"");
    errs.raise_if_any();
  }

  const bool has_base = j.contains("base");
  const bool has_fiber = j.contains("fiber");
  const bool has_k = j.contains("k");
  const bool has_lorentz = j.contains("lorentz");

  if ((has_base || has_fiber || has_k) && has_lorentz) {
    errs.add(".", "ambiguous mode: both decomposition and lorentz blocks present");
    errs.raise_if_any();
  }
  if (cfg.mode == "decompose" && has_k) {
    errs.add(".", "ambiguous mode: decompose config carries a k block");
    errs.raise_if_any();
  }

  if (auto seed = detail::get_u64(j, "", "seed", errs)) cfg.seed = *seed;

  if (j.contains("numeric")) {
    const nlohmann::json& num = j.at("numeric");
    if (detail::expect_object(num, ".numeric", errs)) {
      detail::reject_unknown_keys(num, ".numeric",
                                  {"tolerance", "max_power", "window"}, errs);
      if (auto t = detail::get_double(num, ".numeric", "tolerance", true, errs))
        cfg.numeric.tolerance = *t;
      if (auto p = detail::get_integer(num, ".numeric", "max_power", 1,
                                       100000000, errs))
        cfg.numeric.max_power = *p;
      if (auto w = detail::get_integer(num, ".numeric", "window", 1, 64, errs))
        cfg.numeric.window = static_cast<int>(*w);
    }
  }

  if (cfg.mode == "decompose" || cfg.mode == "k-decompose") {
    if (!has_base)
      errs.add(".base", "required for mode " + cfg.mode);
    else
      detail::parse_base_block(j.at("base"), cfg, errs);
    if (!has_fiber)
      errs.add(".fiber", "required for mode " + cfg.mode);
    else
      detail::parse_fiber_block(j.at("fiber"), cfg, errs);
  }

  if (cfg.mode == "k-decompose") {
    if (!has_k) {
      errs.add(".k", "required for mode k-decompose");
    } else if (detail::expect_object(j.at("k"), ".k", errs)) {
      const nlohmann::json& k = j.at("k");
      detail::reject_unknown_keys(k, ".k", {"depth", "action_reads_future"},
                                  errs);
      auto depth = detail::get_integer(k, ".k", "depth", 1, 12, errs);
      if (!depth)
        errs.add(".k.depth", "required, 1 to 12");
      else
        cfg.k.depth = static_cast<int>(*depth);
      if (auto f = detail::get_bool(k, ".k", "action_reads_future", errs))
        cfg.k.action_reads_future = *f;
    }
  }

  if (cfg.mode == "lorentz") {
    if (!has_lorentz)
      errs.add(".lorentz", "required for mode lorentz");
    else
      detail::parse_lorentz_block(j.at("lorentz"), cfg, errs);
  }

  if (j.contains("test_hooks")) {
    const nlohmann::json& th = j.at("test_hooks");
    if (detail::expect_object(th, ".test_hooks", errs)) {
      detail::reject_unknown_keys(th, ".test_hooks", {"corrupt_atoms"}, errs);
      if (auto c = detail::get_bool(th, ".test_hooks", "corrupt_atoms", errs))
        cfg.hooks.corrupt_atoms = *c;
    }
  }

  // Guard the lattice window enumeration before anything tries to build it.
  if (cfg.fiber.kind == FiberKind::Lattice && cfg.fiber.dimension > 0) {
    long long pts = 1;
    for (int d = 0; d < cfg.fiber.dimension; ++d)
      pts *= 2LL * cfg.fiber.window + 1;
    if (pts * std::max(1, cfg.base.size()) > 2000000)
      errs.add(".numeric.window", "window too large for dimension " +
                                      std::to_string(cfg.fiber.dimension));
  }

  errs.raise_if_any();
  return cfg;
}

/// Parses a config from raw JSON text.
inline RunConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, std::string("config is not JSON: ") +
                                             e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Canonical form and digest
// ---------------------------------------------------------------------------

/// Rebuilds the config as a fully materialized JSON document: defaults filled
/// in, presets expanded, names assigned, rationals normalized, keys sorted.
/// Execution knobs that do not affect results (threads, output paths) are
/// omitted, so two configs describing the same experiment canonicalize and
/// digest identically. Parsing the canonical form reproduces it byte for byte.
inline nlohmann::json canonical_config(const RunConfig& cfg) {
  nlohmann::json out;
  out["schema_version"] = kSchemaVersion;
  out["mode"] = cfg.mode;
  out["seed"] = cfg.seed;
  out["numeric"] = {{"tolerance", cfg.numeric.tolerance},
                    {"max_power", cfg.numeric.max_power},
                    {"window", cfg.numeric.window}};

  if (cfg.mode == "decompose" || cfg.mode == "k-decompose") {
    nlohmann::json base;
    base["cells"] = cfg.base.cells;
    nlohmann::json lengths = nlohmann::json::array();
    for (const Rat& r : cfg.base.cell_measure)
      lengths.push_back(format_rational(r));
    base["lengths"] = lengths;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : cfg.base.transition) {
      nlohmann::json jrow = nlohmann::json::array();
      for (const Rat& r : row) jrow.push_back(format_rational(r));
      rows.push_back(jrow);
    }
    base["transition"] = rows;
    base["measure_preserving"] = cfg.base.measure_preserving;
    if (cfg.has_realization) {
      nlohmann::json rz;
      nlohmann::json bps = nlohmann::json::array();
      for (const Rat& r : cfg.realization.breakpoints)
        bps.push_back(format_rational(r));
      rz["breakpoints"] = bps;
      nlohmann::json bi = nlohmann::json::array();
      for (const auto& pr : cfg.realization.branch_image)
        bi.push_back({pr.first, pr.second});
      rz["branch_image"] = bi;
      base["realization"] = rz;
    }
    out["base"] = base;

    nlohmann::json fiber;
    if (cfg.fiber.kind == FiberKind::Finite) {
      fiber["kind"] = "finite";
      fiber["size"] = cfg.fiber.size;
      fiber["mode"] =
          cfg.action.mode == ActionMode::Bijective ? "bijective" : "surjective";
      fiber["maps"] = cfg.action.maps;
    } else {
      fiber["kind"] = "lattice";
      fiber["dimension"] = cfg.fiber.dimension;
      nlohmann::json disp = nlohmann::json::array();
      for (const FiberVec& v : cfg.action.displacements) {
        nlohmann::json jv = nlohmann::json::array();
        for (int j = 0; j < cfg.fiber.dimension; ++j) jv.push_back(v[j]);
        disp.push_back(jv);
      }
      fiber["displacements"] = disp;
    }
    out["fiber"] = fiber;
  }

  if (cfg.mode == "k-decompose")
    out["k"] = {{"depth", cfg.k.depth},
                {"action_reads_future", cfg.k.action_reads_future}};

  if (cfg.mode == "lorentz") {
    nlohmann::json lz;
    lz["geometry"] = to_string(cfg.lorentz.geometry.kind);
    if (cfg.lorentz.geometry.kind == GeometryKind::Plane) {
      lz["basis"] = {{cfg.lorentz.geometry.basis[0].x,
                      cfg.lorentz.geometry.basis[0].y},
                     {cfg.lorentz.geometry.basis[1].x,
                      cfg.lorentz.geometry.basis[1].y}};
    } else {
      lz["width"] = cfg.lorentz.geometry.width;
    }
    nlohmann::json scats = nlohmann::json::array();
    for (const Scatterer& s : cfg.lorentz.geometry.scatterers)
      scats.push_back({{"center", {s.center.x, s.center.y}},
                       {"radius", s.radius}});
    lz["scatterers"] = scats;
    lz["horizon_cells"] = cfg.lorentz.geometry.horizon_cells;
    lz["tangency_tol"] = cfg.lorentz.geometry.tangency_tol;
    lz["reversal_tol"] = cfg.lorentz.geometry.reversal_tol;
    lz["trajectories"] = cfg.lorentz.trajectories;
    lz["collisions"] = cfg.lorentz.collisions;
    lz["checkpoints"] = cfg.lorentz.checkpoints;
    out["lorentz"] = lz;
  }

  if (cfg.hooks.corrupt_atoms) out["test_hooks"] = {{"corrupt_atoms", true}};
  return out;
}

/// FNV-1a 64-bit digest of the canonical serialization, as 16 hex digits.
inline std::string config_digest(const RunConfig& cfg) {
  std::string s = canonical_config(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace tailatlas
