#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tailatlas/lorentz_geometry.hpp"
#include "tailatlas/rng.hpp"

namespace tailatlas {

namespace detail {

/// Compensated accumulator; the ensemble reduction runs in a fixed
/// trajectory order so sums are identical for every thread count.
struct KahanSum {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double value() const { return s; }
};

/// Accessible boundary arc of a scatterer as [lo, lo + span). Wall-centered
/// disks expose only the half circle facing the channel.
inline std::pair<double, double> accessible_arc(const Scatterer& s,
                                                const LorentzConfig& cfg) {
  if (cfg.kind == GeometryKind::HardwallTube) {
    double hw = cfg.width / 2.0;
    if (std::fabs(s.center.y + hw) < 1e-12) return {0.0, kPi};
    if (std::fabs(s.center.y - hw) < 1e-12) return {kPi, kPi};
  }
  return {0.0, 2.0 * kPi};
}

}  // namespace detail

/// Draws a line element from the collision-invariant measure
/// (v . n) dq dv: scatterer proportional to accessible arc length, boundary
/// angle uniform on that arc, and angle from the normal phi = arcsin(2u - 1),
/// which realizes the cosine law for the outgoing direction. The cell index
/// is the origin.
inline LineElement sample_invariant_measure(CounterRng& rng,
                                            const LorentzConfig& cfg) {
  std::vector<double> weight(cfg.scatterers.size());
  double total = 0.0;
  for (std::size_t i = 0; i < cfg.scatterers.size(); ++i) {
    auto arc = detail::accessible_arc(cfg.scatterers[i], cfg);
    weight[i] = arc.second * cfg.scatterers[i].radius;
    total += weight[i];
  }

  double pick = rng.next_double() * total;
  std::size_t chosen = 0;
  for (; chosen + 1 < weight.size(); ++chosen) {
    if (pick < weight[chosen]) break;
    pick -= weight[chosen];
  }

  auto arc = detail::accessible_arc(cfg.scatterers[chosen], cfg);
  double theta = arc.first + arc.second * rng.next_double();
  double phi = std::asin(2.0 * rng.next_double() - 1.0);
  double alpha = theta + phi;

  LineElement le;
  le.scatterer = static_cast<int>(chosen);
  le.cell = {0, 0};
  le.theta = theta;
  le.v = {std::cos(alpha), std::sin(alpha)};
  return le;
}

/// Per-trajectory record kept for the CSV table and the reductions.
struct TrajectoryStats {
  std::vector<std::array<long long, 2>> checkpoint_disp;
  std::vector<unsigned char> returned_by;  // per checkpoint
  long long first_return = 0;              // collision index, 0 when absent
  std::array<long long, 2> final_cell{{0, 0}};
  std::vector<long long> scatterer_visits;  // collisions per scatterer index
  long long tangency_discards = 0;
  long long grazing_discards = 0;
  long long horizon_discards = 0;
};

/// Runs one trajectory of `collisions` steps from a fresh invariant-measure
/// start. Singular events (tangency, grazing) and horizon escapes abandon
/// the attempt and redraw with the next substream; discards are counted.
inline TrajectoryStats run_one_trajectory(const LorentzConfig& cfg,
                                          std::uint64_t seed,
                                          std::uint64_t index,
                                          long long collisions,
                                          const std::vector<long long>& checkpoints) {
  TrajectoryStats out;
  for (std::uint64_t attempt = 0;; ++attempt) {
    if (attempt >= 10000)
      throw Error(ErrorKind::InvalidInput,
                  "trajectory " + std::to_string(index) +
                      " was discarded 10000 times; geometry is degenerate");
    CounterRng rng(seed, index, attempt);
    LineElement le = sample_invariant_measure(rng, cfg);
    std::vector<std::array<long long, 2>> disp;
    std::vector<unsigned char> returned;
    disp.reserve(checkpoints.size());
    returned.reserve(checkpoints.size());
    std::vector<long long> visits(cfg.scatterers.size(), 0);
    long long first_return = 0;
    std::size_t next_chk = 0;
    try {
      for (long long n = 1; n <= collisions; ++n) {
        CollisionEvent ev = billiard_step(le, cfg);
        le = ev.to;
        ++visits[static_cast<std::size_t>(le.scatterer)];
        if (first_return == 0 && le.cell[0] == 0 && le.cell[1] == 0)
          first_return = n;
        while (next_chk < checkpoints.size() && checkpoints[next_chk] == n) {
          disp.push_back(le.cell);
          returned.push_back(first_return != 0 ? 1 : 0);
          ++next_chk;
        }
      }
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::Tangency: ++out.tangency_discards; continue;
        case ErrorKind::Grazing: ++out.grazing_discards; continue;
        case ErrorKind::HorizonEscape: ++out.horizon_discards; continue;
        default: throw;
      }
    }
    out.checkpoint_disp = std::move(disp);
    out.returned_by = std::move(returned);
    out.first_return = first_return;
    out.final_cell = le.cell;
    out.scatterer_visits = std::move(visits);
    return out;
  }
}

struct EnsembleParams {
  long long trajectories = 1000;
  long long collisions = 1000;
  std::uint64_t seed = 0;
  std::vector<long long> checkpoints;  // empty: tenths of the collision count
  int threads = 1;
};

struct EnsembleStats {
  long long trajectories = 0;
  long long collisions = 0;
  int dim = 2;  // displacement components
  std::vector<long long> checkpoints;
  std::vector<double> drift_mean;  // displacement per collision, by component
  std::vector<double> drift_se;
  // Sample covariance of the checkpoint displacements, one dim x dim matrix
  // per checkpoint.
  std::vector<std::vector<std::vector<double>>> covariance;
  std::vector<double> return_fraction;
  std::vector<std::pair<std::array<long long, 2>, long long>> cell_histogram;
  std::vector<long long> scatterer_visits;  // totals across trajectories
  long long tangency_resamples = 0;
  long long grazing_resamples = 0;
  long long horizon_escapes = 0;
  double resample_rate = 0.0;
  bool resample_warning = false;
  std::vector<TrajectoryStats> per_trajectory;
};

inline std::vector<long long> default_checkpoints(long long collisions) {
  std::vector<long long> out;
  for (int k = 1; k <= 10; ++k) {
    long long n = (collisions * k) / 10;
    if (n >= 1 && (out.empty() || out.back() != n)) out.push_back(n);
  }
  if (out.empty() || out.back() != collisions) out.push_back(collisions);
  return out;
}

/// Simulates the ensemble. Trajectory i is a pure function of
/// (seed, i, attempt), results land in per-trajectory slots, and the
/// reduction runs in index order, so the statistics are byte-identical for
/// every thread count.
inline EnsembleStats run_ensemble(const LorentzConfig& cfg,
                                  const EnsembleParams& params) {
  validate_geometry(cfg);
  if (params.trajectories < 1 || params.collisions < 1)
    throw Error(ErrorKind::InvalidInput,
                "ensemble needs at least one trajectory and one collision");

  std::vector<long long> chk = params.checkpoints.empty()
                                   ? default_checkpoints(params.collisions)
                                   : params.checkpoints;
  for (std::size_t i = 0; i < chk.size(); ++i) {
    bool ordered = i == 0 || chk[i - 1] < chk[i];
    if (chk[i] < 1 || chk[i] > params.collisions || !ordered)
      throw Error(ErrorKind::InvalidInput,
                  "checkpoints must increase and stay within the collision "
                  "count");
  }
  if (chk.back() != params.collisions) chk.push_back(params.collisions);

  const long long n_traj = params.trajectories;
  std::vector<TrajectoryStats> slots(static_cast<std::size_t>(n_traj));

  int threads = params.threads;
  if (threads < 1) threads = 1;
  if (threads > n_traj) threads = static_cast<int>(n_traj);

  if (threads == 1) {
    for (long long i = 0; i < n_traj; ++i)
      slots[static_cast<std::size_t>(i)] = run_one_trajectory(
          cfg, params.seed, static_cast<std::uint64_t>(i), params.collisions,
          chk);
  } else {
    std::atomic<long long> cursor{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t]() {
        try {
          for (;;) {
            long long i = cursor.fetch_add(1);
            if (i >= n_traj) return;
            slots[static_cast<std::size_t>(i)] = run_one_trajectory(
                cfg, params.seed, static_cast<std::uint64_t>(i),
                params.collisions, chk);
          }
        } catch (...) {
          failures[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& f : failures)
      if (f) std::rethrow_exception(f);
  }

  EnsembleStats stats;
  stats.trajectories = n_traj;
  stats.collisions = params.collisions;
  stats.dim = displacement_dim(cfg.kind);
  stats.checkpoints = chk;

  const int dim = stats.dim;
  const double n_d = static_cast<double>(n_traj);

  // Drift of the full-length displacement, scaled per collision.
  for (int j = 0; j < dim; ++j) {
    detail::KahanSum mean;
    for (const auto& s : slots)
      mean.add(static_cast<double>(s.checkpoint_disp.back()[j]) /
               static_cast<double>(params.collisions));
    double mu = mean.value() / n_d;
    detail::KahanSum var;
    for (const auto& s : slots) {
      double x = static_cast<double>(s.checkpoint_disp.back()[j]) /
                     static_cast<double>(params.collisions) -
                 mu;
      var.add(x * x);
    }
    stats.drift_mean.push_back(mu);
    double sd2 = n_traj > 1 ? var.value() / (n_d - 1.0) : 0.0;
    stats.drift_se.push_back(std::sqrt(sd2 / n_d));
  }

  for (std::size_t c = 0; c < chk.size(); ++c) {
    std::vector<double> mu(dim, 0.0);
    for (int j = 0; j < dim; ++j) {
      detail::KahanSum sum;
      for (const auto& s : slots)
        sum.add(static_cast<double>(s.checkpoint_disp[c][j]));
      mu[j] = sum.value() / n_d;
    }
    std::vector<std::vector<double>> cov(dim, std::vector<double>(dim, 0.0));
    for (int j = 0; j < dim; ++j)
      for (int k = j; k < dim; ++k) {
        detail::KahanSum sum;
        for (const auto& s : slots)
          sum.add((static_cast<double>(s.checkpoint_disp[c][j]) - mu[j]) *
                  (static_cast<double>(s.checkpoint_disp[c][k]) - mu[k]));
        double val = n_traj > 1 ? sum.value() / (n_d - 1.0) : 0.0;
        cov[j][k] = val;
        cov[k][j] = val;
      }
    stats.covariance.push_back(std::move(cov));

    long long returned = 0;
    for (const auto& s : slots) returned += s.returned_by[c];
    stats.return_fraction.push_back(static_cast<double>(returned) / n_d);
  }

  std::map<std::array<long long, 2>, long long> hist;
  for (const auto& s : slots) hist[s.final_cell]++;
  for (const auto& kv : hist) stats.cell_histogram.push_back(kv);

  stats.scatterer_visits.assign(cfg.scatterers.size(), 0);
  for (const auto& s : slots)
    for (std::size_t j = 0; j < s.scatterer_visits.size(); ++j)
      stats.scatterer_visits[j] += s.scatterer_visits[j];

  for (const auto& s : slots) {
    stats.tangency_resamples += s.tangency_discards;
    stats.grazing_resamples += s.grazing_discards;
    stats.horizon_escapes += s.horizon_discards;
  }
  long long discards = stats.tangency_resamples + stats.grazing_resamples +
                       stats.horizon_escapes;
  stats.resample_rate =
      static_cast<double>(discards) / static_cast<double>(n_traj + discards);
  stats.resample_warning = stats.resample_rate > 0.01;

  stats.per_trajectory = std::move(slots);
  return stats;
}

/// Per-checkpoint displacement table. Tube geometries report dy = 0; the
/// cocycle there has a single component.
inline void write_displacement_csv(std::ostream& os,
                                   const EnsembleStats& stats) {
  os << "trajectory_id,checkpoint,dx,dy,returned_by_checkpoint\n";
  for (std::size_t i = 0; i < stats.per_trajectory.size(); ++i) {
    const TrajectoryStats& t = stats.per_trajectory[i];
    for (std::size_t c = 0; c < stats.checkpoints.size(); ++c)
      os << i << ',' << stats.checkpoints[c] << ',' << t.checkpoint_disp[c][0]
         << ',' << t.checkpoint_disp[c][1] << ','
         << static_cast<int>(t.returned_by[c]) << '\n';
  }
}

}  // namespace tailatlas
