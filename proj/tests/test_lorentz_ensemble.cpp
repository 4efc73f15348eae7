#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "tailatlas/lorentz_ensemble.hpp"
#include "tailatlas/lorentz_geometry.hpp"
#include "tailatlas/rng.hpp"

namespace tailatlas {
namespace {

std::vector<double> boundary_angles(std::uint64_t seed, int n,
                                    const LorentzConfig& cfg) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i), 0);
    out.push_back(sample_invariant_measure(rng, cfg).theta);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double ks_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    double fa = static_cast<double>(i) / static_cast<double>(a.size());
    double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

TEST(InvariantMeasure, OutgoingDirectionsObeyTheCosineLaw) {
  LorentzConfig cfg = make_lorentz_preset("finite-horizon-square");
  CounterRng rng(1234, 0, 0);
  const int n = 100000;
  double sum = 0.0;
  bool all_outgoing = true;
  for (int i = 0; i < n; ++i) {
    LineElement le = sample_invariant_measure(rng, cfg);
    double vn = dot(le.v, element_normal(le));
    all_outgoing = all_outgoing && vn >= 0.0;
    sum += vn;
  }
  EXPECT_TRUE(all_outgoing);
  // E[cos phi] = pi/4 under the cosine law; sd(cos phi) is about 0.2232.
  double mean = sum / n;
  EXPECT_LT(std::fabs(mean - kPi / 4.0), 4.0 * 0.2232 / std::sqrt(1.0 * n));
}

TEST(InvariantMeasure, BoundaryAngleDistributionIsSeedStable) {
  LorentzConfig cfg = make_lorentz_preset("finite-horizon-square");
  const int n = 10000;
  std::vector<double> a = boundary_angles(101, n, cfg);
  std::vector<double> b = boundary_angles(202, n, cfg);
  double d = ks_distance(a, b);
  EXPECT_LT(d, 1.628 * std::sqrt(2.0 / n));
}

TEST(Hardwall, WallsFoldTheOrbitIntoTheChannel) {
  LorentzConfig cfg = make_lorentz_preset("hardwall-tube");
  CounterRng rng(5, 2, 0);
  LineElement le = sample_invariant_measure(rng, cfg);
  long long bounces = 0;
  for (int n = 0; n < 5000; ++n) {
    CollisionEvent ev = billiard_step(le, cfg);
    bounces += ev.wall_bounces;
    ASSERT_EQ(ev.to.cell[1], 0);
    ASSERT_EQ(ev.displacement[1], 0);
    Vec2 p = element_point(ev.to, cfg);
    ASSERT_LE(p.y, 0.5 + 1e-12);
    ASSERT_GE(p.y, -0.5 - 1e-12);
    le = ev.to;
  }
  EXPECT_GT(bounces, 0);
}

TEST(Trajectory, ReturnFlagsAgreeWithTheFirstReturnIndex) {
  LorentzConfig cfg = make_lorentz_preset("finite-horizon-square");
  const std::vector<long long> chk = {1, 5, 10, 25, 50};
  bool saw_return = false;
  bool saw_no_return = false;
  for (std::uint64_t idx = 0; idx < 5; ++idx) {
    TrajectoryStats t = run_one_trajectory(cfg, 3, idx, 50, chk);
    ASSERT_EQ(t.checkpoint_disp.size(), chk.size());
    ASSERT_EQ(t.returned_by.size(), chk.size());
    for (std::size_t c = 0; c < chk.size(); ++c) {
      bool expect = t.first_return != 0 && t.first_return <= chk[c];
      EXPECT_EQ(t.returned_by[c] != 0, expect);
    }
    EXPECT_EQ(t.checkpoint_disp.back(), t.final_cell);
    long long visits = 0;
    for (long long v : t.scatterer_visits) visits += v;
    EXPECT_EQ(visits, 50);
    saw_return = saw_return || t.first_return != 0;
    saw_no_return = saw_no_return || t.first_return == 0;
  }
  EXPECT_TRUE(saw_return);
  EXPECT_TRUE(saw_no_return);
}

TEST(Checkpoints, DefaultsAreDedupedTenthsEndingAtTheCollisionCount) {
  EXPECT_EQ(default_checkpoints(1000),
            (std::vector<long long>{100, 200, 300, 400, 500, 600, 700, 800,
                                    900, 1000}));
  EXPECT_EQ(default_checkpoints(5), (std::vector<long long>{1, 2, 3, 4, 5}));
  EXPECT_EQ(default_checkpoints(7),
            (std::vector<long long>{1, 2, 3, 4, 5, 6, 7}));
  EXPECT_EQ(default_checkpoints(1), (std::vector<long long>{1}));
}

TEST(Ensemble, RejectsEmptyWorkAndBadCheckpoints) {
  LorentzConfig cfg = make_lorentz_preset("finite-horizon-square");
  EnsembleParams p;
  p.trajectories = 0;
  try {
    run_ensemble(cfg, p);
    FAIL() << "no error thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
    EXPECT_NE(std::string(e.what()).find(
                  "at least one trajectory and one collision"),
              std::string::npos);
  }

  p.trajectories = 2;
  p.collisions = 10;
  p.checkpoints = {5, 3};
  try {
    run_ensemble(cfg, p);
    FAIL() << "no error thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
    EXPECT_NE(std::string(e.what()).find("checkpoints must increase"),
              std::string::npos);
  }
}

TEST(Ensemble, TubeStatisticsDoNotDependOnTheThreadCount) {
  LorentzConfig cfg = make_lorentz_preset("finite-horizon-tube");
  EnsembleParams p;
  p.trajectories = 200;
  p.collisions = 400;
  p.seed = 99;
  p.threads = 1;
  EnsembleStats one = run_ensemble(cfg, p);
  p.threads = 3;
  EnsembleStats three = run_ensemble(cfg, p);

  EXPECT_EQ(one.dim, 1);
  ASSERT_EQ(one.checkpoints.size(), 10u);
  for (std::size_t c = 1; c < one.return_fraction.size(); ++c)
    EXPECT_LE(one.return_fraction[c - 1], one.return_fraction[c]);
  EXPECT_GT(one.return_fraction.back(), one.return_fraction.front());

  EXPECT_EQ(one.drift_mean, three.drift_mean);
  EXPECT_EQ(one.drift_se, three.drift_se);
  EXPECT_EQ(one.covariance, three.covariance);
  EXPECT_EQ(one.return_fraction, three.return_fraction);
  EXPECT_EQ(one.cell_histogram, three.cell_histogram);
  EXPECT_EQ(one.scatterer_visits, three.scatterer_visits);

  long long visits = 0;
  for (long long v : one.scatterer_visits) visits += v;
  EXPECT_EQ(visits, 200LL * 400LL);
  for (long long v : one.scatterer_visits) EXPECT_GT(v, 0);

  long long hist_total = 0;
  for (const auto& kv : one.cell_histogram) {
    EXPECT_EQ(kv.first[1], 0);
    hist_total += kv.second;
  }
  EXPECT_EQ(hist_total, 200);

  std::ostringstream csv;
  write_displacement_csv(csv, one);
  std::string text = csv.str();
  EXPECT_EQ(text.rfind("trajectory_id,checkpoint,dx,dy,returned_by_checkpoint",
                       0),
            0u);
  std::size_t lines = static_cast<std::size_t>(
      std::count(text.begin(), text.end(), '\n'));
  EXPECT_EQ(lines, 1u + 200u * 10u);
}

TEST(Ensemble, HorizonEscapesAreRedrawnAndCounted) {
  LorentzConfig cfg;
  cfg.scatterers = {{{0.0, 0.0}, 0.3}};
  cfg.horizon_cells = 3;
  EnsembleParams p;
  p.trajectories = 200;
  p.collisions = 10;
  p.seed = 1;
  EnsembleStats st = run_ensemble(cfg, p);

  EXPECT_GT(st.horizon_escapes, 0);
  EXPECT_TRUE(st.resample_warning);
  long long discards =
      st.tangency_resamples + st.grazing_resamples + st.horizon_escapes;
  EXPECT_DOUBLE_EQ(st.resample_rate,
                   static_cast<double>(discards) /
                       static_cast<double>(200 + discards));
  ASSERT_EQ(st.per_trajectory.size(), 200u);
  for (const TrajectoryStats& t : st.per_trajectory)
    EXPECT_EQ(t.checkpoint_disp.size(), st.checkpoints.size());
}

TEST(Ensemble, ClosedTableNeverResamples) {
  LorentzConfig cfg = make_lorentz_preset("finite-horizon-square");
  EnsembleParams p;
  p.trajectories = 50;
  p.collisions = 100;
  p.seed = 4;
  EnsembleStats st = run_ensemble(cfg, p);
  EXPECT_EQ(st.tangency_resamples + st.grazing_resamples + st.horizon_escapes,
            0);
  EXPECT_FALSE(st.resample_warning);
  EXPECT_DOUBLE_EQ(st.resample_rate, 0.0);
  EXPECT_EQ(st.dim, 2);
}

}  // namespace
}  // namespace tailatlas
