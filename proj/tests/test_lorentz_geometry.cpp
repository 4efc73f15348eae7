#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "tailatlas/lorentz_ensemble.hpp"
#include "tailatlas/lorentz_geometry.hpp"
#include "tailatlas/rng.hpp"

namespace tailatlas {
namespace {

LorentzConfig single_disk(double radius) {
  LorentzConfig cfg;
  cfg.scatterers = {{{0.0, 0.0}, radius}};
  return cfg;
}

std::string error_message(const std::function<void()>& fn, ErrorKind kind) {
  try {
    fn();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "no error thrown";
  return "";
}

TEST(Flight, HeadOnHitOnASparseLattice) {
  LorentzConfig cfg = single_disk(0.3);
  cfg.basis = {{{4.0, 0.0}, {0.0, 4.0}}};
  validate_geometry(cfg);
  FlightHit hit = next_collision({1.0, 0.0}, {-1.0, 0.0}, cfg);
  EXPECT_EQ(hit.scatterer, 0);
  EXPECT_EQ(hit.cell[0], 0);
  EXPECT_EQ(hit.cell[1], 0);
  EXPECT_NEAR(hit.point.x, 0.3, 1e-12);
  EXPECT_NEAR(hit.point.y, 0.0, 1e-12);
  EXPECT_NEAR(hit.time, 0.7, 1e-12);
  EXPECT_EQ(hit.wall_bounces, 0);
  EXPECT_DOUBLE_EQ(hit.v_arrive.x, -1.0);
  EXPECT_DOUBLE_EQ(hit.v_arrive.y, 0.0);
}

TEST(Flight, OpenCorridorEscapesTheHorizon) {
  LorentzConfig cfg = single_disk(0.3);
  cfg.horizon_cells = 50;
  validate_geometry(cfg);
  std::string msg = error_message(
      [&] { next_collision({0.5, 0.5}, {0.0, 1.0}, cfg); },
      ErrorKind::HorizonEscape);
  EXPECT_NE(msg.find("horizon escape"), std::string::npos) << msg;
}

TEST(Flight, BoundaryLaunchExcludesTheHomeDiskOnly) {
  LorentzConfig cfg = single_disk(0.3);
  validate_geometry(cfg);
  FlightHit hit = next_collision({0.3, 0.0}, {1.0, 0.0}, cfg, 0, {{0, 0}});
  EXPECT_EQ(hit.scatterer, 0);
  EXPECT_EQ(hit.cell[0], 1);
  EXPECT_EQ(hit.cell[1], 0);
  EXPECT_NEAR(hit.point.x, 0.7, 1e-12);
  EXPECT_NEAR(hit.point.y, 0.0, 1e-12);
  EXPECT_NEAR(hit.time, 0.4, 1e-12);
  EXPECT_NEAR(hit.local.x, -0.3, 1e-12);
  EXPECT_NEAR(hit.local.y, 0.0, 1e-12);
}

TEST(Reflection, MirrorLawAndGrazingRejection) {
  Vec2 r1 = reflect({-1.0, 0.0}, {1.0, 0.0});
  EXPECT_DOUBLE_EQ(r1.x, 1.0);
  EXPECT_DOUBLE_EQ(r1.y, 0.0);

  const double h = std::sqrt(0.5);
  Vec2 r2 = reflect({-h, -h}, {0.0, 1.0});
  EXPECT_DOUBLE_EQ(r2.x, -h);
  EXPECT_DOUBLE_EQ(r2.y, h);

  Vec2 r3 = reflect({0.0, -1.0}, {h, h});
  EXPECT_NEAR(r3.x, 1.0, 1e-15);
  EXPECT_NEAR(r3.y, 0.0, 1e-15);

  std::string msg = error_message([&] { reflect({0.0, 1.0}, {1.0, 0.0}); },
                                  ErrorKind::Grazing);
  EXPECT_NE(msg.find("below the tolerance"), std::string::npos) << msg;
}

TEST(BilliardStep, AlternatingOrbitBouncesBetweenNeighborDisks) {
  LorentzConfig cfg = single_disk(0.3);
  validate_geometry(cfg);
  LineElement le;
  le.scatterer = 0;
  le.cell = {0, 0};
  le.theta = 0.0;
  le.v = {1.0, 0.0};

  CollisionEvent e1 = billiard_step(le, cfg);
  EXPECT_EQ(e1.displacement[0], 1);
  EXPECT_EQ(e1.displacement[1], 0);
  EXPECT_EQ(e1.to.cell[0], 1);
  EXPECT_EQ(e1.to.cell[1], 0);
  EXPECT_NEAR(e1.to.theta, kPi, 1e-12);
  EXPECT_NEAR(e1.to.v.x, -1.0, 1e-12);
  EXPECT_NEAR(e1.to.v.y, 0.0, 1e-12);
  EXPECT_NEAR(e1.flight_time, 0.4, 1e-12);

  CollisionEvent e2 = billiard_step(e1.to, cfg);
  EXPECT_EQ(e2.displacement[0], -1);
  EXPECT_EQ(e2.displacement[1], 0);
  EXPECT_EQ(e2.to.cell[0], 0);
  EXPECT_EQ(e2.to.cell[1], 0);
  EXPECT_NEAR(e2.to.theta, 0.0, 1e-12);
}

TEST(BilliardStep, SpeedIsConservedAndCellsCocycleExactly) {
  LorentzConfig cfg = make_lorentz_preset("finite-horizon-square");
  CounterRng rng(7, 0, 0);
  LineElement le = sample_invariant_measure(rng, cfg);
  double worst = 0.0;
  long long sum0 = 0;
  long long sum1 = 0;
  for (int n = 0; n < 20000; ++n) {
    CollisionEvent ev = billiard_step(le, cfg);
    sum0 += ev.displacement[0];
    sum1 += ev.displacement[1];
    le = ev.to;
    worst = std::max(worst, std::fabs(norm(le.v) - 1.0));
  }
  EXPECT_LT(worst, 1e-12);
  EXPECT_EQ(le.cell[0], sum0);
  EXPECT_EQ(le.cell[1], sum1);
}

TEST(Retrace, EachCollisionReversesToItsLaunchPoint) {
  LorentzConfig cfg = make_lorentz_preset("finite-horizon-square");
  CounterRng rng(11, 3, 0);
  LineElement le = sample_invariant_measure(rng, cfg);
  std::vector<CollisionEvent> fwd;
  for (int n = 0; n < 100; ++n) {
    fwd.push_back(billiard_step(le, cfg));
    le = fwd.back().to;
  }
  double worst = 0.0;
  for (const CollisionEvent& f : fwd) {
    LineElement rev = f.to;
    rev.v = {-f.v_incoming.x, -f.v_incoming.y};
    CollisionEvent ev = billiard_step(rev, cfg);
    EXPECT_EQ(ev.to.scatterer, f.from.scatterer);
    EXPECT_EQ(ev.to.cell[0], f.from.cell[0]);
    EXPECT_EQ(ev.to.cell[1], f.from.cell[1]);
    worst = std::max(worst, norm(element_point(ev.to, cfg) -
                                 element_point(f.from, cfg)));
    worst = std::max(worst, std::fabs(ev.flight_time - f.flight_time));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Retrace, ReversedSequenceRevisitsTwentyCollisionsInOrder) {
  LorentzConfig cfg = make_lorentz_preset("finite-horizon-square");
  CounterRng rng(11, 3, 0);
  LineElement le = sample_invariant_measure(rng, cfg);
  std::vector<CollisionEvent> fwd;
  for (int n = 0; n < 20; ++n) {
    fwd.push_back(billiard_step(le, cfg));
    le = fwd.back().to;
  }
  LineElement rev = fwd.back().to;
  rev.v = {-fwd.back().v_incoming.x, -fwd.back().v_incoming.y};
  double worst = 0.0;
  for (int n = 19; n >= 0; --n) {
    CollisionEvent ev = billiard_step(rev, cfg);
    const CollisionEvent& f = fwd[static_cast<std::size_t>(n)];
    EXPECT_EQ(ev.to.scatterer, f.from.scatterer);
    EXPECT_EQ(ev.to.cell[0], f.from.cell[0]);
    EXPECT_EQ(ev.to.cell[1], f.from.cell[1]);
    worst = std::max(worst, norm(element_point(ev.to, cfg) -
                                 element_point(f.from, cfg)));
    rev = ev.to;
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Presets, AllShippedTablesValidate) {
  std::vector<std::string> names = lorentz_preset_names();
  ASSERT_EQ(names.size(), 4u);
  for (const std::string& name : names) {
    LorentzConfig cfg = make_lorentz_preset(name);
    EXPECT_NO_THROW(validate_geometry(cfg)) << name;
  }
  EXPECT_EQ(displacement_dim(make_lorentz_preset("square-r04").kind), 2);
  EXPECT_EQ(displacement_dim(make_lorentz_preset("finite-horizon-tube").kind),
            1);
  EXPECT_EQ(displacement_dim(make_lorentz_preset("hardwall-tube").kind), 1);
}

TEST(Presets, UnknownNameIsRejectedVerbatim) {
  std::string msg = error_message([] { make_lorentz_preset("bogus"); },
                                  ErrorKind::InvalidInput);
  EXPECT_NE(msg.find("unknown preset 'bogus'"), std::string::npos) << msg;
}

TEST(ValidateGeometry, EmptyTableAndBadScalarsAreRejected) {
  LorentzConfig empty;
  EXPECT_NE(error_message([&] { validate_geometry(empty); },
                          ErrorKind::InvalidInput)
                .find("no scatterers given"),
            std::string::npos);

  LorentzConfig cfg = single_disk(0.3);
  cfg.horizon_cells = 0;
  EXPECT_NE(
      error_message([&] { validate_geometry(cfg); }, ErrorKind::InvalidInput)
          .find("horizon_cells must be at least 1"),
      std::string::npos);

  cfg = single_disk(0.3);
  cfg.tangency_tol = 0.0;
  EXPECT_NE(
      error_message([&] { validate_geometry(cfg); }, ErrorKind::InvalidInput)
          .find("tolerances must be positive"),
      std::string::npos);

  cfg = single_disk(0.3);
  cfg.kind = GeometryKind::Tube;
  cfg.width = 0.0;
  EXPECT_NE(
      error_message([&] { validate_geometry(cfg); }, ErrorKind::InvalidInput)
          .find("tube width must be positive"),
      std::string::npos);

  cfg = single_disk(-0.1);
  EXPECT_NE(
      error_message([&] { validate_geometry(cfg); }, ErrorKind::InvalidInput)
          .find("scatterer 0 has nonpositive radius"),
      std::string::npos);
}

TEST(ValidateGeometry, DiskLargerThanTheSearchRingIsRejected) {
  LorentzConfig cfg = single_disk(1.5);
  std::string msg = error_message([&] { validate_geometry(cfg); },
                                  ErrorKind::InvalidInput);
  EXPECT_NE(msg.find("scatterer 0 extends beyond the adjacent-cell search "
                     "ring"),
            std::string::npos)
      << msg;
}

TEST(ValidateGeometry, TubeDiskMustFitBetweenTheSeams) {
  LorentzConfig cfg = single_disk(0.3);
  cfg.kind = GeometryKind::Tube;
  cfg.width = 0.5;
  std::string msg = error_message([&] { validate_geometry(cfg); },
                                  ErrorKind::InvalidInput);
  EXPECT_NE(msg.find("scatterer 0 does not fit within the tube width"),
            std::string::npos)
      << msg;
}

TEST(ValidateGeometry, HardwallDiskMayNotCrossAWall) {
  LorentzConfig cfg;
  cfg.kind = GeometryKind::HardwallTube;
  cfg.width = 1.0;
  cfg.scatterers = {{{0.0, 0.3}, 0.3}};
  std::string msg = error_message([&] { validate_geometry(cfg); },
                                  ErrorKind::InvalidInput);
  EXPECT_NE(msg.find("scatterer 0 crosses a wall"), std::string::npos) << msg;
}

TEST(ValidateGeometry, OverlapReportsThePairAndTheCellOffset) {
  LorentzConfig cfg;
  cfg.scatterers = {{{0.0, 0.0}, 0.3}, {{0.5, 0.0}, 0.3}};
  std::string msg = error_message([&] { validate_geometry(cfg); },
                                  ErrorKind::InvalidInput);
  EXPECT_NE(msg.find("scatterers 0 and 1 overlap at cell offset (0, 0)"),
            std::string::npos)
      << msg;

  LorentzConfig periodic = single_disk(0.6);
  std::string msg2 = error_message([&] { validate_geometry(periodic); },
                                   ErrorKind::InvalidInput);
  EXPECT_NE(msg2.find("scatterers 0 and 0 overlap"), std::string::npos)
      << msg2;
}

TEST(ValidateGeometry, SingularBasisIsRejected) {
  LorentzConfig cfg = single_disk(0.3);
  cfg.basis = {{{1.0, 2.0}, {2.0, 4.0}}};
  std::string msg = error_message([&] { validate_geometry(cfg); },
                                  ErrorKind::InvalidInput);
  EXPECT_NE(msg.find("lattice basis is singular"), std::string::npos) << msg;
}

}  // namespace
}  // namespace tailatlas
