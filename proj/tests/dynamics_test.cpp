#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "hytop/dynamics.hpp"

using namespace hytop;

namespace {

TrackingPolicy line_policy(const Vec& start, const Vec& end, double speed, double gain) {
  TrackingPolicy p;
  p.gain = gain;
  p.reference.path = std::make_shared<const WaypointPath>(std::vector<Vec>{start, end});
  p.reference.speed = speed;
  return p;
}

// e' = -g e + d with e = x - x_r, for a reference moving at constant velocity.
Vec closed_form(const Vec& e0, const Vec& d, double g, double t) {
  const double k = std::exp(-g * t);
  return e0 * k + d / g * (1.0 - k);
}

Vec integrate(const AgentState& s0, const TrackingPolicy& p, const Vec& d, double dt, int steps) {
  AgentState s = s0;
  for (int k = 0; k < steps; ++k) s = step_with(s, p, d, dt);
  return s.x;
}

}  // namespace

TEST(WaypointPath, ArcLengthParameterisation) {
  const WaypointPath path({Vec(0, 0, 0), Vec(3, 0, 0), Vec(3, 4, 0)});
  EXPECT_DOUBLE_EQ(path.length(), 7.0);
  EXPECT_TRUE(path.at(1.5).isApprox(Vec(1.5, 0, 0)));
  EXPECT_TRUE(path.at(5.0).isApprox(Vec(3, 2, 0)));
  EXPECT_TRUE(path.at(99.0).isApprox(Vec(3, 4, 0)));
  EXPECT_TRUE(path.tangent(4.0).isApprox(Vec(0, 1, 0)));
  EXPECT_EQ(path.tangent(8.0), Vec::Zero());
  EXPECT_THROW(WaypointPath({}), std::invalid_argument);
}

TEST(Reference, RateScalesProgressAndRestartResets) {
  TrackingPolicy p = line_policy(Vec::Zero(), Vec(100, 0, 0), 2.0, 1.0);
  p.reference.rate = 0.5;
  EXPECT_DOUBLE_EQ(p.reference.progress(4.0), 4.0);
  const ReferenceTrajectory r = p.reference.restarted(10.0, 30.0);
  EXPECT_DOUBLE_EQ(r.rate, 1.0);
  EXPECT_DOUBLE_EQ(r.progress(11.0), 32.0);
  EXPECT_TRUE(r.velocity(11.0).isApprox(Vec(2, 0, 0)));
}

TEST(Rk4, MatchesClosedFormOnLinearReference) {
  const double g = 1.3;
  const TrackingPolicy p = line_policy(Vec::Zero(), Vec(1000, 0, 0), 0.7, g);
  const Vec d(0.2, -0.1, 0.0);
  const AgentState s0{0, Vec(1.0, 2.0, 0.0), 0.0};
  const double T = 5.0;
  const Vec x = integrate(s0, p, d, 0.01, 500);
  const Vec expect = p.reference.position(T) + closed_form(s0.x, d, g, T);
  EXPECT_LT((x - expect).norm(), 1e-9);
}

TEST(Rk4, RichardsonRatioIsFourthOrder) {
  const double g = 2.0;
  const TrackingPolicy p = line_policy(Vec::Zero(), Vec(1000, 0, 0), 0.0, g);
  const Vec d(0.5, 0.0, 0.0);
  const AgentState s0{0, Vec(3.0, -1.0, 0.0), 0.0};
  const double T = 2.0;
  const Vec exact = closed_form(s0.x, d, g, T);
  const double e1 = (integrate(s0, p, d, 0.2, 10) - exact).norm();
  const double e2 = (integrate(s0, p, d, 0.1, 20) - exact).norm();
  const double e3 = (integrate(s0, p, d, 0.05, 40) - exact).norm();
  EXPECT_NEAR(std::log2(e1 / e2), 4.0, 0.25);
  EXPECT_NEAR(std::log2(e2 / e3), 4.0, 0.25);
}

TEST(Rk4, RejectsBadInput) {
  const TrackingPolicy p = line_policy(Vec::Zero(), Vec(10, 0, 0), 1.0, 1.0);
  DisturbanceProcess dist({0.1, DisturbanceKind::RandomWalk, 2}, 1);
  AgentState s{0, Vec::Zero(), 0.0};
  EXPECT_THROW(step(s, p, dist, 0.0), std::invalid_argument);
  s.x = Vec(std::nan(""), 0, 0);
  EXPECT_THROW(step(s, p, dist, 0.1), std::domain_error);
}

TEST(PredictNominal, ConvergesToReference) {
  const double g = 1.0;
  const TrackingPolicy p = line_policy(Vec::Zero(), Vec(1000, 0, 0), 1.0, g);
  const Vec x0(0.0, 4.0, 0.0);
  const Vec x = predict_nominal(x0, 0.0, 3.0, p);
  const Vec expect = p.reference.position(3.0) + closed_form(x0, Vec::Zero(), g, 3.0);
  EXPECT_LT((x - expect).norm(), 1e-6);
  EXPECT_TRUE(predict_nominal(x0, 2.0, 2.0, p).isApprox(x0));
  EXPECT_THROW(predict_nominal(x0, 2.0, 1.0, p), std::invalid_argument);
}

TEST(Disturbance, NeverExceedsBound) {
  for (DisturbanceKind kind : {DisturbanceKind::ConstantDirection, DisturbanceKind::Sinusoidal,
                               DisturbanceKind::RandomWalk}) {
    for (int dim : {2, 3}) {
      DisturbanceProcess d({0.7, kind, dim}, 99);
      for (int k = 0; k < 2000; ++k) {
        const Vec v = d.sample(0.25 * k, 0.25);
        ASSERT_LE(v.norm(), 0.7 * (1 + 1e-12));
        if (dim == 2) {
          ASSERT_EQ(v.z(), 0.0);
        }
      }
    }
  }
  EXPECT_THROW(DisturbanceProcess({-1.0, DisturbanceKind::RandomWalk, 2}, 1), std::invalid_argument);
  EXPECT_THROW(DisturbanceProcess({1.0, DisturbanceKind::RandomWalk, 4}, 1), std::invalid_argument);
}

TEST(Disturbance, SeedReproducible) {
  DisturbanceProcess a({0.5, DisturbanceKind::RandomWalk, 2}, 5);
  DisturbanceProcess b({0.5, DisturbanceKind::RandomWalk, 2}, 5);
  for (int k = 0; k < 100; ++k) ASSERT_EQ(a.sample(k, 0.25), b.sample(k, 0.25));
}

TEST(ErrorBound, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(error_bound(0.0, 1.0, 1.0), 0.0);
  // lambda = 1: sqrt(2 (1 - e^{-t/2}))
  EXPECT_NEAR(error_bound(2.0, 1.0, 1.0), std::sqrt(2.0 * (1.0 - std::exp(-1.0))), 1e-15);
  EXPECT_NEAR(error_bound(1.0, 1.5, 2.0), std::sqrt(2.0 * (1.0 - std::exp(-1.0)) / 2.0) * 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(error_bound(3.0, 1.0, 0.0), 0.0);
  EXPECT_THROW(error_bound(1.0, 0.5, 1.0), std::invalid_argument);
}

TEST(ErrorBound, MonotoneWithSqrtTwoLimit) {
  double prev = 0.0;
  for (double t = 0.0; t < 40.0; t += 0.5) {
    const double e = error_bound(t, 1.0, 1.0);
    ASSERT_GE(e, prev);
    prev = e;
  }
  EXPECT_NEAR(error_bound(200.0, 1.0, 1.0), std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(error_bound_limit(1.0, 1.0), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(error_bound_limit(2.0, 3.0), 3.0 * std::sqrt(2.0 / 3.0), 1e-15);
}

TEST(ErrorBound, HoldsForRandomDisturbances) {
  for (int run = 0; run < 50; ++run) {
    const double lambda = 0.6 + 0.05 * (run % 10);
    const double gain = lambda + 0.1 * (run % 3);
    const TrackingPolicy p = line_policy(Vec::Zero(), Vec(500, 100, 0), 1.0, gain);
    DisturbanceProcess dist({0.8, static_cast<DisturbanceKind>(run % 3), 2}, 1000 + run);
    AgentState nominal{0, Vec::Zero(), 0.0};
    AgentState perturbed = nominal;
    const Vec zero = Vec::Zero();
    for (int k = 1; k <= 400; ++k) {
      nominal = step_with(nominal, p, zero, 0.05);
      perturbed = step(perturbed, p, dist, 0.05);
      const double dev = (nominal.x - perturbed.x).norm();
      ASSERT_LE(dev, error_bound(0.05 * k, lambda, 0.8) * (1 + 1e-3)) << "run " << run << " step " << k;
    }
  }
}
