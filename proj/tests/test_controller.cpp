#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "tms/controller.hpp"

using namespace tms;

TEST_CASE("F2 construction by hand-worked Gram-Schmidt") {
  Vec3d f1(0, 0, -1);
  Vec3d x_t(0, 0, 0), x_f(3, 0, 4);
  auto r = compute_F2(x_t, x_f, f1);
  REQUIRE(r.f2.has_value());
  CHECK((*r.f2 - Vec3d(1, 0, 0)).norm() < 1e-12);
  CHECK(std::cos(r.theta) == doctest::Approx(-0.8).epsilon(1e-12));
  CHECK(r.theta == doctest::Approx(std::acos(-0.8)).epsilon(1e-12));  // ~143.13 deg
}

TEST_CASE("F2 degenerate cases") {
  Vec3d f1(0, 0, -1);
  SUBCASE("at the target") {
    auto r = compute_F2(Vec3d(1, 2, 3), Vec3d(1, 2, 3), f1);
    CHECK_FALSE(r.f2.has_value());
    CHECK(r.theta == 0.0);
  }
  SUBCASE("error parallel to the axis") {
    auto r = compute_F2(Vec3d(0, 0, 5), Vec3d(0, 0, 0), f1);  // u = (0,0,-1) = F1
    CHECK_FALSE(r.f2.has_value());
    CHECK(r.theta == 0.0);
  }
  SUBCASE("target directly behind the axis") {
    auto r = compute_F2(Vec3d(0, 0, 0), Vec3d(0, 0, 5), f1);  // u = -F1
    CHECK_FALSE(r.f2.has_value());
    CHECK(r.theta == doctest::Approx(std::numbers::pi));
  }
  SUBCASE("non-unit F1 rejected") {
    CHECK_THROWS_AS((void)compute_F2(Vec3d(0, 0, 0), Vec3d(1, 0, 0), Vec3d(0, 0, -2)),
                    std::invalid_argument);
  }
}

TEST_CASE("F2 properties on random inputs") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 2000; ++i) {
    Vec3d f1 = oracle::random_vector(rng).normalized();
    Vec3d x_t = oracle::random_vector(rng), x_f = oracle::random_vector(rng);
    auto r = compute_F2(x_t, x_f, f1);
    Vec3d u = (x_f - x_t).normalized();
    CHECK(r.theta == doctest::Approx(std::acos(std::clamp(f1.dot(u), -1.0, 1.0))).epsilon(1e-9));
    if (!r.f2) continue;
    CHECK(std::abs(r.f2->norm() - 1.0) < 1e-9);
    CHECK(std::abs(r.f2->dot(f1)) < 1e-9);
    // F2 lies in span{F1, u}.
    Vec3d n = f1.cross(u);
    CHECK(std::abs(r.f2->dot(n)) / std::max(n.norm(), 1e-30) < 1e-9);
    // Oracle route: brute-force projection of u off F1.
    Vec3d proj = u - u.dot(f1) * f1;
    CHECK((*r.f2 - proj.normalized()).norm() < 1e-9);
  }
}

TEST_CASE("hybrid force law") {
  SUBCASE("paper-worked example") {
    Vec3d f = hybrid_force(10.0, Vec3d(0, 0, -1), std::optional<Vec3d>(Vec3d(1, 0, 0)),
                           std::acos(-0.8));
    CHECK((f - Vec3d(6, 0, -8)).norm() < 1e-9);
    CHECK(f.norm() == doctest::Approx(10.0).epsilon(1e-12));
  }
  SUBCASE("theta = 0 reduces to pure F1") {
    Vec3d f = hybrid_force(7.0, Vec3d(0, 0, -1), std::optional<Vec3d>(Vec3d(1, 0, 0)), 0.0);
    CHECK((f - Vec3d(0, 0, -7)).norm() == 0.0);
  }
  SUBCASE("theta = pi/2 reduces to pure F2") {
    Vec3d f = hybrid_force(7.0, Vec3d(0, 0, -1), std::optional<Vec3d>(Vec3d(1, 0, 0)),
                           std::numbers::pi / 2);
    CHECK((f - Vec3d(7, 0, 0)).norm() < 1e-9);
  }
  SUBCASE("null F2 gives the pure adhesion force") {
    Vec3d f = hybrid_force(7.0, Vec3d(0, 0, -1), std::nullopt, 0.3);
    CHECK((f - Vec3d(0, 0, -7)).norm() == 0.0);
  }
  SUBCASE("norm preservation on random inputs") {
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> uf(0.0, 50.0);
    for (int i = 0; i < 2000; ++i) {
      Vec3d f1 = oracle::random_vector(rng).normalized();
      Vec3d x_t = oracle::random_vector(rng), x_f = oracle::random_vector(rng);
      auto r = compute_F2(x_t, x_f, f1);
      if (!r.f2) continue;
      double mag = uf(rng);
      CHECK(hybrid_force(mag, f1, r.f2, r.theta).norm() == doctest::Approx(mag).epsilon(1e-9));
    }
  }
}

TEST_CASE("force schedule values from the published constants") {
  CHECK(schedule_force(20.0, 50.0) == 40.0);
  CHECK(schedule_force(7.5, 50.0) == doctest::Approx(22.5).epsilon(1e-12));
  CHECK(schedule_force(5.0, 50.0) == 5.0);
  // Knees are exact.
  CHECK(schedule_force(0.2 * 50.0, 50.0) == 40.0);
  CHECK(schedule_force(0.1 * 50.0, 50.0) == 5.0);
  CHECK(schedule_force(0.0, 50.0) == 5.0);
  CHECK(schedule_force(1e9, 50.0) == 40.0);
  CHECK_THROWS_AS((void)schedule_force(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)schedule_force(-1.0, 10.0), std::invalid_argument);
}

TEST_CASE("force schedule is continuous and monotone with range [5, 40]") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> ue(0.0, 3.0), ueo(0.1, 500.0);
  double prev_eo = 50.0;
  double max_gap = 0.0;
  for (int i = 0; i < 200000; ++i) {
    double e_o = ueo(rng);
    double knee = (i % 2 == 0 ? 0.2 : 0.1) * e_o;
    double eps = 1e-12 * e_o;
    double lo = schedule_force(std::max(0.0, knee - eps), e_o);
    double hi = schedule_force(knee + eps, e_o);
    max_gap = std::max(max_gap, std::abs(hi - lo));
    double a = ue(rng) * e_o, b = ue(rng) * e_o;
    double fa = schedule_force(a, e_o), fb = schedule_force(b, e_o);
    CHECK(fa >= 5.0);
    CHECK(fa <= 40.0);
    if (a <= b) {
      CHECK(fa <= fb);
    } else {
      CHECK(fb <= fa);
    }
    prev_eo = e_o;
  }
  (void)prev_eo;
  CHECK(max_gap < 1e-9);
}

TEST_CASE("torque law") {
  Vec3d out = torque_command(Vec3d(2, -3, 5), 4.0);
  CHECK(out == Vec3d(-8, 12, 0));
  CHECK(torque_command(Vec3d(0, 0, 0), 4.0) == Vec3d(0, 0, 0));
  CHECK(torque_command(Vec3d(9, -1, 2), 0.0) == Vec3d(0, 0, 0));

  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> uk(0.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    Vec3d tau = oracle::random_vector(rng);
    double k = uk(rng);
    Vec3d t = torque_command(tau, k);
    CHECK(t.z() == 0.0);
    // Linear in both arguments.
    CHECK((torque_command(2.0 * tau, k) - 2.0 * t).norm() < 1e-9);
    CHECK((torque_command(tau, 2.0 * k) - 2.0 * t).norm() < 1e-9);
  }
}

TEST_CASE("error metrics") {
  Vec3d f1(0, 0, -1), f2(1, 0, 0);
  auto m = error_metrics(Vec3d(0, 0, 0), Vec3d(3, 0, 4), f1, std::optional<Vec3d>(f2));
  CHECK(m.e == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(m.e_n == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(m.e_p == doctest::Approx(3.0).epsilon(1e-12));

  auto z = error_metrics(Vec3d(1, 1, 1), Vec3d(1, 1, 1), f1, std::optional<Vec3d>(f2));
  CHECK(z.e == 0.0);
  CHECK(z.e_n == 0.0);
  CHECK(z.e_p == 0.0);

  // Error along F1 only.
  auto n = error_metrics(Vec3d(0, 0, 2), Vec3d(0, 0, 0), f1, std::nullopt);
  CHECK(n.e == doctest::Approx(std::abs(n.e_n)).epsilon(1e-12));
  CHECK(n.e_p == 0.0);
}

TEST_CASE("e_n and e_p recompose the in-plane error") {
  std::mt19937_64 rng(79);
  for (int i = 0; i < 2000; ++i) {
    Vec3d f1 = oracle::random_vector(rng).normalized();
    Vec3d x_t = oracle::random_vector(rng), x_f = oracle::random_vector(rng);
    auto r = compute_F2(x_t, x_f, f1);
    if (!r.f2) continue;
    auto m = error_metrics(x_t, x_f, f1, r.f2);
    Vec3d err = x_f - x_t;
    Vec3d recomposed = m.e_n * f1 + m.e_p * (*r.f2);
    Vec3d in_plane = err.dot(f1) * f1 + err.dot(*r.f2) * (*r.f2);
    CHECK((recomposed - in_plane).norm() < 1e-9);
    // Here the error lies in span{F1,F2} by construction of F2.
    CHECK((recomposed - err).norm() < 1e-9);
    CHECK(m.e * m.e >= m.e_n * m.e_n + m.e_p * m.e_p - 1e-6);
  }
}

TEST_CASE("controller tick composes the published pipeline") {
  ControllerConfig<double> cfg;
  cfg.k_p = 4.0;

  SUBCASE("first tick commands the high plateau") {
    ControllerState<double> st;
    auto out = controller_tick(st, Vec3d(0, 0, 0), Vec3d(10, 0, 0), Vec3d(0, 0, -1),
                               Wrenchd{}, cfg);
    CHECK(out.magnitude == 40.0);
    CHECK(st.latched);
    CHECK(st.e_o == doctest::Approx(10.0));
  }
  SUBCASE("converged tick commands the pure 5 N adhesion wrench") {
    ControllerState<double> st;
    st.latch(100.0);
    auto out = controller_tick(st, Vec3d(0, 0, 0), Vec3d(0, 0, -2), Vec3d(0, 0, -1),
                               Wrenchd{}, cfg);  // e = 2 <= 0.1*e_o, error parallel to F1
    CHECK(out.magnitude == 5.0);
    CHECK((out.force - Vec3d(0, 0, -5)).norm() < 1e-12);
    CHECK(out.torque_tool == Vec3d(0, 0, 0));
  }
  SUBCASE("random ticks equal the hand-composed pipeline") {
    std::mt19937_64 rng(83);
    for (int i = 0; i < 500; ++i) {
      Vec3d f1 = oracle::random_vector(rng).normalized();
      Vec3d x_t = oracle::random_vector(rng), x_f = oracle::random_vector(rng);
      Wrenchd meas{oracle::random_vector(rng, 10.0), oracle::random_vector(rng, 200.0)};
      ControllerState<double> st;
      st.latch(40.0);
      auto out = controller_tick(st, x_t, x_f, f1, meas, cfg);

      auto f2 = compute_F2(x_t, x_f, f1);
      double e = (x_f - x_t).norm();
      double mag = schedule_force(e, 40.0);
      Vec3d force = hybrid_force(mag, f1, f2.f2, f2.theta);
      Vec3d torque = torque_command(meas.torque, cfg.k_p);
      CHECK((out.force - force).norm() < 1e-12);
      CHECK((out.torque_tool - torque).norm() < 1e-12);
      CHECK(out.magnitude == mag);
    }
  }
  SUBCASE("fixed-force and pure-force variants") {
    ControllerConfig<double> fixed = cfg;
    fixed.magnitude_mode = MagnitudeMode::fixed;
    fixed.fixed_force = 20.0;
    fixed.force_mode = ForceMode::pure;
    ControllerState<double> st;
    auto out = controller_tick(st, Vec3d(0, 0, 0), Vec3d(10, 0, 4), Vec3d(0, 0, -1),
                               Wrenchd{}, fixed);
    CHECK(out.magnitude == 20.0);
    CHECK((out.force - Vec3d(0, 0, -20)).norm() == 0.0);  // F*F1 regardless of the error
  }
  SUBCASE("paper F2 sign variant flips the lateral pull") {
    ControllerConfig<double> paper = cfg;
    paper.f2_sign = F2Sign::paper;
    ControllerState<double> sa, sb;
    auto a = controller_tick(sa, Vec3d(0, 0, 0), Vec3d(3, 0, 4), Vec3d(0, 0, -1), Wrenchd{}, cfg);
    auto b = controller_tick(sb, Vec3d(0, 0, 0), Vec3d(3, 0, 4), Vec3d(0, 0, -1), Wrenchd{},
                             paper);
    REQUIRE(a.f2.has_value());
    REQUIRE(b.f2.has_value());
    CHECK((*a.f2 + *b.f2).norm() < 1e-12);
    CHECK(a.theta == doctest::Approx(std::numbers::pi - b.theta));
    CHECK(a.magnitude == b.magnitude);
  }
  SUBCASE("relatch resets the schedule reference") {
    ControllerState<double> st;
    st.latch(1000.0);
    auto low = controller_tick(st, Vec3d(0, 0, 0), Vec3d(10, 0, 0), Vec3d(0, 0, -1),
                               Wrenchd{}, cfg);
    CHECK(low.magnitude == 5.0);  // e = 10 = 0.01*e_o
    st.relatch();
    auto high = controller_tick(st, Vec3d(0, 0, 0), Vec3d(10, 0, 0), Vec3d(0, 0, -1),
                                Wrenchd{}, cfg);
    CHECK(high.magnitude == 40.0);  // e = e_o after the re-latch
    CHECK(st.e_o == doctest::Approx(10.0));
  }
}

TEST_CASE("schedule consistency validation") {
  ForceSchedule<double> s;
  CHECK(s.continuous());
  s.slope = 300.0;
  CHECK_FALSE(s.continuous());
}
