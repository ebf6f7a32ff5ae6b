#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "membrane/particle.hpp"

using namespace membrane;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> gauss;
  Vec3 v(gauss(rng), gauss(rng), gauss(rng));
  while (v.norm() < 1e-6) v = Vec3(gauss(rng), gauss(rng), gauss(rng));
  return v.normalized();
}

}  // namespace

TEST_CASE("rotation about the centre normal") {
  const Vec3 centre(0, 0, 1);
  CHECK(rotate_about_normal(centre, kPi / 2, Vec3(1, 0, 0)).isApprox(Vec3(0, 1, 0), 1e-12));

  std::mt19937 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vec3 c = random_unit(rng);
    const Vec3 x = 1.7 * random_unit(rng);
    CHECK(rotate_about_normal(c, 0.0, x).isApprox(x, 1e-15));
    CHECK((rotate_about_normal(c, 2 * kPi, x) - x).norm() < 1e-12);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    const double a = angle(rng);
    CHECK(rotate_about_normal(c, a, x).norm() == doctest::Approx(x.norm()).epsilon(1e-13));
  }
}

TEST_CASE("tangential translation") {
  const Vec3 centre(0, 0, 1);
  SUBCASE("quarter great circle") {
    const Vec3 out = translate_tangential(centre, Vec3(kPi / 2, 0, 0), centre);
    CHECK(out.isApprox(Vec3(1, 0, 0), 1e-12));
  }
  SUBCASE("zero translation is exact identity") {
    const Vec3 x(0.3, -0.2, 0.93);
    CHECK(translate_tangential(centre, Vec3::Zero(), x) == x);
  }
  SUBCASE("norm preservation") {
    std::mt19937 rng(5);
    for (int i = 0; i < 1000; ++i) {
      const Vec3 c = random_unit(rng);
      Vec3 tau = random_unit(rng);
      tau = (tau - tau.dot(c) * c);  // make tangent
      const Vec3 x = 2.1 * random_unit(rng);
      const MotionParam p{0.4, tau};
      CHECK(rigid_motion(c, p, x).norm() == doctest::Approx(x.norm()).epsilon(1e-12));
    }
  }
  SUBCASE("centre transported to geodesic endpoint") {
    std::mt19937 rng(6);
    for (int i = 0; i < 50; ++i) {
      const Vec3 c = random_unit(rng);
      Vec3 tau = random_unit(rng);
      tau = (tau - tau.dot(c) * c).normalized() * 0.7;
      const Vec3 end = translate_tangential(c, tau, c);
      // the endpoint sits at arc length |tau| from c in direction tau
      CHECK(std::acos(std::clamp(end.dot(c), -1.0, 1.0)) == doctest::Approx(0.7).epsilon(1e-12));
      CHECK((end - c).dot(tau) > 0.0);
    }
  }
}

TEST_CASE("motion composition matches combined parameter") {
  std::mt19937 rng(8);
  ModelParams params;
  for (int i = 0; i < 50; ++i) {
    const Vec3 c = random_unit(rng);
    Vec3 tau = random_unit(rng);
    tau = (tau - tau.dot(c) * c) * 0.6;
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    const double alpha = angle(rng);

    const Particle base = Particle::from_points(
        {1.1 * random_unit(rng), 1.2 * random_unit(rng), 0.9 * random_unit(rng)}, params, c);
    const Particle two_step = apply_motion(apply_motion(base, {alpha, Vec3::Zero()}), {0.0, tau});
    const Particle one_step = apply_motion(base, {alpha, tau});
    for (std::size_t j = 0; j < base.points.size(); ++j)
      CHECK((two_step.points[j] - one_step.points[j]).norm() < 1e-13);
  }
}

TEST_CASE("apply_motion preserves heights and re-derives sites") {
  ModelParams params;
  std::mt19937 rng(9);
  const Particle base =
      Particle::from_points({Vec3(0, 0, 1.1)}, params, Vec3(0, 0, 1));

  SUBCASE("identity") {
    const Particle same = apply_motion(base, MotionParam{});
    CHECK(same.points[0].isApprox(base.points[0], 1e-15));
    CHECK(same.heights[0] == base.heights[0]);
  }
  SUBCASE("quarter turn of a radial point") {
    const Particle out = apply_motion(base, {0.0, Vec3(kPi / 2, 0, 0)});
    CHECK(out.points[0].isApprox(Vec3(1.1, 0, 0), 1e-12));
    CHECK(out.sites[0].isApprox(Vec3(1, 0, 0), 1e-12));
    CHECK(out.heights[0] == doctest::Approx(0.1));
  }
  SUBCASE("random motions keep heights") {
    for (int i = 0; i < 100; ++i) {
      const Vec3 c = random_unit(rng);
      Vec3 tau = random_unit(rng);
      tau = (tau - tau.dot(c) * c) * 0.5;
      std::uniform_real_distribution<double> angle(-3.0, 3.0);
      const Particle p = Particle::from_points(
          {1.05 * random_unit(rng), 0.95 * random_unit(rng)}, params, c);
      const Particle out = apply_motion(p, {angle(rng), tau});
      for (std::size_t j = 0; j < p.heights.size(); ++j)
        CHECK(out.heights[j] == doctest::Approx(p.heights[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("motion velocity") {
  const Vec3 centre(0, 0, 1);
  SUBCASE("translation direction at the centre") {
    const Vec3 tau(0.3, -0.4, 0);
    CHECK(motion_velocity(centre, {0.0, tau}, centre).isApprox(tau, 1e-14));
  }
  SUBCASE("rotation fixes the centre") {
    CHECK(motion_velocity(centre, {1.0, Vec3::Zero()}, centre).norm() < 1e-15);
  }
  SUBCASE("rotation velocity") {
    CHECK(motion_velocity(centre, {1.0, Vec3::Zero()}, Vec3(1, 0, 0)).isApprox(Vec3(0, 1, 0), 1e-14));
  }
  SUBCASE("finite differences converge at rate O(t)") {
    std::mt19937 rng(13);
    const Vec3 c = random_unit(rng);
    Vec3 tau = random_unit(rng);
    tau = (tau - tau.dot(c) * c) * 0.8;
    const MotionParam e{0.9, tau};
    const Vec3 x = 1.3 * random_unit(rng);
    const Vec3 velocity = motion_velocity(c, e, x);
    double previous_error = 0.0;
    for (const double t : {1e-3, 1e-4}) {
      const MotionParam scaled{t * e.alpha, t * e.tau};
      const Vec3 fd = (rigid_motion(c, scaled, x) - x) / t;
      const double error = (fd - velocity).norm();
      CHECK(error < 10.0 * t * (x.norm() + 1.0));
      if (previous_error > 0.0) CHECK(error < previous_error);
      previous_error = error;
    }
  }
}

TEST_CASE("feasibility of configurations") {
  ModelParams params;
  const Particle north = Particle::from_points({Vec3(0, 0, 1.2)}, params, Vec3(0, 0, 1));
  const Particle south = Particle::from_points({Vec3(0, 0, -1.2)}, params, Vec3(0, 0, -1));

  SUBCASE("opposite poles feasible") {
    CHECK(check_feasible({north, south}, Configuration(2), params));
  }
  SUBCASE("collision infeasible") {
    // move the south particle onto the north one
    Configuration p(2);
    p[1].tau = Vec3(kPi, 0, 0) * -1.0;
    const auto moved = moved_particles({north, south}, p);
    CHECK((moved[1].sites[0] - Vec3(0, 0, 1)).norm() < 1e-12);
    CHECK_FALSE(check_feasible({north, south}, p, params));
  }
  SUBCASE("single particle always feasible") {
    CHECK(check_feasible({north}, Configuration(1), params));
  }
}

TEST_CASE("particle file parsing") {
  ModelParams params;
  const std::string path = "test_particles.txt";
  {
    std::ofstream out(path);
    out << "# two particles\n";
    out << "particle\n";
    out << "centre 0 0 1\n";
    out << "point 0 0 1.25\n";
    out << "point 0.1 0 1.1 height 0.5\n";
    out << "particle\n";
    out << "point 0 0 -1.2\n";
  }
  const auto particles = load_particle_file(path, params);
  REQUIRE(particles.size() == 2);
  CHECK(particles[0].centre.isApprox(Vec3(0, 0, 1), 1e-14));
  CHECK(particles[0].heights[0] == doctest::Approx(0.25));
  CHECK(particles[0].heights[1] == doctest::Approx(0.5));
  // explicit height moved the point radially
  CHECK(particles[0].points[1].norm() == doctest::Approx(1.5));
  CHECK(particles[1].centre.isApprox(Vec3(0, 0, -1), 1e-14));
  CHECK(particles[1].heights[0] == doctest::Approx(0.2));
  std::remove(path.c_str());
}
