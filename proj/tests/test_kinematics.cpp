#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <sgp/kinematics.hpp>

using namespace sgp;
using Catch::Matchers::WithinAbs;

namespace {
RobotModel two_link() { return RobotModel::chain({1.0, 1.0}); }
}  // namespace

TEST_CASE("forward kinematics of a straight two-link arm") {
  const auto pts = forward_kinematics(two_link(), {0.0, 0.0});
  REQUIRE(pts.size() == 3);
  CHECK_THAT(pts[0].x, WithinAbs(0.0, 1e-15));
  CHECK_THAT(pts[0].y, WithinAbs(0.0, 1e-15));
  CHECK_THAT(pts[1].x, WithinAbs(1.0, 1e-15));
  CHECK_THAT(pts[1].y, WithinAbs(0.0, 1e-15));
  CHECK_THAT(pts[2].x, WithinAbs(2.0, 1e-15));
  CHECK_THAT(pts[2].y, WithinAbs(0.0, 1e-15));
}

TEST_CASE("forward kinematics rotates with the base joint") {
  const auto pts = forward_kinematics(two_link(), {kPi / 2.0, 0.0});
  REQUIRE(pts.size() == 3);
  CHECK_THAT(pts[1].x, WithinAbs(0.0, 1e-12));
  CHECK_THAT(pts[1].y, WithinAbs(1.0, 1e-12));
  CHECK_THAT(pts[2].x, WithinAbs(0.0, 1e-12));
  CHECK_THAT(pts[2].y, WithinAbs(2.0, 1e-12));
}

TEST_CASE("forward kinematics accumulates joint angles") {
  const double h = std::sqrt(2.0) / 2.0;
  const auto pts = forward_kinematics(two_link(), {kPi / 4.0, kPi / 4.0});
  REQUIRE(pts.size() == 3);
  CHECK_THAT(pts[1].x, WithinAbs(h, 1e-12));
  CHECK_THAT(pts[1].y, WithinAbs(h, 1e-12));
  // Second joint adds another 45 degrees; the tip ends straight above elbow.
  CHECK_THAT(pts[2].x, WithinAbs(h, 1e-12));
  CHECK_THAT(pts[2].y, WithinAbs(h + 1.0, 1e-12));
}

TEST_CASE("forward kinematics rejects mismatched configurations") {
  CHECK_THROWS_AS(forward_kinematics(two_link(), {0.0}), InvalidArgumentError);
}

TEST_CASE("positional encoding at the origin") {
  const auto e0 = positional_encode({0.0}, 0);
  REQUIRE(e0 == std::vector<double>{0.0, 1.0, 0.0});
  const auto e1 = positional_encode({0.0}, 1);
  REQUIRE(e1 == std::vector<double>{0.0, 1.0, 0.0, 1.0, 0.0});
}

TEST_CASE("positional encoding doubles the frequency per level") {
  const auto e = positional_encode({kPi / 2.0}, 1);
  REQUIRE(e.size() == 5);
  CHECK_THAT(e[0], WithinAbs(kPi / 2.0, 1e-15));
  CHECK_THAT(e[1], WithinAbs(0.0, 1e-12));   // cos(pi/2)
  CHECK_THAT(e[2], WithinAbs(1.0, 1e-12));   // sin(pi/2)
  CHECK_THAT(e[3], WithinAbs(-1.0, 1e-12));  // cos(pi)
  CHECK_THAT(e[4], WithinAbs(0.0, 1e-12));   // sin(pi)
}

TEST_CASE("positional encoding size matches its layout") {
  CHECK(positional_encode_size(1, 0) == 3);
  CHECK(positional_encode_size(1, 1) == 5);
  CHECK(positional_encode(std::vector<double>(3, 0.1), 2).size() ==
        positional_encode_size(3, 2));
}

TEST_CASE("feature distance vanishes on identical configurations") {
  const FeatureParams fp{0.5, 2};
  const JointConfig q{0.3, -1.2};
  CHECK(feature_distance_sq(q, q, two_link(), fp) == 0.0);
}

TEST_CASE("feature distance reduces to workspace terms at alpha one") {
  // Arm folded back: both intermediate points mirror through the origin, so
  // the squared endpoint displacements are 4 and 16.
  const FeatureParams fp{1.0, 2};
  const double d = feature_distance_sq({0.0, 0.0}, {kPi, 0.0}, two_link(), fp);
  CHECK_THAT(d, WithinAbs(20.0, 1e-9));
}

TEST_CASE("feature distance reduces to joint terms at alpha zero") {
  // One full turn: every cos/sin channel matches, only the raw angle differs.
  const FeatureParams fp{0.0, 0};
  const RobotModel one = RobotModel::chain({1.0});
  const double d = feature_distance_sq({0.0}, {kTwoPi}, one, fp);
  CHECK_THAT(d, WithinAbs(kTwoPi * kTwoPi, 1e-9));
}

TEST_CASE("feature distance gradient matches finite differences") {
  const FeatureParams fp{0.5, 2};
  const RobotModel model = two_link();
  const JointConfig x{0.4, -0.7};
  const JointConfig x_hat{-0.2, 1.1};
  const auto grad = feature_distance_grad(x, x_hat, model, fp);
  REQUIRE(grad.size() == 2);
  const double h = 1e-6;
  for (std::size_t i = 0; i < 2; ++i) {
    JointConfig plus = x_hat, minus = x_hat;
    plus[i] += h;
    minus[i] -= h;
    const double fd = (feature_distance_sq(x, plus, model, fp) -
                       feature_distance_sq(x, minus, model, fp)) /
                      (2.0 * h);
    CHECK_THAT(grad[i], WithinAbs(fd, 1e-5));
  }
}

TEST_CASE("joint distance is the L2 norm of the difference") {
  CHECK_THAT(joint_distance({0.0, 0.0}, {3.0, 4.0}), WithinAbs(5.0, 1e-15));
  CHECK(joint_distance_inf({0.0, 1.0}, {2.0, 1.5}) == 2.0);
}

TEST_CASE("clamp and limit checks follow the joint bounds") {
  RobotModel m = RobotModel::chain({1.0, 1.0}, 0.05, -1.0, 1.0);
  CHECK(m.within_limits({0.5, -0.5}));
  CHECK_FALSE(m.within_limits({1.5, 0.0}));
  const JointConfig c = m.clamp({1.5, -2.0});
  CHECK(c == JointConfig{1.0, -1.0});
}
