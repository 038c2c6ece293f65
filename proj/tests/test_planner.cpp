#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <sgp/planner.hpp>

using namespace sgp;
using Catch::Matchers::WithinAbs;

namespace {

RobotModel two_link() { return RobotModel::chain({1.0, 1.0}); }

// One-link arm with the reachable circle blocked at +/- 90 degrees; joint
// values near 0 and near pi end up in different free components.
struct SplitWorld {
  RobotModel model = RobotModel::chain({1.0}, 0.05);
  World world;
  SplitWorld() {
    world.obstacles.push_back({{0.0, 1.0}, 0.3});
    world.obstacles.push_back({{0.0, -1.0}, 0.3});
  }
};

PlannerParams quick(std::uint64_t seed, int iters = 300) {
  PlannerParams p;
  p.seed = seed;
  p.max_iterations = iters;
  return p;
}

}  // namespace

TEST_CASE("planning to the start itself succeeds immediately") {
  const RobotModel model = two_link();
  const World world;
  const JointConfig q{0.4, -0.2};
  const PlanResult res =
      rrt_connect(model, world, q, q, JointBounds::full(model), quick(1));
  CHECK(res.success);
  REQUIRE(res.path.size() == 1);
  CHECK(res.path[0] == q);
  CHECK(res.cost_checks == 2);  // start and goal validation only
}

TEST_CASE("identical seeds give identical plans and costs") {
  const RobotModel model = two_link();
  World world;
  world.obstacles.push_back({{1.6, 0.8}, 0.3});
  const JointConfig start{-1.0, 0.5}, goal{1.4, -0.8};
  const auto bounds = JointBounds::full(model);
  const PlanResult a = rrt_connect(model, world, start, goal, bounds, quick(77, 5000));
  const PlanResult b = rrt_connect(model, world, start, goal, bounds, quick(77, 5000));
  REQUIRE(a.success);
  CHECK(a.path == b.path);
  CHECK(a.cost_checks == b.cost_checks);
  CHECK(a.iterations_used == b.iterations_used);
}

TEST_CASE("plans avoid obstacles and end at the goal") {
  const RobotModel model = two_link();
  World world;
  world.obstacles.push_back({{1.6, 0.8}, 0.3});
  const JointConfig start{-1.0, 0.5}, goal{1.4, -0.8};
  const PlanResult res =
      rrt_connect(model, world, start, goal, JointBounds::full(model), quick(7, 5000));
  REQUIRE(res.success);
  CHECK(res.path.front() == start);
  CHECK(res.path.back() == goal);
  CHECK(path_valid(model, world, res.path, 0.05));
}

TEST_CASE("a disconnected goal exhausts the iteration budget") {
  const SplitWorld s;
  const PlanResult res = rrt_connect(s.model, s.world, {kPi}, {0.0},
                                     JointBounds::full(s.model), quick(3, 200));
  CHECK_FALSE(res.success);
  CHECK(res.iterations_used == 200);
  CHECK(res.path.empty());
}

TEST_CASE("colliding or out-of-bounds endpoints are rejected up front") {
  const RobotModel model = two_link();
  World world;
  world.obstacles.push_back({{1.5, 0.0}, 0.3});
  const auto bounds = JointBounds::full(model);
  // Colliding start / colliding goal: a request error, not a planning failure.
  CHECK_THROWS_AS(rrt_connect(model, world, {0.0, 0.0}, {kPi / 2.0, 0.0}, bounds, quick(5)),
                  InvalidRequestError);
  CHECK_THROWS_AS(rrt_connect(model, world, {kPi / 2.0, 0.0}, {0.0, 0.0}, bounds, quick(5)),
                  InvalidRequestError);
  JointBounds box;
  box.lo = {0.0, 0.0};
  box.hi = {1.0, 1.0};
  CHECK_THROWS_AS(rrt_connect(model, World{}, {2.0, 0.0}, {0.5, 0.5}, box, quick(5)),
                  InvalidRequestError);
}

TEST_CASE("shortcut keeps a two-vertex path unchanged") {
  const RobotModel model = two_link();
  const World world;
  const std::vector<JointConfig> path{{0.0, 0.0}, {1.0, 1.0}};
  CHECK(shortcut(model, world, path, 50, 9) == path);
}

TEST_CASE("shortcut straightens a detour in free space") {
  const RobotModel model = two_link();
  const World world;
  const std::vector<JointConfig> path{{0.0, 0.0}, {0.0, 2.0}, {2.0, 2.0}};
  const auto smoothed = shortcut(model, world, path, 100, 4);
  CHECK(smoothed.front() == path.front());
  CHECK(smoothed.back() == path.back());
  CHECK(path_length(smoothed) < path_length(path));
  CHECK(path_valid(model, world, smoothed, 0.05));
}

TEST_CASE("shortcut never invalidates a path hugging an obstacle") {
  const RobotModel model = two_link();
  World world;
  world.obstacles.push_back({{1.6, 0.8}, 0.3});
  const JointConfig start{-1.0, 0.5}, goal{1.4, -0.8};
  const PlanResult res =
      rrt_connect(model, world, start, goal, JointBounds::full(model), quick(11, 5000));
  REQUIRE(res.success);
  const auto smoothed = shortcut(model, world, res.path, 200, 13);
  CHECK(path_valid(model, world, smoothed, 0.05));
  CHECK(path_length(smoothed) <= path_length(res.path) + 1e-12);
}

TEST_CASE("range shaping pads the bounding box of start and subgoal") {
  const RobotModel model = two_link();
  const JointBounds b = shape_range({0.0, 0.0}, {1.0, -1.0}, {0.5, 0.2}, model);
  CHECK_THAT(b.lo[0], WithinAbs(-0.5, 1e-15));
  CHECK_THAT(b.hi[0], WithinAbs(1.5, 1e-15));
  CHECK_THAT(b.lo[1], WithinAbs(-1.2, 1e-15));
  CHECK_THAT(b.hi[1], WithinAbs(0.2, 1e-15));
}

TEST_CASE("range shaping clamps to the joint limits") {
  const RobotModel model = two_link();  // limits +/- 2*pi
  const JointBounds b = shape_range({6.0, 0.0}, {6.2, 0.0}, {0.5, 0.5}, model);
  CHECK(b.hi[0] == kTwoPi);
  CHECK_THAT(b.lo[0], WithinAbs(5.5, 1e-15));
}

TEST_CASE("range shaping of a degenerate pair is a padded point") {
  const RobotModel model = two_link();
  const JointConfig q{0.3, -0.4};
  const JointBounds b = shape_range(q, q, {0.25, 0.25}, model);
  CHECK_THAT(b.lo[0], WithinAbs(0.05, 1e-15));
  CHECK_THAT(b.hi[0], WithinAbs(0.55, 1e-15));
  CHECK_THAT(b.lo[1], WithinAbs(-0.65, 1e-15));
  CHECK_THAT(b.hi[1], WithinAbs(-0.15, 1e-15));
}

TEST_CASE("path length sums segment norms") {
  CHECK(path_length({{0.5, 0.5}}) == 0.0);
  CHECK_THAT(path_length({{0.0, 0.0}, {3.0, 4.0}}), WithinAbs(5.0, 1e-15));
  const std::vector<JointConfig> abc{{0.0, 0.0}, {1.0, 2.0}, {-1.0, 3.0}};
  const double ab = path_length({abc[0], abc[1]});
  const double bc = path_length({abc[1], abc[2]});
  CHECK_THAT(path_length(abc), WithinAbs(ab + bc, 1e-12));
}

TEST_CASE("default paddings taper with joint depth") {
  const auto p = default_paddings(3);
  REQUIRE(p.size() == 3);
  CHECK(p[0] >= p[1]);
  CHECK(p[1] >= p[2]);
  CHECK(p[2] > 0.0);
}
