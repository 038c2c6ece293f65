#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <vector>

#include <sgp/time_estimator.hpp>

using namespace sgp;
using Catch::Matchers::WithinAbs;

namespace {

RobotModel two_link() { return RobotModel::chain({1.0, 1.0}); }

CvaeConfig small_cond() {
  CvaeConfig c;
  c.latent_dim = 2;
  c.k_max = 4;
  c.cond_hidden = 12;
  c.cond_out = 6;
  return c;
}

TimeEstimator small_estimator(DistFamily family, std::uint64_t seed) {
  EstimatorConfig cfg;
  cfg.family = family;
  cfg.hidden = 8;
  return TimeEstimator::fresh(two_link(), cfg, small_cond(), seed);
}

// Cost samples tied to the anchor-to-waypoint distance, so the condition
// features carry real signal for the head to learn.
std::vector<WaypointRecord> distance_records(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<WaypointRecord> recs;
  for (int i = 0; i < count; ++i) {
    WaypointRecord rec;
    rec.problem_id = "r" + std::to_string(i);
    for (int j = 0; j < 2; ++j) {
      rec.start.push_back(rng.uniform(-1.5, 1.5));
      rec.goal.push_back(rng.uniform(-1.5, 1.5));
      rec.waypoint.push_back(rng.uniform(-1.5, 1.5));
    }
    const auto base = [&](const JointConfig& from) {
      return static_cast<std::int64_t>(20.0 + 120.0 * joint_distance(from, rec.waypoint));
    };
    const std::int64_t bs = base(rec.start), bg = base(rec.goal);
    rec.from_start_costs = {bs, bs + 2, bs + 5, bs + 9};
    rec.from_goal_costs = {bg, bg + 3, bg + 4, bg + 8};
    recs.push_back(std::move(rec));
  }
  return recs;
}

}  // namespace

TEST_CASE("the untrained loss matches the closed form") {
  TimeEstimator est = small_estimator(DistFamily::normal, 3);
  est.head.params.fill(0.0);  // mu_hat = 0, log sigma_hat = 0
  const std::vector<std::int64_t> costs{1, 3};  // normalized mean 2, variance 1

  // nll = log(1) + log(2*pi)/2 + (1 + 4)/2; empirical pull = (0-2)^2 + 0.
  const double nll_part = 0.91893853320467274178 + 2.5;
  const double loss_w1 = estimator_loss(est, World{}, {0.1, 0.2}, {0.5, -0.3}, costs);
  CHECK_THAT(loss_w1, WithinAbs(nll_part + 4.0, 1e-12));

  est.config.w = 0.0;
  const double loss_w0 = estimator_loss(est, World{}, {0.1, 0.2}, {0.5, -0.3}, costs);
  CHECK_THAT(loss_w0, WithinAbs(nll_part, 1e-12));
}

TEST_CASE("a perfectly matching head pays only the residual spread") {
  // Samples with mean 0 and variance 1 after normalization make the zero head
  // exactly the empirical fit, so the penalty vanishes for any w.
  TimeEstimator est = small_estimator(DistFamily::normal, 4);
  est.head.params.fill(0.0);
  const std::vector<std::int64_t> costs{-1, 1};  // mean 0, var 1
  est.config.w = 5.0;
  const double loss = estimator_loss(est, World{}, {0.0, 0.0}, {0.3, 0.3}, costs);
  CHECK_THAT(loss, WithinAbs(0.91893853320467274178 + 0.5, 1e-12));
}

TEST_CASE("lognormal losses reject nonpositive samples") {
  const TimeEstimator est = small_estimator(DistFamily::lognormal, 5);
  const std::vector<std::int64_t> costs{4, 0};
  CHECK_THROWS_AS(estimator_loss(est, World{}, {0.0, 0.0}, {0.1, 0.1}, costs),
                  DomainError);
}

TEST_CASE("head gradients match finite differences") {
  TimeEstimator est = small_estimator(DistFamily::lognormal, 7);
  World world;
  world.obstacles.push_back({{0.9, 0.9}, 0.3});
  const JointConfig from{0.2, -0.4}, cand{-0.6, 0.8};
  const std::vector<std::int64_t> costs{40, 55, 140, 90};

  ParamBlock grads = est.head.zero_gradients();
  estimator_loss(est, world, from, cand, costs, &grads);

  const double h = 1e-6;
  for (std::size_t l = 0; l < est.head.params.weights.size(); ++l)
    for (std::size_t i = 0; i < est.head.params.weights[l].size(); i += 3) {
      const double keep = est.head.params.weights[l][i];
      est.head.params.weights[l][i] = keep + h;
      const double up = estimator_loss(est, world, from, cand, costs);
      est.head.params.weights[l][i] = keep - h;
      const double dn = estimator_loss(est, world, from, cand, costs);
      est.head.params.weights[l][i] = keep;
      const double fd = (up - dn) / (2.0 * h);
      const double got = grads.weights[l][i];
      const double scale = std::max({1.0, std::abs(fd), std::abs(got)});
      REQUIRE(std::abs(got - fd) / scale < 1e-4);
    }
}

TEST_CASE("gradients for a rail-clamped spread are zeroed") {
  TimeEstimator est = small_estimator(DistFamily::normal, 9);
  // Drive the raw log-sigma output far below the clamp rail.
  est.head.params.fill(0.0);
  est.head.params.biases[1][1] = -50.0;
  const std::vector<std::int64_t> costs{2, 6};
  ParamBlock grads = est.head.zero_gradients();
  estimator_loss(est, World{}, {0.1, 0.1}, {0.4, 0.4}, costs, &grads);
  // The spread column of the output layer receives no gradient.
  for (std::size_t j = 0; j < est.head.layer_sizes[1]; ++j)
    CHECK(grads.weights[1][1 * est.head.layer_sizes[1] + j] == 0.0);
  CHECK(grads.biases[1][1] == 0.0);
}

TEST_CASE("training calibrates normalization from every cost sample") {
  TimeEstimator est = small_estimator(DistFamily::lognormal, 11);
  std::vector<WaypointRecord> recs(1);
  recs[0].problem_id = "r0";
  recs[0].start = {0.0, 0.0};
  recs[0].goal = {1.0, 1.0};
  recs[0].waypoint = {0.5, 0.5};
  recs[0].from_start_costs = {2, 4};
  recs[0].from_goal_costs = {8, 16};
  EstimatorTrainParams tp;
  tp.epochs = 0;
  const DenseNetwork head_before = est.head;
  const auto history = train_estimator(est, recs, tp, 21);
  CHECK(history.empty());
  CHECK(est.head.params.weights == head_before.params.weights);

  const double ln2 = std::log(2.0);
  CHECK_THAT(est.norm.mean, WithinAbs(2.5 * ln2, 1e-12));
  // Population std of {1,2,3,4} * ln 2.
  CHECK_THAT(est.norm.std, WithinAbs(std::sqrt(1.25) * ln2, 1e-12));
}

TEST_CASE("training lowers the loss and is reproducible") {
  const auto recs = distance_records(30, 31);
  EstimatorTrainParams tp;
  tp.epochs = 30;
  tp.minibatch = 8;

  TimeEstimator e1 = small_estimator(DistFamily::lognormal, 13);
  const auto h1 = train_estimator(e1, recs, tp, 99);
  REQUIRE(h1.size() == 30);
  CHECK(h1.back() < h1.front());

  TimeEstimator e2 = small_estimator(DistFamily::lognormal, 13);
  const auto h2 = train_estimator(e2, recs, tp, 99);
  CHECK(h1 == h2);
  CHECK(e1.head.params.weights == e2.head.params.weights);
}

TEST_CASE("predictions are reproducible and monotone in confidence") {
  TimeEstimator est = small_estimator(DistFamily::lognormal, 17);
  est.norm = {3.0, 0.8};
  World world;
  world.obstacles.push_back({{-0.7, 1.2}, 0.25});
  const JointConfig from{0.3, 0.3}, cand{-0.9, 0.6};
  CHECK(predict_t95(est, world, from, cand) == predict_t95(est, world, from, cand));
  const double q50 = predict_t95(est, world, from, cand, 0.5);
  const double q95 = predict_t95(est, world, from, cand, 0.95);
  const double q99 = predict_t95(est, world, from, cand, 0.99);
  CHECK(q50 < q95);
  CHECK(q95 < q99);
}

TEST_CASE("predicted costs never drop below one check") {
  TimeEstimator est = small_estimator(DistFamily::lognormal, 19);
  est.head.params.fill(0.0);
  est.norm = {-5.0, 0.1};  // distribution mass far below a single check
  CHECK(predict_t95(est, World{}, {0.0, 0.0}, {0.1, 0.1}) == 1.0);
}

TEST_CASE("prediction denormalizes through the calibration") {
  TimeEstimator est = small_estimator(DistFamily::normal, 23);
  est.head.params.fill(0.0);
  est.norm = {100.0, 40.0};
  const DistParams d = predict_dist(est, World{}, {0.0, 0.0}, {0.2, 0.2});
  CHECK(d.family == DistFamily::normal);
  CHECK_THAT(d.mu, WithinAbs(100.0, 1e-12));   // mu_hat = 0
  CHECK_THAT(d.sigma, WithinAbs(40.0, 1e-12)); // sigma_hat = 1
}

TEST_CASE("estimator checkpoints round-trip and report missing files") {
  namespace fs = std::filesystem;
  TimeEstimator est = small_estimator(DistFamily::normal, 29);
  est.norm = {12.0, 3.5};
  const auto path = fs::temp_directory_path() / "sgp_estimator_rt.ckpt";
  save_estimator(est, path.string());
  const TimeEstimator back = load_estimator(path.string());
  CHECK(back.config.family == est.config.family);
  CHECK(back.norm.mean == est.norm.mean);
  CHECK(back.norm.std == est.norm.std);
  CHECK(back.cond.params.weights == est.cond.params.weights);
  CHECK(back.head.params.weights == est.head.params.weights);
  fs::remove(path);
  CHECK_THROWS_AS(load_estimator((fs::temp_directory_path() / "nope.ckpt").string()),
                  ModelMissingError);
}
