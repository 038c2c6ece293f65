#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgp/common.hpp"
#include "sgp/cvae.hpp"
#include "sgp/dataset.hpp"
#include "sgp/distribution.hpp"
#include "sgp/neuralnet.hpp"
#include "sgp/world.hpp"

namespace sgp {

struct EstimatorConfig {
  DistFamily family = DistFamily::lognormal;
  double w = 1.0;          // weight of the parameter-matching term
  double sigma_min = 0.05; // floor for predicted/empirical sigma (normalized space)
  int hidden = 64;

  void validate() const {
    if (!(w >= 0.0)) throw InvalidArgumentError("estimator: w must be >= 0");
    if (!(sigma_min > 0.0)) throw InvalidArgumentError("estimator: sigma_min must be > 0");
    if (hidden < 1) throw InvalidArgumentError("estimator: hidden width must be >= 1");
  }
};

// Dataset-level standardization constants. For the lognormal family they
// describe ln(cost); for the normal family, raw cost.
struct Normalization {
  double mean = 0.0;
  double std = 1.0;
};

inline constexpr double kLogSigmaRawMax = 10.0;

// Predicts the plan-cost distribution for reaching a candidate configuration
// from an anchor. The condition encoder is a frozen copy (typically taken
// from a trained generator); only the head is trainable.
struct TimeEstimator {
  EstimatorConfig config;
  CvaeConfig cond_config;  // shapes the condition input (obstacle slots, encodings)
  DenseNetwork cond;       // frozen
  DenseNetwork head;       // condition features -> (mu, raw log sigma)
  Normalization norm;

  static TimeEstimator from_encoder(const EstimatorConfig& config,
                                    const CvaeConfig& cond_config,
                                    const DenseNetwork& cond, std::uint64_t seed) {
    config.validate();
    TimeEstimator est;
    est.config = config;
    est.cond_config = cond_config;
    est.cond = cond;
    Rng rng(derive_seed(seed, 0x7e));
    est.head = DenseNetwork::create(
        {cond.output_size(), static_cast<std::size_t>(config.hidden), 2}, rng);
    return est;
  }

  static TimeEstimator from_cvae(const EstimatorConfig& config, const CvaeModel& cvae,
                                 std::uint64_t seed) {
    return from_encoder(config, cvae.config, cvae.cond, seed);
  }

  // Standalone variant with a freshly initialized (still frozen) encoder.
  static TimeEstimator fresh(const RobotModel& model, const EstimatorConfig& config,
                             const CvaeConfig& cond_config, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x1f));
    DenseNetwork cond = DenseNetwork::create(
        {condition_input_size(model.dof(), cond_config),
         static_cast<std::size_t>(cond_config.cond_hidden),
         static_cast<std::size_t>(cond_config.cond_out)},
        rng);
    return from_encoder(config, cond_config, cond, seed);
  }
};

namespace detail {

inline double normalize_sample(const TimeEstimator& est, double t) {
  if (est.config.family == DistFamily::lognormal) {
    if (!(t > 0.0)) throw DomainError("estimator: nonpositive cost under lognormal");
    return (std::log(t) - est.norm.mean) / est.norm.std;
  }
  return (t - est.norm.mean) / est.norm.std;
}

struct HeadEval {
  double mu = 0.0;
  double log_sigma = 0.0;  // after clamping
  bool sigma_clamped = false;
  ForwardTrace trace;
};

inline HeadEval eval_head(const TimeEstimator& est, const World& world,
                          const JointConfig& from, const JointConfig& candidate) {
  const auto cond_in = condition_input(world, from, candidate, est.cond_config);
  const auto cond_feat = forward(est.cond, cond_in);
  HeadEval ev;
  const auto out = forward(est.head, cond_feat, &ev.trace);
  ev.mu = out[0];
  const double lo = std::log(est.config.sigma_min);
  ev.log_sigma = std::clamp(out[1], lo, kLogSigmaRawMax);
  ev.sigma_clamped = out[1] < lo || out[1] > kLogSigmaRawMax;
  return ev;
}

}  // namespace detail

// ============================================================================
// Prediction
// ============================================================================

// Predicted cost distribution in raw check-count space.
inline DistParams predict_dist(const TimeEstimator& est, const World& world,
                               const JointConfig& from, const JointConfig& candidate) {
  const auto ev = detail::eval_head(est, world, from, candidate);
  const double sigma_hat = std::exp(ev.log_sigma);
  return DistParams{est.config.family, est.norm.mean + est.norm.std * ev.mu,
                    est.norm.std * sigma_hat};
}

// Upper-confidence cost estimate, never below one check.
inline double predict_t95(const TimeEstimator& est, const World& world,
                          const JointConfig& from, const JointConfig& candidate,
                          double confidence = 0.95) {
  return std::max(1.0, quantile(predict_dist(est, world, from, candidate), confidence));
}

// ============================================================================
// Training loss
// ============================================================================

// Negative log likelihood of the normalized samples under N(mu, sigma^2) plus
// a squared-error pull toward the empirically fitted (mu, log sigma). Head
// gradients only: the condition encoder stays frozen.
inline double estimator_loss(const TimeEstimator& est, const World& world,
                             const JointConfig& from, const JointConfig& candidate,
                             std::span<const std::int64_t> costs,
                             ParamBlock* head_grads = nullptr) {
  if (costs.size() < 2) throw InvalidArgumentError("estimator_loss: need >= 2 samples");
  double mean_nu = 0.0;
  for (const auto c : costs)
    mean_nu += detail::normalize_sample(est, static_cast<double>(c));
  mean_nu /= static_cast<double>(costs.size());
  double var_nu = 0.0;
  for (const auto c : costs) {
    const double d = detail::normalize_sample(est, static_cast<double>(c)) - mean_nu;
    var_nu += d * d;
  }
  var_nu /= static_cast<double>(costs.size());
  const double emp_mu = mean_nu;
  const double emp_log_sigma = std::log(std::max(std::sqrt(var_nu), est.config.sigma_min));

  const auto ev = detail::eval_head(est, world, from, candidate);
  const double sigma = std::exp(ev.log_sigma);
  const double spread = var_nu + (mean_nu - ev.mu) * (mean_nu - ev.mu);
  const double nll = ev.log_sigma + kHalfLog2Pi + spread / (2.0 * sigma * sigma);
  const double dmu = ev.mu - emp_mu;
  const double dls = ev.log_sigma - emp_log_sigma;
  const double loss = nll + est.config.w * (dmu * dmu + dls * dls);

  if (head_grads) {
    std::vector<double> upstream(2);
    upstream[0] = (ev.mu - mean_nu) / (sigma * sigma) + 2.0 * est.config.w * dmu;
    upstream[1] = ev.sigma_clamped
                      ? 0.0
                      : 1.0 - spread / (sigma * sigma) + 2.0 * est.config.w * dls;
    backward(est.head, ev.trace, upstream, *head_grads);
  }
  return loss;
}

// ============================================================================
// Training
// ============================================================================

struct EstimatorTrainParams {
  int epochs = 50;
  int minibatch = 128;
  AdamConfig adam{};
};

// Fits the head on both directions of every record (start->waypoint and
// goal->waypoint). Sets the normalization constants from the full sample pool
// first; with epochs == 0 only that calibration happens. Returns the mean
// loss per epoch.
inline std::vector<double> train_estimator(TimeEstimator& est,
                                           std::span<const WaypointRecord> records,
                                           const EstimatorTrainParams& train,
                                           std::uint64_t seed) {
  if (records.empty()) throw DataError("train_estimator: empty dataset");
  if (train.epochs < 0) throw InvalidArgumentError("train_estimator: epochs must be >= 0");
  if (train.minibatch < 1)
    throw InvalidArgumentError("train_estimator: minibatch must be >= 1");

  // Dataset-level standardization over every cost sample in scope.
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (const auto& rec : records) {
    for (const auto* costs : {&rec.from_start_costs, &rec.from_goal_costs}) {
      for (const auto c : *costs) {
        double v = static_cast<double>(c);
        if (est.config.family == DistFamily::lognormal) {
          if (!(v > 0.0)) throw DataError("train_estimator: nonpositive cost sample");
          v = std::log(v);
        }
        sum += v;
        sum_sq += v * v;
        ++n;
      }
    }
  }
  if (n < 2) throw DataError("train_estimator: not enough cost samples");
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(sum_sq / static_cast<double>(n) - mean * mean, 0.0);
  est.norm.mean = mean;
  est.norm.std = std::max(std::sqrt(var), 1e-9);

  struct Row {
    const WaypointRecord* rec;
    int direction;  // 0: from start, 1: from goal
  };
  std::vector<Row> rows;
  rows.reserve(records.size() * 2);
  for (const auto& rec : records) {
    if (rec.from_start_costs.size() >= 2) rows.push_back({&rec, 0});
    if (rec.from_goal_costs.size() >= 2) rows.push_back({&rec, 1});
  }
  if (rows.empty()) throw DataError("train_estimator: no usable rows");

  AdamState adam = AdamState::create(est.head, train.adam);
  Rng rng(derive_seed(seed, 0x7d));
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(train.epochs));
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
    double epoch_loss = 0.0;
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      const std::size_t batch = std::min<std::size_t>(
          static_cast<std::size_t>(train.minibatch), order.size() - cursor);
      ParamBlock grads = est.head.zero_gradients();
      for (std::size_t b = 0; b < batch; ++b) {
        const Row& row = rows[order[cursor + b]];
        const auto& from = row.direction == 0 ? row.rec->start : row.rec->goal;
        const auto& costs =
            row.direction == 0 ? row.rec->from_start_costs : row.rec->from_goal_costs;
        epoch_loss += estimator_loss(est, row.rec->world, from, row.rec->waypoint,
                                     costs, &grads);
      }
      grads.scale(1.0 / static_cast<double>(batch));
      adam_step(est.head, grads, adam);
      cursor += batch;
    }
    history.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return history;
}

// ============================================================================
// Checkpointing
// ============================================================================

inline nlohmann::json estimator_to_json(const TimeEstimator& est) {
  nlohmann::json j;
  j["family"] = family_name(est.config.family);
  j["w"] = est.config.w;
  j["sigma_min"] = est.config.sigma_min;
  j["hidden"] = est.config.hidden;
  j["cond_config"] = {{"latent_dim", est.cond_config.latent_dim},
                      {"beta", est.cond_config.beta},
                      {"k_max", est.cond_config.k_max},
                      {"alpha", est.cond_config.features.alpha},
                      {"levels", est.cond_config.features.levels},
                      {"cond_hidden", est.cond_config.cond_hidden},
                      {"cond_out", est.cond_config.cond_out},
                      {"enc_hidden", est.cond_config.enc_hidden},
                      {"dec_hidden", est.cond_config.dec_hidden}};
  j["norm"] = {{"mean", est.norm.mean}, {"std", est.norm.std}};
  j["cond"] = net_to_json(est.cond);
  j["head"] = net_to_json(est.head);
  return j;
}

inline TimeEstimator estimator_from_json(const nlohmann::json& j) {
  TimeEstimator est;
  est.config.family = family_from_name(j.at("family").get<std::string>());
  est.config.w = j.at("w").get<double>();
  est.config.sigma_min = j.at("sigma_min").get<double>();
  est.config.hidden = j.at("hidden").get<int>();
  est.config.validate();
  const auto& c = j.at("cond_config");
  est.cond_config.latent_dim = c.at("latent_dim").get<int>();
  est.cond_config.beta = c.at("beta").get<double>();
  est.cond_config.k_max = c.at("k_max").get<int>();
  est.cond_config.features.alpha = c.at("alpha").get<double>();
  est.cond_config.features.levels = c.at("levels").get<int>();
  est.cond_config.cond_hidden = c.at("cond_hidden").get<int>();
  est.cond_config.cond_out = c.at("cond_out").get<int>();
  est.cond_config.enc_hidden = c.at("enc_hidden").get<int>();
  est.cond_config.dec_hidden = c.at("dec_hidden").get<int>();
  est.norm.mean = j.at("norm").at("mean").get<double>();
  est.norm.std = j.at("norm").at("std").get<double>();
  est.cond = net_from_json(j.at("cond"));
  est.head = net_from_json(j.at("head"));
  return est;
}

inline void save_estimator(const TimeEstimator& est, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << estimator_to_json(est).dump(2) << "\n";
}

inline TimeEstimator load_estimator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelMissingError("model file not found: " + path);
  try {
    nlohmann::json j;
    in >> j;
    return estimator_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model file ") + path + ": " + e.what(), 0);
  }
}

}  // namespace sgp
