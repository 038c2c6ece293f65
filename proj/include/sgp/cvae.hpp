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
#include "sgp/dataset.hpp"
#include "sgp/kinematics.hpp"
#include "sgp/neuralnet.hpp"
#include "sgp/world.hpp"

namespace sgp {

// Clamp range for the posterior log-stddev outputs. Outside it the sample
// either collapses or blows up numerically; gradients are cut at the rails.
inline constexpr double kLogSigmaMin = -6.0;
inline constexpr double kLogSigmaMax = 2.0;

struct CvaeConfig {
  int latent_dim = 4;
  double beta = 0.01;
  int k_max = kDefaultMaxObstacles;
  FeatureParams features{};
  int cond_hidden = 64;
  int cond_out = 32;
  int enc_hidden = 64;
  int dec_hidden = 64;

  void validate() const {
    if (latent_dim < 1) throw InvalidArgumentError("cvae: latent_dim must be >= 1");
    if (!(beta >= 0.0)) throw InvalidArgumentError("cvae: beta must be >= 0");
    if (k_max < 1) throw InvalidArgumentError("cvae: k_max must be >= 1");
    if (cond_hidden < 1 || cond_out < 1 || enc_hidden < 1 || dec_hidden < 1)
      throw InvalidArgumentError("cvae: layer widths must be >= 1");
  }
};

// Builds the network input describing one planning context: obstacle slots
// followed by the positional encodings of the two anchor configurations.
inline std::vector<double> condition_input(const World& world, const JointConfig& a,
                                           const JointConfig& b, const CvaeConfig& config) {
  std::vector<double> in = encode_world(world, config.k_max);
  const auto pa = positional_encode(a, config.features.levels);
  const auto pb = positional_encode(b, config.features.levels);
  in.insert(in.end(), pa.begin(), pa.end());
  in.insert(in.end(), pb.begin(), pb.end());
  return in;
}

inline std::size_t condition_input_size(std::size_t dof, const CvaeConfig& config) {
  return 3 * static_cast<std::size_t>(config.k_max) +
         2 * positional_encode_size(dof, config.features.levels);
}

// Condition encoder + posterior encoder + decoder. The condition encoder is
// shared downstream (the planning-time estimator reuses it frozen).
struct CvaeModel {
  CvaeConfig config;
  DenseNetwork cond;  // context -> compact condition features
  DenseNetwork enc;   // (condition features, encoded waypoint) -> (mu, log sigma)
  DenseNetwork dec;   // (condition features, z) -> joint config

  static CvaeModel create(const RobotModel& model, const CvaeConfig& config,
                          std::uint64_t seed) {
    config.validate();
    const auto n = model.dof();
    const auto pe = positional_encode_size(n, config.features.levels);
    CvaeModel cvae;
    cvae.config = config;
    Rng rng_c(derive_seed(seed, 1));
    Rng rng_e(derive_seed(seed, 2));
    Rng rng_d(derive_seed(seed, 3));
    cvae.cond = DenseNetwork::create(
        {condition_input_size(n, config), static_cast<std::size_t>(config.cond_hidden),
         static_cast<std::size_t>(config.cond_out)},
        rng_c);
    cvae.enc = DenseNetwork::create(
        {static_cast<std::size_t>(config.cond_out) + pe,
         static_cast<std::size_t>(config.enc_hidden),
         2 * static_cast<std::size_t>(config.latent_dim)},
        rng_e);
    cvae.dec = DenseNetwork::create(
        {static_cast<std::size_t>(config.cond_out) +
             static_cast<std::size_t>(config.latent_dim),
         static_cast<std::size_t>(config.dec_hidden), n},
        rng_d);
    return cvae;
  }
};

// Compact condition features for a planning context under a fixed model.
inline std::vector<double> encode_condition(const CvaeModel& cvae, const World& world,
                                            const JointConfig& start,
                                            const JointConfig& goal) {
  return forward(cvae.cond, condition_input(world, start, goal, cvae.config));
}

// Reparametrized posterior draw: z = mu + sigma * eps, eps ~ N(0, I).
inline std::vector<double> sample_latent(std::span<const double> mu,
                                         std::span<const double> sigma, Rng& rng) {
  if (mu.size() != sigma.size())
    throw InvalidArgumentError("sample_latent: size mismatch");
  std::vector<double> z(mu.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = mu[i] + sigma[i] * rng.gaussian();
  return z;
}

// KL(N(mu, diag(sigma^2)) || N(0, I)) with sigma supplied as log sigma.
inline double kl_normal(std::span<const double> mu, std::span<const double> log_sigma) {
  if (mu.size() != log_sigma.size())
    throw InvalidArgumentError("kl_normal: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    acc += std::exp(2.0 * log_sigma[i]) + mu[i] * mu[i] - 1.0 - 2.0 * log_sigma[i];
  return 0.5 * acc;
}

struct CvaeLossReport {
  double reconstruction = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

struct CvaeGradients {
  DenseNetwork cond, enc, dec;  // same shapes, used as gradient accumulators
};

inline CvaeGradients make_gradients(const CvaeModel& cvae) {
  return {DenseNetwork::zeros(cvae.cond.layer_sizes),
          DenseNetwork::zeros(cvae.enc.layer_sizes),
          DenseNetwork::zeros(cvae.dec.layer_sizes)};
}

// Training objective for one record with the reparametrized sample fixed by
// `eps` (one draw per latent dimension). When `grads` is given, accumulates
// exact parameter gradients for all three networks.
inline CvaeLossReport cvae_loss(const RobotModel& model, const CvaeModel& cvae,
                                const World& world, const JointConfig& start,
                                const JointConfig& goal, const JointConfig& waypoint,
                                std::span<const double> eps,
                                CvaeGradients* grads = nullptr) {
  const auto m = static_cast<std::size_t>(cvae.config.latent_dim);
  if (eps.size() != m) throw InvalidArgumentError("cvae_loss: eps size mismatch");
  const auto cond_out = static_cast<std::size_t>(cvae.config.cond_out);

  const auto cond_in = condition_input(world, start, goal, cvae.config);
  ForwardTrace trace_c;
  const auto cond_feat = forward(cvae.cond, cond_in, &trace_c);

  const auto pe_x = positional_encode(waypoint, cvae.config.features.levels);
  std::vector<double> enc_in = cond_feat;
  enc_in.insert(enc_in.end(), pe_x.begin(), pe_x.end());
  ForwardTrace trace_e;
  const auto enc_out = forward(cvae.enc, enc_in, &trace_e);

  std::vector<double> mu(m), log_sigma(m), sigma(m);
  std::vector<bool> clamped(m);
  for (std::size_t i = 0; i < m; ++i) {
    mu[i] = enc_out[i];
    log_sigma[i] = std::clamp(enc_out[m + i], kLogSigmaMin, kLogSigmaMax);
    clamped[i] = enc_out[m + i] < kLogSigmaMin || enc_out[m + i] > kLogSigmaMax;
    sigma[i] = std::exp(log_sigma[i]);
  }

  std::vector<double> dec_in = cond_feat;
  for (std::size_t i = 0; i < m; ++i) dec_in.push_back(mu[i] + sigma[i] * eps[i]);
  ForwardTrace trace_d;
  const auto x_hat = forward(cvae.dec, dec_in, &trace_d);

  CvaeLossReport report;
  report.reconstruction =
      feature_distance_sq(waypoint, x_hat, model, cvae.config.features);
  report.kl = kl_normal(mu, log_sigma);
  report.total = report.reconstruction + cvae.config.beta * report.kl;

  if (grads) {
    const auto d_xhat = feature_distance_grad(waypoint, x_hat, model, cvae.config.features);
    const auto d_dec_in = backward(cvae.dec, trace_d, d_xhat, grads->dec.params);

    std::vector<double> d_enc_out(2 * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double dz = d_dec_in[cond_out + i];
      d_enc_out[i] = dz + cvae.config.beta * mu[i];
      if (!clamped[i])
        d_enc_out[m + i] = dz * eps[i] * sigma[i] +
                           cvae.config.beta * (sigma[i] * sigma[i] - 1.0);
    }
    const auto d_enc_in = backward(cvae.enc, trace_e, d_enc_out, grads->enc.params);

    std::vector<double> d_cond_feat(cond_out);
    for (std::size_t i = 0; i < cond_out; ++i)
      d_cond_feat[i] = d_dec_in[i] + d_enc_in[i];
    backward(cvae.cond, trace_c, d_cond_feat, grads->cond.params);
  }
  return report;
}

// ============================================================================
// Training
// ============================================================================

struct CvaeTrainParams {
  int epochs = 50;
  int minibatch = 128;
  AdamConfig adam{};
};

// Minibatch Adam over the dataset; returns the mean total loss per epoch.
// Fully deterministic given seed (shuffling, eps draws, update order).
inline std::vector<double> train_cvae(const RobotModel& model, CvaeModel& cvae,
                                      std::span<const WaypointRecord> records,
                                      const CvaeTrainParams& train, std::uint64_t seed) {
  if (records.empty()) throw DataError("train_cvae: empty dataset");
  if (train.epochs < 0) throw InvalidArgumentError("train_cvae: epochs must be >= 0");
  if (train.minibatch < 1) throw InvalidArgumentError("train_cvae: minibatch must be >= 1");
  const auto m = static_cast<std::size_t>(cvae.config.latent_dim);

  AdamState adam_c = AdamState::create(cvae.cond, train.adam);
  AdamState adam_e = AdamState::create(cvae.enc, train.adam);
  AdamState adam_d = AdamState::create(cvae.dec, train.adam);
  Rng rng(derive_seed(seed, 0xce));

  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(train.epochs));
  std::vector<double> eps(m);
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
    double epoch_loss = 0.0;
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      const std::size_t batch = std::min<std::size_t>(
          static_cast<std::size_t>(train.minibatch), order.size() - cursor);
      CvaeGradients grads = make_gradients(cvae);
      for (std::size_t b = 0; b < batch; ++b) {
        const WaypointRecord& rec = records[order[cursor + b]];
        for (auto& e : eps) e = rng.gaussian();
        epoch_loss += cvae_loss(model, cvae, rec.world, rec.start, rec.goal,
                                rec.waypoint, eps, &grads)
                          .total;
      }
      const double inv = 1.0 / static_cast<double>(batch);
      for (auto* g : {&grads.cond, &grads.enc, &grads.dec}) g->params.scale(inv);
      adam_step(cvae.cond, grads.cond.params, adam_c);
      adam_step(cvae.enc, grads.enc.params, adam_e);
      adam_step(cvae.dec, grads.dec.params, adam_d);
      cursor += batch;
    }
    history.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return history;
}

// ============================================================================
// Candidate generation
// ============================================================================

// Draws `count` subgoal candidates for the given context by sampling the
// prior and decoding. Outputs are clamped to joint limits.
inline std::vector<JointConfig> generate_candidates(const RobotModel& model,
                                                    const CvaeModel& cvae,
                                                    const World& world,
                                                    const JointConfig& from,
                                                    const JointConfig& to,
                                                    std::size_t count, Rng& rng) {
  const auto m = static_cast<std::size_t>(cvae.config.latent_dim);
  const auto cond_in = condition_input(world, from, to, cvae.config);
  const auto cond_feat = forward(cvae.cond, cond_in);
  std::vector<JointConfig> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> dec_in = cond_feat;
    for (std::size_t i = 0; i < m; ++i) dec_in.push_back(rng.gaussian());
    JointConfig q = model.clamp(forward(cvae.dec, dec_in));
    out.push_back(std::move(q));
  }
  return out;
}

// ============================================================================
// Checkpointing
// ============================================================================

inline nlohmann::json cvae_to_json(const CvaeModel& cvae) {
  nlohmann::json j;
  j["config"] = {{"latent_dim", cvae.config.latent_dim},
                 {"beta", cvae.config.beta},
                 {"k_max", cvae.config.k_max},
                 {"alpha", cvae.config.features.alpha},
                 {"levels", cvae.config.features.levels},
                 {"cond_hidden", cvae.config.cond_hidden},
                 {"cond_out", cvae.config.cond_out},
                 {"enc_hidden", cvae.config.enc_hidden},
                 {"dec_hidden", cvae.config.dec_hidden}};
  j["cond"] = net_to_json(cvae.cond);
  j["enc"] = net_to_json(cvae.enc);
  j["dec"] = net_to_json(cvae.dec);
  return j;
}

inline CvaeModel cvae_from_json(const nlohmann::json& j) {
  CvaeModel cvae;
  const auto& c = j.at("config");
  cvae.config.latent_dim = c.at("latent_dim").get<int>();
  cvae.config.beta = c.at("beta").get<double>();
  cvae.config.k_max = c.at("k_max").get<int>();
  cvae.config.features.alpha = c.at("alpha").get<double>();
  cvae.config.features.levels = c.at("levels").get<int>();
  cvae.config.cond_hidden = c.at("cond_hidden").get<int>();
  cvae.config.cond_out = c.at("cond_out").get<int>();
  cvae.config.enc_hidden = c.at("enc_hidden").get<int>();
  cvae.config.dec_hidden = c.at("dec_hidden").get<int>();
  cvae.config.validate();
  cvae.cond = net_from_json(j.at("cond"));
  cvae.enc = net_from_json(j.at("enc"));
  cvae.dec = net_from_json(j.at("dec"));
  return cvae;
}

inline void save_cvae(const CvaeModel& cvae, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << cvae_to_json(cvae).dump(2) << "\n";
}

inline CvaeModel load_cvae(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelMissingError("model file not found: " + path);
  try {
    nlohmann::json j;
    in >> j;
    return cvae_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model file ") + path + ": " + e.what(), 0);
  }
}

}  // namespace sgp
