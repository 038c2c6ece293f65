#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sgp/common.hpp"
#include "sgp/cvae.hpp"
#include "sgp/dataset.hpp"
#include "sgp/kinematics.hpp"
#include "sgp/planner.hpp"
#include "sgp/time_estimator.hpp"

namespace sgp {

// Every tunable default in one key=value document. Unknown keys are rejected;
// anything not set keeps the documented default.
struct RunConfig {
  // robot.*
  int robot_n = 3;
  std::vector<double> robot_links{1.0, 0.8, 0.6};
  double robot_link_radius = 0.05;
  std::vector<double> robot_joint_lo{-kTwoPi};  // broadcast to n when size 1
  std::vector<double> robot_joint_hi{kTwoPi};
  // feature.*
  double feature_alpha = 0.5;
  int feature_levels = 2;
  // world.*
  int world_k_max = 8;
  // planner.*
  double planner_step_size = 0.5;
  int planner_max_iterations = 10000;
  double planner_resolution = 0.05;
  // cost.*
  double cost_checks_per_second = 20000.0;
  // range.*
  std::vector<double> range_paddings;  // empty -> linear taper default
  // cvae.*
  int cvae_latent_dim = 4;
  double cvae_beta = 0.01;
  int cvae_batch = 32;
  int cvae_cond_hidden = 64;
  int cvae_cond_out = 32;
  int cvae_enc_hidden = 64;
  int cvae_dec_hidden = 64;
  // train.*
  double train_lr = 1e-3;
  double train_beta1 = 0.9;
  double train_beta2 = 0.999;
  double train_eps = 1e-8;
  int train_minibatch = 128;
  int train_epochs = 50;
  // time.*
  double time_w = 1.0;
  double time_sigma_min = 0.05;
  int time_hidden = 64;
  // select.*
  double select_confidence = 0.95;
  // data.*
  int data_runs = 30;
  int data_count = 5000;
  int data_shortcut_iterations = 100;
  int data_sample_retry_cap = 2000;
  int data_witness_retry_cap = 20;
  // eval.*
  double eval_budget_seconds = 0.05;
  int eval_max_trials = 10;
  int eval_replications = 10;
  int eval_runs_per_plan = 30;
  double eval_goal_eps = 1e-6;
  // sim.*
  double sim_joint_speed = 1.0;
  double sim_cycle_seconds = 0.5;
  double sim_max_seconds = 60.0;
  // worlds.*
  int worlds_count = 8;
  int worlds_obstacles = 4;
  double worlds_radius_min = 0.2;
  double worlds_radius_max = 0.5;
  double worlds_clearance = 0.4;
  double worlds_bound = 3.0;

  // ---- derived views ----------------------------------------------------

  RobotModel robot() const {
    RobotModel model;
    model.link_lengths = robot_links;
    model.link_radius = robot_link_radius;
    const std::size_t n = robot_links.size();
    if (robot_n != static_cast<int>(n))
      throw ConfigError("robot.n does not match robot.links length");
    auto broadcast = [n](const std::vector<double>& v, const char* key) {
      if (v.size() == 1) return std::vector<double>(n, v[0]);
      if (v.size() == n) return v;
      throw ConfigError(std::string(key) + " must have 1 or robot.n entries");
    };
    model.joint_lo = broadcast(robot_joint_lo, "robot.joint_lo");
    model.joint_hi = broadcast(robot_joint_hi, "robot.joint_hi");
    model.validate();
    return model;
  }

  PlannerParams planner() const {
    PlannerParams p;
    p.step_size = planner_step_size;
    p.max_iterations = planner_max_iterations;
    p.resolution = planner_resolution;
    p.validate();
    return p;
  }

  std::vector<double> paddings() const {
    if (!range_paddings.empty()) {
      if (range_paddings.size() != robot_links.size())
        throw ConfigError("range.paddings must have robot.n entries");
      return range_paddings;
    }
    return default_paddings(robot_links.size());
  }

  CvaeConfig cvae() const {
    CvaeConfig c;
    c.latent_dim = cvae_latent_dim;
    c.beta = cvae_beta;
    c.k_max = world_k_max;
    c.features = FeatureParams{feature_alpha, feature_levels};
    c.cond_hidden = cvae_cond_hidden;
    c.cond_out = cvae_cond_out;
    c.enc_hidden = cvae_enc_hidden;
    c.dec_hidden = cvae_dec_hidden;
    c.validate();
    return c;
  }

  EstimatorConfig estimator(DistFamily family) const {
    EstimatorConfig c;
    c.family = family;
    c.w = time_w;
    c.sigma_min = time_sigma_min;
    c.hidden = time_hidden;
    c.validate();
    return c;
  }

  AdamConfig adam() const { return {train_lr, train_beta1, train_beta2, train_eps}; }

  CvaeTrainParams cvae_train() const { return {train_epochs, train_minibatch, adam()}; }

  EstimatorTrainParams estimator_train() const {
    return {train_epochs, train_minibatch, adam()};
  }

  DatasetParams dataset() const {
    return {data_runs, data_shortcut_iterations, data_sample_retry_cap,
            data_witness_retry_cap};
  }

  double budget_checks() const { return eval_budget_seconds * cost_checks_per_second; }
};

namespace detail {

inline double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value '" + v + "' for key " + key);
  }
}

inline int parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long n = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return static_cast<int>(n);
  } catch (const std::exception&) {
    throw ConfigError("bad integer value '" + v + "' for key " + key);
  }
}

inline std::vector<double> parse_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty list element for key " + key);
    out.push_back(parse_double(item.substr(b, e - b + 1), key));
  }
  if (out.empty()) throw ConfigError("empty list for key " + key);
  return out;
}

inline const std::map<std::string, std::function<void(RunConfig&, const std::string&)>>&
config_setters() {
  using Setter = std::function<void(RunConfig&, const std::string&)>;
  auto d = [](double RunConfig::*field) {
    return Setter([field](RunConfig& c, const std::string& v) {
      c.*field = parse_double(v, "");
    });
  };
  auto i = [](int RunConfig::*field) {
    return Setter(
        [field](RunConfig& c, const std::string& v) { c.*field = parse_int(v, ""); });
  };
  auto l = [](std::vector<double> RunConfig::*field) {
    return Setter(
        [field](RunConfig& c, const std::string& v) { c.*field = parse_list(v, ""); });
  };
  static const std::map<std::string, Setter> setters = {
      {"robot.n", i(&RunConfig::robot_n)},
      {"robot.links", l(&RunConfig::robot_links)},
      {"robot.link_radius", d(&RunConfig::robot_link_radius)},
      {"robot.joint_lo", l(&RunConfig::robot_joint_lo)},
      {"robot.joint_hi", l(&RunConfig::robot_joint_hi)},
      {"feature.alpha", d(&RunConfig::feature_alpha)},
      {"feature.levels", i(&RunConfig::feature_levels)},
      {"world.k_max", i(&RunConfig::world_k_max)},
      {"planner.step_size", d(&RunConfig::planner_step_size)},
      {"planner.max_iterations", i(&RunConfig::planner_max_iterations)},
      {"planner.resolution", d(&RunConfig::planner_resolution)},
      {"cost.checks_per_second", d(&RunConfig::cost_checks_per_second)},
      {"range.paddings", l(&RunConfig::range_paddings)},
      {"cvae.latent_dim", i(&RunConfig::cvae_latent_dim)},
      {"cvae.beta", d(&RunConfig::cvae_beta)},
      {"cvae.batch", i(&RunConfig::cvae_batch)},
      {"cvae.cond_hidden", i(&RunConfig::cvae_cond_hidden)},
      {"cvae.cond_out", i(&RunConfig::cvae_cond_out)},
      {"cvae.enc_hidden", i(&RunConfig::cvae_enc_hidden)},
      {"cvae.dec_hidden", i(&RunConfig::cvae_dec_hidden)},
      {"train.lr", d(&RunConfig::train_lr)},
      {"train.beta1", d(&RunConfig::train_beta1)},
      {"train.beta2", d(&RunConfig::train_beta2)},
      {"train.eps", d(&RunConfig::train_eps)},
      {"train.minibatch", i(&RunConfig::train_minibatch)},
      {"train.epochs", i(&RunConfig::train_epochs)},
      {"time.w", d(&RunConfig::time_w)},
      {"time.sigma_min", d(&RunConfig::time_sigma_min)},
      {"time.hidden", i(&RunConfig::time_hidden)},
      {"select.confidence", d(&RunConfig::select_confidence)},
      {"data.runs", i(&RunConfig::data_runs)},
      {"data.count", i(&RunConfig::data_count)},
      {"data.shortcut_iterations", i(&RunConfig::data_shortcut_iterations)},
      {"data.sample_retry_cap", i(&RunConfig::data_sample_retry_cap)},
      {"data.witness_retry_cap", i(&RunConfig::data_witness_retry_cap)},
      {"eval.budget_seconds", d(&RunConfig::eval_budget_seconds)},
      {"eval.max_trials", i(&RunConfig::eval_max_trials)},
      {"eval.replications", i(&RunConfig::eval_replications)},
      {"eval.runs_per_plan", i(&RunConfig::eval_runs_per_plan)},
      {"eval.goal_eps", d(&RunConfig::eval_goal_eps)},
      {"sim.joint_speed", d(&RunConfig::sim_joint_speed)},
      {"sim.cycle_seconds", d(&RunConfig::sim_cycle_seconds)},
      {"sim.max_seconds", d(&RunConfig::sim_max_seconds)},
      {"worlds.count", i(&RunConfig::worlds_count)},
      {"worlds.obstacles", i(&RunConfig::worlds_obstacles)},
      {"worlds.radius_min", d(&RunConfig::worlds_radius_min)},
      {"worlds.radius_max", d(&RunConfig::worlds_radius_max)},
      {"worlds.clearance", d(&RunConfig::worlds_clearance)},
      {"worlds.bound", d(&RunConfig::worlds_bound)},
  };
  return setters;
}

}  // namespace detail

// Parses `key = value` lines; `#` starts a comment, blank lines are skipped,
// list values are comma-separated. Unknown keys raise ConfigError with the
// line number.
inline RunConfig parse_config(std::istream& in) {
  RunConfig config;
  const auto& setters = detail::config_setters();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    try {
      it->second(config, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + " (" + key + "): " + e.what());
    }
  }
  return config;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

}  // namespace sgp
