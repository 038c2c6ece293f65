// Command-line front end for the subgoal-planning toolkit. One binary,
// seven subcommands covering the full pipeline: world generation, dataset
// labeling, model training, static/dynamic evaluation and result export.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgp/sgp.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::uint64_t seed = 42;
  std::string out_dir = ".";
};

sgp::RunConfig effective_config(const GlobalOpts& g) {
  if (g.config_path.empty()) return sgp::RunConfig{};
  return sgp::load_config(g.config_path);
}

fs::path out_path(const GlobalOpts& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

std::vector<std::pair<std::string, sgp::World>> load_world_files(
    const std::vector<std::string>& paths) {
  std::vector<std::string> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::directory_iterator(p))
        if (entry.path().extension() == ".json") files.push_back(entry.path().string());
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(p);
    }
  }
  if (files.empty()) throw sgp::DataError("no world files found");
  std::vector<std::pair<std::string, sgp::World>> worlds;
  for (const auto& f : files)
    worlds.emplace_back(fs::path(f).stem().string(), sgp::load_scene(f).world);
  return worlds;
}

void print_summaries(const std::vector<sgp::EvalRow>& rows, double t_d) {
  std::cout << "variant        rows   succ%   <=1x   <=2x   <=4x   mean-cost  mean-len\n";
  for (const auto& s : sgp::summarize(rows, t_d)) {
    std::printf("%-14s %5zu  %5.1f  %5.1f  %5.1f  %5.1f  %10.1f  %8.3f\n",
                s.variant.c_str(), s.row_count, 100.0 * s.success_rate,
                100.0 * s.frac_1x, 100.0 * s.frac_2x, 100.0 * s.frac_4x, s.mean_cost,
                s.mean_length);
  }
}

// ---------------------------------------------------------------------------

int cmd_gen_worlds(const GlobalOpts& g) {
  const auto config = effective_config(g);
  sgp::WorldGenParams params;
  params.count = config.worlds_count;
  params.obstacles = config.worlds_obstacles;
  params.radius_min = config.worlds_radius_min;
  params.radius_max = config.worlds_radius_max;
  params.clearance = config.worlds_clearance;
  params.bound = config.worlds_bound;
  const auto worlds = sgp::generate_worlds(params, g.seed);
  fs::create_directories(fs::path(g.out_dir) / "worlds");
  for (const auto& [id, world] : worlds) {
    const auto path = fs::path(g.out_dir) / "worlds" / (id + ".json");
    sgp::save_scene({world, {}}, path.string());
    std::cout << path.string() << "\n";
  }
  return 0;
}

int cmd_gen_data(const GlobalOpts& g, const std::vector<std::string>& world_paths,
                 std::optional<int> count_override) {
  const auto config = effective_config(g);
  const auto model = config.robot();
  const auto worlds = load_world_files(world_paths);
  const int count = count_override.value_or(config.data_count);
  const auto problems =
      sgp::generate_problems(model, worlds, static_cast<std::size_t>(count),
                             sgp::derive_seed(g.seed, 0x9e), config.planner(),
                             config.dataset());
  const auto problems_path = out_path(g, "problems.jsonl");
  sgp::save_problems(problems, problems_path.string());
  std::vector<sgp::WaypointRecord> records;
  for (std::size_t p = 0; p < problems.size(); ++p) {
    auto recs = sgp::label_waypoints(model, problems[p], config.data_runs,
                                     config.planner(), sgp::derive_seed(g.seed, 0x1b, p));
    records.insert(records.end(), recs.begin(), recs.end());
  }
  const auto data_path = out_path(g, "data.jsonl");
  sgp::save_dataset(records, data_path.string());
  std::cout << problems_path.string() << "\n" << data_path.string() << "\n";
  std::cout << "problems=" << problems.size() << " records=" << records.size() << "\n";
  return 0;
}

int cmd_train_cvae(const GlobalOpts& g, const std::string& data_path,
                   double budget_seconds, std::optional<int> epochs,
                   const std::string& out_file) {
  const auto config = effective_config(g);
  const auto model = config.robot();
  const auto records = sgp::load_dataset(data_path);
  const double budget = budget_seconds * config.cost_checks_per_second;
  const auto kept = sgp::filter_training_set(records, budget);
  if (kept.empty()) throw sgp::DataError("no records within the training budget");
  auto cvae = sgp::CvaeModel::create(model, config.cvae(), sgp::derive_seed(g.seed, 0xc0));
  auto train = config.cvae_train();
  if (epochs) train.epochs = *epochs;
  const auto history = sgp::train_cvae(model, cvae, kept, train, g.seed);
  const auto path = out_path(g, out_file);
  sgp::save_cvae(cvae, path.string());
  std::cout << path.string() << "\n";
  std::cout << "records=" << kept.size() << "/" << records.size();
  if (!history.empty())
    std::cout << " first-epoch-loss=" << history.front()
              << " last-epoch-loss=" << history.back();
  std::cout << "\n";
  return 0;
}

int cmd_train_time(const GlobalOpts& g, const std::string& data_path,
                   const std::string& family_name, std::optional<double> w,
                   std::optional<int> epochs, const std::string& out_file,
                   const std::string& cvae_path) {
  const auto config = effective_config(g);
  const auto model = config.robot();
  const auto records = sgp::load_dataset(data_path);
  const auto family = sgp::family_from_name(family_name);
  auto est_config = config.estimator(family);
  if (w) est_config.w = *w;
  sgp::TimeEstimator est =
      cvae_path.empty()
          ? sgp::TimeEstimator::fresh(model, est_config, config.cvae(),
                                      sgp::derive_seed(g.seed, 0xe0))
          : sgp::TimeEstimator::from_cvae(est_config, sgp::load_cvae(cvae_path),
                                          sgp::derive_seed(g.seed, 0xe0));
  auto train = config.estimator_train();
  if (epochs) train.epochs = *epochs;
  const auto history = sgp::train_estimator(est, records, train, g.seed);
  const std::string name = out_file.empty() ? "time_" + family_name + ".ckpt" : out_file;
  const auto path = out_path(g, name);
  sgp::save_estimator(est, path.string());
  std::cout << path.string() << "\n";
  if (!history.empty())
    std::cout << "first-epoch-loss=" << history.front()
              << " last-epoch-loss=" << history.back() << "\n";
  return 0;
}

int cmd_eval_static(const GlobalOpts& g, const std::string& problems_path,
                    const std::string& cvae_path, const std::string& time_normal_path,
                    const std::string& time_lognormal_path,
                    const std::vector<std::string>& variant_names, const std::string& mode,
                    bool hard_only, const std::string& out_file) {
  const auto config = effective_config(g);
  const auto model = config.robot();
  auto problems = sgp::load_problems(problems_path);

  std::optional<sgp::CvaeModel> cvae;
  std::optional<sgp::TimeEstimator> est_normal, est_lognormal;
  std::vector<sgp::EvalVariant> variants;
  for (const auto& name : variant_names) variants.push_back(sgp::variant_from_name(name));
  const bool any_gen = std::any_of(variants.begin(), variants.end(),
                                   [](const auto& v) { return v.needs_generator(); });
  if (any_gen) {
    if (cvae_path.empty()) throw sgp::ModelMissingError("--cvae required for this variant set");
    cvae = sgp::load_cvae(cvae_path);
  }
  for (const auto& v : variants) {
    if (!v.needs_estimator()) continue;
    if (v.family == sgp::DistFamily::normal && !est_normal) {
      if (time_normal_path.empty())
        throw sgp::ModelMissingError("--time-normal required for variant " + v.name());
      est_normal = sgp::load_estimator(time_normal_path);
    }
    if (v.family == sgp::DistFamily::lognormal && !est_lognormal) {
      if (time_lognormal_path.empty())
        throw sgp::ModelMissingError("--time-lognormal required for variant " + v.name());
      est_lognormal = sgp::load_estimator(time_lognormal_path);
    }
  }

  sgp::EvalParams params;
  params.planner = config.planner();
  params.paddings = config.paddings();
  params.t_d = config.budget_checks();
  params.confidence = config.select_confidence;
  params.batch = config.cvae_batch;
  params.runs_per_plan = config.eval_runs_per_plan;
  params.max_trials = config.eval_max_trials;
  params.replications = config.eval_replications;
  params.goal_eps = config.eval_goal_eps;

  if (hard_only) {
    const auto hard = sgp::hard_problem_indices(model, problems, config.planner(),
                                                config.eval_runs_per_plan, params.t_d,
                                                g.seed);
    std::vector<sgp::PlanningProblem> subset;
    for (const auto i : hard) subset.push_back(problems[i]);
    std::cout << "hard problems: " << subset.size() << "/" << problems.size() << "\n";
    problems = std::move(subset);
  }
  if (problems.empty()) throw sgp::DataError("no problems to evaluate");

  std::vector<sgp::EvalRow> rows;
  for (const auto& variant : variants) {
    const sgp::TimeEstimator* est = nullptr;
    if (variant.needs_estimator())
      est = variant.family == sgp::DistFamily::normal ? &*est_normal : &*est_lognormal;
    const sgp::CvaeModel* gen = cvae ? &*cvae : nullptr;
    auto part = mode == "goal"
                    ? sgp::eval_to_goal(model, problems, variant, gen, est, params, g.seed)
                    : sgp::eval_subgoal(model, problems, variant, gen, est, params, g.seed);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const auto path = out_path(g, out_file);
  sgp::write_csv(rows, path.string());
  std::cout << path.string() << "\n";
  print_summaries(rows, params.t_d);
  return 0;
}

int cmd_eval_dynamic(const GlobalOpts& g, const std::string& scene_path,
                     const std::string& cvae_path, const std::string& time_path,
                     const std::string& variant_name, std::vector<double> start,
                     std::vector<double> goal, int runs) {
  const auto config = effective_config(g);
  const auto model = config.robot();
  const auto scene = scene_path.empty() ? sgp::demo_dynamic_scene()
                                        : sgp::load_scene(scene_path);
  if (start.empty()) start = sgp::demo_dynamic_start();
  if (goal.empty()) goal = sgp::demo_dynamic_goal();
  const auto variant = sgp::variant_from_name(variant_name);
  std::optional<sgp::CvaeModel> cvae;
  std::optional<sgp::TimeEstimator> est;
  if (variant.needs_generator()) {
    if (cvae_path.empty()) throw sgp::ModelMissingError("--cvae required");
    cvae = sgp::load_cvae(cvae_path);
  }
  if (variant.needs_estimator()) {
    if (time_path.empty()) throw sgp::ModelMissingError("--time required");
    est = sgp::load_estimator(time_path);
  }

  sgp::EvalParams params;
  params.planner = config.planner();
  params.paddings = config.paddings();
  params.t_d = config.budget_checks();
  params.confidence = config.select_confidence;
  params.batch = config.cvae_batch;
  params.max_trials = config.eval_max_trials;
  params.goal_eps = config.eval_goal_eps;
  sgp::DynamicParams dynamic{config.sim_cycle_seconds, config.sim_joint_speed,
                             config.sim_max_seconds};

  int successes = 0;
  for (int run = 0; run < runs; ++run) {
    const auto outcome = sgp::eval_dynamic(model, scene, start, goal, variant,
                                           cvae ? &*cvae : nullptr, est ? &*est : nullptr,
                                           params, dynamic, sgp::derive_seed(g.seed, run));
    const bool clean = sgp::validate_dynamic_trace(model, scene, outcome, dynamic,
                                                   config.planner_resolution);
    if (outcome.success && clean) ++successes;
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& step : outcome.trace) {
      nlohmann::json s;
      s["t"] = step.t;
      s["config"] = step.config;
      s["executed"] = step.executed;
      if (step.subgoal) s["subgoal"] = *step.subgoal;
      s["plan_cost"] = step.plan_cost;
      s["snapshot_id"] = step.snapshot_id;
      trace.push_back(std::move(s));
    }
    nlohmann::json j;
    j["success"] = outcome.success;
    j["reason"] = outcome.reason;
    j["trace_valid"] = clean;
    j["total_cost"] = outcome.total_cost;
    j["path_length"] = outcome.path_length;
    j["trace"] = std::move(trace);
    const auto path = out_path(g, "dynamic_run" + std::to_string(run) + ".json");
    std::ofstream out(path);
    if (!out) throw sgp::DataError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    std::cout << "run " << run << ": " << (outcome.success ? "success" : "failure") << " ("
              << outcome.reason << "), trace " << (clean ? "valid" : "INVALID") << ", cost "
              << outcome.total_cost << "\n";
  }
  std::cout << "successes: " << successes << "/" << runs << "\n";
  return 0;
}

int cmd_export(const GlobalOpts& g, const std::string& results_path) {
  const auto config = effective_config(g);
  const auto rows = sgp::read_csv(results_path);
  const double t_d = config.budget_checks();
  const auto csv_path = out_path(g, "summary.csv");
  const auto svg_path = out_path(g, "summary.svg");
  sgp::write_csv(rows, csv_path.string());
  sgp::write_histogram_svg(rows, t_d, svg_path.string());
  std::cout << csv_path.string() << "\n" << svg_path.string() << "\n";
  print_summaries(rows, t_d);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subgoal-planning toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand name
  GlobalOpts g;
  app.add_option("--config", g.config_path, "key=value configuration file");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out-dir", g.out_dir, "output directory");

  auto* gen_worlds = app.add_subcommand("gen-worlds", "generate random obstacle worlds");

  auto* gen_data = app.add_subcommand("gen-data", "generate problems and labeled waypoints");
  std::vector<std::string> world_paths;
  std::optional<int> data_count;
  gen_data->add_option("--worlds", world_paths, "world files or directories")->required();
  gen_data->add_option("--count", data_count, "number of problems");

  auto* train_cvae = app.add_subcommand("train-cvae", "train the subgoal generator");
  std::string tc_data, tc_out = "cvae.ckpt";
  double tc_budget = 0.05;
  std::optional<int> tc_epochs;
  train_cvae->add_option("--data", tc_data, "dataset (jsonl)")->required();
  train_cvae->add_option("--budget-seconds", tc_budget, "training-set budget filter");
  train_cvae->add_option("--epochs", tc_epochs, "training epochs");
  train_cvae->add_option("--out", tc_out, "checkpoint file name");

  auto* train_time = app.add_subcommand("train-time", "train a planning-time estimator");
  std::string tt_data, tt_family = "lognormal", tt_out, tt_cvae;
  std::optional<double> tt_w;
  std::optional<int> tt_epochs;
  train_time->add_option("--data", tt_data, "dataset (jsonl)")->required();
  train_time->add_option("--family", tt_family, "normal|lognormal")
      ->check(CLI::IsMember({"normal", "lognormal"}));
  train_time->add_option("--w", tt_w, "parameter-matching weight");
  train_time->add_option("--epochs", tt_epochs, "training epochs");
  train_time->add_option("--out", tt_out, "checkpoint file name");
  train_time->add_option("--cvae", tt_cvae, "reuse this generator's condition encoder");

  auto* eval_static = app.add_subcommand("eval-static", "static ablation evaluation");
  std::string es_problems, es_cvae, es_tn, es_tl, es_mode = "subgoal",
              es_out = "results.csv";
  std::vector<std::string> es_variants{"Baseline", "Random", "B-L-S"};
  bool es_hard = false;
  eval_static->add_option("--problems", es_problems, "problems (jsonl)")->required();
  eval_static->add_option("--cvae", es_cvae, "generator checkpoint");
  eval_static->add_option("--time-normal", es_tn, "normal-family estimator checkpoint");
  eval_static->add_option("--time-lognormal", es_tl,
                          "log-normal-family estimator checkpoint");
  eval_static->add_option("--variants", es_variants, "variant names (e.g. B-L-S G-N)");
  eval_static->add_option("--mode", es_mode, "subgoal|goal")
      ->check(CLI::IsMember({"subgoal", "goal"}));
  eval_static->add_flag("--hard-only", es_hard, "restrict to mined hard problems");
  eval_static->add_option("--out", es_out, "results CSV name");

  auto* eval_dynamic = app.add_subcommand("eval-dynamic", "moving-obstacle replanning");
  std::string ed_scene, ed_cvae, ed_time, ed_variant = "G-L-S";
  std::vector<double> ed_start, ed_goal;
  int ed_runs = 10;
  eval_dynamic->add_option("--scene", ed_scene, "scene file (default: bundled scenario)");
  eval_dynamic->add_option("--cvae", ed_cvae, "generator checkpoint");
  eval_dynamic->add_option("--time", ed_time, "estimator checkpoint");
  eval_dynamic->add_option("--variant", ed_variant, "policy variant name");
  eval_dynamic->add_option("--start", ed_start, "start configuration (radians)");
  eval_dynamic->add_option("--goal", ed_goal, "goal configuration (radians)");
  eval_dynamic->add_option("--runs", ed_runs, "seeded repetitions");

  auto* export_cmd = app.add_subcommand("export", "re-export results as CSV and SVG");
  std::string ex_results;
  export_cmd->add_option("--results", ex_results, "results CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_worlds->parsed()) return cmd_gen_worlds(g);
    if (gen_data->parsed()) return cmd_gen_data(g, world_paths, data_count);
    if (train_cvae->parsed())
      return cmd_train_cvae(g, tc_data, tc_budget, tc_epochs, tc_out);
    if (train_time->parsed())
      return cmd_train_time(g, tt_data, tt_family, tt_w, tt_epochs, tt_out, tt_cvae);
    if (eval_static->parsed())
      return cmd_eval_static(g, es_problems, es_cvae, es_tn, es_tl, es_variants, es_mode,
                             es_hard, es_out);
    if (eval_dynamic->parsed())
      return cmd_eval_dynamic(g, ed_scene, ed_cvae, ed_time, ed_variant, ed_start, ed_goal,
                              ed_runs);
    if (export_cmd->parsed()) return cmd_export(g, ex_results);
  } catch (const sgp::ModelMissingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const sgp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sgp::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const sgp::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const sgp::GenerationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const sgp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
