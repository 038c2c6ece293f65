#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "sgp/world.hpp"

namespace sgp {

// World files are JSON:
//   {"bounds": {"xmin":..,"ymin":..,"xmax":..,"ymax":..},
//    "obstacles": [{"cx":..,"cy":..,"r":..}, ...],
//    "movers": [{"r":.., "schedule": [[t,cx,cy], ...]}, ...]}

inline nlohmann::json world_to_json(const World& world) {
  nlohmann::json j;
  j["bounds"] = {{"xmin", world.bounds.xmin},
                 {"ymin", world.bounds.ymin},
                 {"xmax", world.bounds.xmax},
                 {"ymax", world.bounds.ymax}};
  j["obstacles"] = nlohmann::json::array();
  for (const auto& ob : world.obstacles)
    j["obstacles"].push_back({{"cx", ob.center.x}, {"cy", ob.center.y}, {"r", ob.radius}});
  return j;
}

inline World world_from_json(const nlohmann::json& j) {
  World w;
  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    w.bounds = {b.at("xmin").get<double>(), b.at("ymin").get<double>(),
                b.at("xmax").get<double>(), b.at("ymax").get<double>()};
  }
  for (const auto& ob : j.value("obstacles", nlohmann::json::array()))
    w.obstacles.push_back(
        {{ob.at("cx").get<double>(), ob.at("cy").get<double>()}, ob.at("r").get<double>()});
  return w;
}

inline nlohmann::json scene_to_json(const Scene& scene) {
  nlohmann::json j = world_to_json(scene.world);
  j["movers"] = nlohmann::json::array();
  for (const auto& mover : scene.movers) {
    nlohmann::json m;
    m["r"] = mover.radius;
    m["schedule"] = nlohmann::json::array();
    for (const auto& [t, p] : mover.schedule) m["schedule"].push_back({t, p.x, p.y});
    j["movers"].push_back(m);
  }
  return j;
}

inline Scene scene_from_json(const nlohmann::json& j) {
  Scene scene;
  scene.world = world_from_json(j);
  for (const auto& m : j.value("movers", nlohmann::json::array())) {
    MovingObstacle mover;
    mover.radius = m.at("r").get<double>();
    for (const auto& row : m.at("schedule")) {
      if (!row.is_array() || row.size() != 3)
        throw ParseError("mover schedule entries must be [t, cx, cy]");
      mover.schedule.push_back(
          {row[0].get<double>(), {row[1].get<double>(), row[2].get<double>()}});
    }
    mover.validate();
    scene.movers.push_back(std::move(mover));
  }
  return scene;
}

inline void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << scene_to_json(scene).dump(2) << "\n";
}

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid world file ") + path + ": " + e.what());
  }
  Scene scene = scene_from_json(j);
  scene.world.validate(scene.world.obstacles.size());  // radii and bounds only
  return scene;
}

}  // namespace sgp
