#include "parkvision/cost.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "parkvision/svg.hpp"

namespace parkvision {

double bom_total(const BillOfMaterials& bom) {
  if (bom.items.empty()) throw std::invalid_argument("bill of materials has no items");
  double total = 0.0;
  for (const auto& item : bom.items) {
    if (item.unit_cost < 0.0) {
      throw std::invalid_argument("negative unit cost for item '" + item.name + "'");
    }
    if (item.quantity < 0) {
      throw std::invalid_argument("negative quantity for item '" + item.name + "'");
    }
    total += item.quantity * item.unit_cost;
  }
  return total;
}

int breakeven_spaces(double camera_total, double sensor_per_space) {
  if (camera_total <= 0.0) throw std::invalid_argument("camera total must be positive");
  if (sensor_per_space <= 0.0) throw std::invalid_argument("sensor cost per space must be positive");
  return static_cast<int>(std::ceil(camera_total / sensor_per_space - 1e-9));
}

CostCurves cost_curves(double camera_total, double sensor_per_space, int max_spaces) {
  CostCurves curves;
  curves.camera_total = camera_total;
  curves.sensor_per_space = sensor_per_space;
  curves.breakeven = breakeven_spaces(camera_total, sensor_per_space);
  if (max_spaces < curves.breakeven) {
    throw std::invalid_argument("max spaces " + std::to_string(max_spaces) +
                                " is below the break-even point " +
                                std::to_string(curves.breakeven));
  }
  curves.points.reserve(static_cast<std::size_t>(max_spaces));
  for (int n = 1; n <= max_spaces; ++n) {
    curves.points.push_back({n, camera_total, n * sensor_per_space});
  }
  return curves;
}

BillOfMaterials parse_bom(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("items") || !doc["items"].is_array()) {
    throw std::runtime_error("bill of materials must be an object with an 'items' array");
  }
  BillOfMaterials bom;
  for (const auto& entry : doc["items"]) {
    BomItem item;
    item.name = entry.value("name", std::string("item"));
    item.quantity = entry.value("quantity", 1);
    if (!entry.contains("unit_cost") || !entry["unit_cost"].is_number()) {
      throw std::runtime_error("item '" + item.name + "' is missing a numeric unit_cost");
    }
    item.unit_cost = entry["unit_cost"].get<double>();
    bom.items.push_back(std::move(item));
  }
  return bom;
}

BillOfMaterials load_bom_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open BOM file: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("invalid BOM JSON in " + path.string() + ": " + e.what());
  }
  return parse_bom(doc);
}

std::string cost_table_csv(const CostCurves& curves) {
  std::string out = "spaces,camera_cost,sensor_cost\n";
  char buf[96];
  for (const auto& p : curves.points) {
    std::snprintf(buf, sizeof(buf), "%d,%.2f,%.2f\n", p.spaces, p.camera_cost, p.sensor_cost);
    out += buf;
  }
  return out;
}

std::string cost_chart_svg(const CostCurves& curves) {
  svg::Polyline camera{"camera (one unit covers the lot)", {}};
  svg::Polyline sensor{"sensors (one per space)", {}};
  for (const auto& p : curves.points) {
    camera.points.emplace_back(p.spaces, p.camera_cost);
    sensor.points.emplace_back(p.spaces, p.sensor_cost);
  }
  return svg::line_chart("Cumulative cost: camera vs per-space sensors", "parking spaces",
                         "cost (USD)", {camera, sensor}, curves.breakeven,
                         "break-even @ " + std::to_string(curves.breakeven));
}

}  // namespace parkvision
