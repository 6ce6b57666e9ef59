#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace parkvision {

struct BomItem {
  std::string name;
  int quantity = 1;
  double unit_cost = 0.0;  // USD
};

struct BillOfMaterials {
  std::vector<BomItem> items;
};

/// Sum of quantity x unit cost over all line items.
double bom_total(const BillOfMaterials& bom);

/// Smallest lot size at which one camera system costs no more than
/// per-space sensors: ceil(camera_total / sensor_per_space).
int breakeven_spaces(double camera_total, double sensor_per_space);

struct CostPoint {
  int spaces = 0;
  double camera_cost = 0.0;  // constant
  double sensor_cost = 0.0;  // linear in spaces
};

struct CostCurves {
  double camera_total = 0.0;
  double sensor_per_space = 0.0;
  int breakeven = 0;
  std::vector<CostPoint> points;  // spaces 1..max_spaces
};

/// Cumulative cost of both solutions per lot size, with the break-even
/// point. max_spaces must reach the break-even.
CostCurves cost_curves(double camera_total, double sensor_per_space, int max_spaces);

BillOfMaterials parse_bom(const nlohmann::json& doc);
BillOfMaterials load_bom_file(const std::filesystem::path& path);

std::string cost_table_csv(const CostCurves& curves);
std::string cost_chart_svg(const CostCurves& curves);

}  // namespace parkvision
