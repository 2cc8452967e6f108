#pragma once

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vhetnet/traffic_data.hpp"

namespace vhetnet {

// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// Canonical load CSV: header `sbs_id,slot,load`, SBS-major rows.
inline void write_load_csv(std::ostream& out, const LoadSeries& series) {
  out << "sbs_id,slot,load\n";
  for (std::size_t i = 0; i < series.sbs_count(); ++i)
    for (std::size_t t = 0; t < series.slot_count(); ++t)
      out << i << ',' << t << ',' << format_double(series(i, t)) << '\n';
}

inline LoadSeries read_load_csv(std::istream& in, unsigned slot_minutes = 10) {
  if (!in) throw DataError("load CSV is not readable");
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "sbs_id,slot,load")
    throw DataError("load CSV must start with header sbs_id,slot,load");
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  std::size_t n_sbs = 0, n_slots = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_fields(detail::trim(line));
    std::size_t id = 0, slot = 0;
    double v = 0.0;
    if (f.size() != 3 || !detail::parse_number(f[0], id) || !detail::parse_number(f[1], slot) ||
        !detail::parse_number(f[2], v))
      throw DataError("load CSV line " + std::to_string(lineno) + " is malformed");
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("load CSV line " + std::to_string(lineno) + ": load outside [0,1]");
    if (!cells.emplace(std::make_pair(id, slot), v).second)
      throw DataError("load CSV line " + std::to_string(lineno) + ": duplicate (sbs_id, slot)");
    n_sbs = std::max(n_sbs, id + 1);
    n_slots = std::max(n_slots, slot + 1);
  }
  if (cells.size() != n_sbs * n_slots) throw DataError("load CSV does not cover every (sbs_id, slot) pair");
  LoadSeries out(n_sbs, n_slots, slot_minutes);
  for (const auto& [key, v] : cells) out(key.first, key.second) = v;
  return out;
}

inline nlohmann::json placements_to_json(const std::vector<SbsPlacement>& placements) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : placements)
    arr.push_back({{"sbs_id", p.sbs_id}, {"square_id", p.square_id}, {"x_m", p.position.x}, {"y_m", p.position.y}});
  return arr;
}

// Entries must cover ids 0..n-1 exactly once.
inline std::vector<SbsPlacement> placements_from_json(const nlohmann::json& arr) {
  if (!arr.is_array()) throw DataError("placement file must be a JSON array");
  std::vector<SbsPlacement> out(arr.size());
  std::vector<bool> seen(arr.size(), false);
  for (const auto& e : arr) {
    try {
      const auto id = e.at("sbs_id").get<std::size_t>();
      if (id >= out.size() || seen[id]) throw DataError("placement ids must be unique and dense");
      seen[id] = true;
      out[id] = {id, e.at("square_id").get<int>(), {e.at("x_m").get<double>(), e.at("y_m").get<double>()}};
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(std::string("bad placement entry: ") + ex.what());
    }
  }
  return out;
}

}  // namespace vhetnet
