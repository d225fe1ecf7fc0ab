#pragma once

// Text formats for maps and suite manifests.
//
// Map file: `key=value` header lines (kind, length, width, orientation,
// row_disp, col_disp, resolution, step, start, goal, goal_radius, rows, cols)
// then `rows` grid lines of `.`/`#`, highest row first. Reals use the shortest
// round-trip decimal form, so write(parse(text)) == text.
//
// Manifest: one MapSpec per line as space-separated key=value pairs.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "memnav/gridworld.hpp"

namespace memnav {

std::string format_real(double v);
double parse_real(const std::string& s);

std::string write_map(const GridMap& map);
GridMap parse_map(const std::string& text);
void save_map(const GridMap& map, const std::string& path);
GridMap load_map(const std::string& path);

std::string format_spec(const MapSpec& spec);
MapSpec parse_spec(const std::string& line);

std::string write_manifest(const std::vector<MapSpec>& specs);
std::vector<MapSpec> parse_manifest(const std::string& text);
void save_manifest(const std::vector<MapSpec>& specs, const std::string& path);
std::vector<MapSpec> load_manifest(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Flat `key=value` lines; blank lines and `#` comments ignored.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace memnav
