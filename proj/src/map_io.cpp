#include "memnav/map_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "memnav/errors.hpp"

namespace memnav {

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_real(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("not a number: '" + s + "'");
  return v;
}

namespace {

int parse_int(const std::string& s) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("not an integer: '" + s + "'");
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string format_cell(Cell c) { return std::to_string(c.row) + "," + std::to_string(c.col); }

Cell parse_cell(const std::string& s) {
  auto comma = s.find(',');
  if (comma == std::string::npos) throw ParseError("cell must be 'row,col': '" + s + "'");
  return {parse_int(s.substr(0, comma)), parse_int(s.substr(comma + 1))};
}

std::pair<std::string, std::string> split_kv(const std::string& token) {
  auto eq = token.find('=');
  if (eq == std::string::npos) throw ParseError("expected key=value, got '" + token + "'");
  return {token.substr(0, eq), token.substr(eq + 1)};
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw ParseError("missing key '" + key + "'");
  return it->second;
}

MapSpec spec_from(const std::map<std::string, std::string>& kv) {
  MapSpec s;
  s.kind = parse_obstacle_kind(require(kv, "kind"));
  s.length = parse_real(require(kv, "length"));
  s.width = parse_real(require(kv, "width"));
  s.orientation = parse_int(require(kv, "orientation"));
  s.row_disp = parse_real(require(kv, "row_disp"));
  s.col_disp = parse_real(require(kv, "col_disp"));
  s.resolution = parse_real(require(kv, "resolution"));
  if (auto it = kv.find("step"); it != kv.end()) s.step = parse_real(it->second);
  return s;
}

std::vector<std::pair<std::string, std::string>> spec_fields(const MapSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"length", format_real(s.length)},
          {"width", format_real(s.width)},
          {"orientation", std::to_string(s.orientation)},
          {"row_disp", format_real(s.row_disp)},
          {"col_disp", format_real(s.col_disp)},
          {"resolution", format_real(s.resolution)},
          {"step", format_real(s.step)}};
}

}  // namespace

std::string write_map(const GridMap& map) {
  std::string out;
  for (const auto& [k, v] : spec_fields(map.spec)) out += k + "=" + v + "\n";
  out += "start=" + format_cell(map.start) + "\n";
  out += "goal=" + format_cell(map.goal) + "\n";
  out += "goal_radius=" + std::to_string(map.goal_radius) + "\n";
  out += "rows=" + std::to_string(map.rows) + "\n";
  out += "cols=" + std::to_string(map.cols) + "\n";
  for (int row = map.rows - 1; row >= 0; --row) {
    for (int col = 0; col < map.cols; ++col)
      out += map.occupancy[static_cast<std::size_t>(row) * map.cols + col] ? '#' : '.';
    out += '\n';
  }
  return out;
}

GridMap parse_map(const std::string& text) {
  std::istringstream in(text);
  std::map<std::string, std::string> kv;
  std::string line;
  while (kv.count("cols") == 0 && std::getline(in, line)) {
    if (line.empty()) continue;
    auto [k, v] = split_kv(line);
    kv[k] = v;
  }
  GridMap m;
  m.spec = spec_from(kv);
  m.start = parse_cell(require(kv, "start"));
  m.goal = parse_cell(require(kv, "goal"));
  m.goal_radius = parse_int(require(kv, "goal_radius"));
  m.rows = parse_int(require(kv, "rows"));
  m.cols = parse_int(require(kv, "cols"));
  if (m.rows <= 0 || m.cols <= 0) throw ParseError("grid dimensions must be positive");
  m.occupancy.assign(static_cast<std::size_t>(m.rows) * m.cols, 0);
  for (int row = m.rows - 1; row >= 0; --row) {
    if (!std::getline(in, line)) throw ParseError("grid truncated");
    if (static_cast<int>(line.size()) != m.cols) throw ParseError("grid row has wrong width");
    for (int col = 0; col < m.cols; ++col) {
      char ch = line[static_cast<std::size_t>(col)];
      if (ch != '.' && ch != '#') throw ParseError(std::string("bad grid character '") + ch + "'");
      m.occupancy[static_cast<std::size_t>(row) * m.cols + col] = ch == '#';
    }
  }
  return m;
}

void save_map(const GridMap& map, const std::string& path) { write_text_file(path, write_map(map)); }
GridMap load_map(const std::string& path) { return parse_map(read_text_file(path)); }

std::string format_spec(const MapSpec& spec) {
  std::string out;
  for (const auto& [k, v] : spec_fields(spec)) {
    if (!out.empty()) out += ' ';
    out += k + "=" + v;
  }
  return out;
}

MapSpec parse_spec(const std::string& line) {
  std::istringstream in(line);
  std::map<std::string, std::string> kv;
  std::string token;
  while (in >> token) {
    auto [k, v] = split_kv(token);
    kv[k] = v;
  }
  return spec_from(kv);
}

std::string write_manifest(const std::vector<MapSpec>& specs) {
  std::string out;
  for (const auto& s : specs) out += format_spec(s) + "\n";
  return out;
}

std::vector<MapSpec> parse_manifest(const std::string& text) {
  std::vector<MapSpec> specs;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    specs.push_back(parse_spec(line));
  }
  return specs;
}

void save_manifest(const std::vector<MapSpec>& specs, const std::string& path) {
  write_text_file(path, write_manifest(specs));
}

std::vector<MapSpec> load_manifest(const std::string& path) {
  return parse_manifest(read_text_file(path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto [k, v] = split_kv(line.substr(first));
    kv[trim(k)] = trim(v);
  }
  return kv;
}

}  // namespace memnav
