#include "memnav/vcdim/features.hpp"

#include <cstring>
#include <iostream>
#include <map>
#include <sstream>

#include "memnav/errors.hpp"
#include "memnav/expert.hpp"
#include "memnav/map_io.hpp"

namespace memnav::vcdim {

std::array<int, kNumActions> FeatureSet::class_counts() const {
  std::array<int, kNumActions> c{};
  for (int l : labels) ++c[static_cast<std::size_t>(l)];
  return c;
}

std::vector<int> FeatureSet::one_vs_all(int positive) const {
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == positive ? 1 : -1;
  return y;
}

FeatureSet collect_features(const nn::Network& net, const nn::Vec& theta,
                            const std::vector<GridMap>& maps, const SensorConfig& cfg,
                            const InputOptions& input, int step_cap) {
  std::vector<nn::Vec> psi, xs;
  FeatureSet fs;
  fs.arch_id = to_string(net.arch().kind);
  for (std::size_t m = 0; m < maps.size(); ++m) {
    const GridMap& map = maps[m];
    std::vector<nn::Vec> ep_psi, ep_x;
    std::vector<int> ep_labels, ep_choice;
    Expert expert(map, cfg);
    nn::MemoryState mem = net.initial_state();
    RobotState s = start_state(map);
    Action heading = initial_heading(map);
    std::optional<Action> prev;
    bool reached = false;
    try {
      for (int t = 0; t < step_cap; ++t) {
        const Observation obs = sense(map, s, heading, cfg);
        const Action a = expert.observe_and_act(s, obs);
        const nn::Vec x = encode_input(obs, cfg, input, prev);
        const nn::PolicyOutput out = net.forward(theta, x, mem);
        ep_psi.push_back(out.psi);
        ep_x.push_back(x);
        ep_labels.push_back(static_cast<int>(a));
        ep_choice.push_back(static_cast<int>(out.chosen));
        const StepOutcome o = step(map, s, a, cfg);
        heading = a;
        prev = a;
        s = o.next_state;
        if (o.terminal == Terminal::Goal) {
          reached = true;
          break;
        }
        if (o.terminal == Terminal::Collision) break;
      }
    } catch (const NoPath&) {
      reached = false;
    }
    if (!reached) {
      std::cerr << "memnav: expert did not reach the goal on map " << m << "; skipped\n";
      continue;
    }
    for (std::size_t i = 0; i < ep_labels.size(); ++i) {
      psi.push_back(std::move(ep_psi[i]));
      xs.push_back(std::move(ep_x[i]));
      fs.labels.push_back(ep_labels[i]);
      fs.net_choice.push_back(ep_choice[i]);
      fs.episode.push_back(static_cast<int>(m));
    }
  }
  const Eigen::Index n = static_cast<Eigen::Index>(psi.size());
  fs.psi.resize(n, n ? psi[0].size() : net.arch().feature_dim());
  fs.inputs.resize(n, n ? xs[0].size() : net.arch().input_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    fs.psi.row(i) = psi[static_cast<std::size_t>(i)].transpose();
    fs.inputs.row(i) = xs[static_cast<std::size_t>(i)].transpose();
  }
  return fs;
}

std::vector<std::pair<int, int>> conflicting_pairs(const FeatureSet& fs) {
  std::vector<std::pair<int, int>> out;
  const Eigen::Index d = fs.inputs.cols();
  // Group rows by (episode, exact input bytes).
  std::map<std::pair<int, std::string>, std::vector<int>> groups;
  for (int i = 0; i < fs.size(); ++i) {
    std::string key(static_cast<std::size_t>(d) * sizeof(double), '\0');
    const Eigen::VectorXd row = fs.inputs.row(i).transpose();
    std::memcpy(key.data(), row.data(), key.size());
    groups[{fs.episode[static_cast<std::size_t>(i)], std::move(key)}].push_back(i);
  }
  for (auto& [key, rows] : groups) {
    std::vector<bool> used(rows.size(), false);
    for (std::size_t a = 0; a < rows.size(); ++a) {
      if (used[a]) continue;
      for (std::size_t b = a + 1; b < rows.size(); ++b) {
        if (used[b]) continue;
        const Action la = static_cast<Action>(fs.labels[static_cast<std::size_t>(rows[a])]);
        const Action lb = static_cast<Action>(fs.labels[static_cast<std::size_t>(rows[b])]);
        if (lb == opposite(la)) {
          used[a] = used[b] = true;
          out.emplace_back(rows[a], rows[b]);
          break;
        }
      }
    }
  }
  return out;
}

std::string feature_csv(const FeatureSet& fs) {
  std::ostringstream out;
  const auto c = fs.class_counts();
  out << "# N=" << fs.size() << " D=" << fs.psi.cols() << " down=" << c[0] << " right=" << c[1]
      << " up=" << c[2] << " left=" << c[3] << " arch=" << fs.arch_id << " seed=" << fs.seed
      << " suite=" << (fs.suite.empty() ? "-" : fs.suite) << '\n';
  out << "label,episode";
  for (Eigen::Index j = 0; j < fs.psi.cols(); ++j) out << ",psi_" << j;
  out << '\n';
  for (int i = 0; i < fs.size(); ++i) {
    out << fs.labels[static_cast<std::size_t>(i)] << ',' << fs.episode[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < fs.psi.cols(); ++j) out << ',' << format_real(fs.psi(i, j));
    out << '\n';
  }
  return out.str();
}

FeatureSet parse_feature_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  FeatureSet fs;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw ParseError("missing feature header");
  long n = -1, d = -1;
  {
    std::istringstream hs(line.substr(2));
    std::string kv;
    while (hs >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("bad header field '" + kv + "'");
      const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
      if (k == "N") n = std::stol(v);
      else if (k == "D") d = std::stol(v);
      else if (k == "arch") fs.arch_id = v;
      else if (k == "seed") fs.seed = std::stoull(v);
      else if (k == "suite") fs.suite = v == "-" ? "" : v;
    }
  }
  if (n < 0 || d < 0) throw ParseError("feature header lacks N or D");
  std::getline(in, line);  // column names
  fs.psi.resize(n, d);
  for (long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw ParseError("feature file truncated");
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    fs.labels.push_back(std::stoi(cell));
    std::getline(ls, cell, ',');
    fs.episode.push_back(std::stoi(cell));
    for (long j = 0; j < d; ++j) {
      if (!std::getline(ls, cell, ',')) throw ParseError("feature row too short");
      fs.psi(i, j) = parse_real(cell);
    }
  }
  return fs;
}

}  // namespace memnav::vcdim
