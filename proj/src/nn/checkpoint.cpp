#include "memnav/nn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "memnav/errors.hpp"

namespace memnav::nn {

namespace {

using nlohmann::json;

json vec_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vec json_vec(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json arch_json(const ArchSpec& a) {
  json j;
  j["kind"] = to_string(a.kind);
  j["input_dim"] = a.input_dim;
  j["range_dim"] = a.range_dim;
  j["hidden_sizes"] = a.hidden_sizes;
  j["conv"] = json::array();
  for (const ConvSpec& c : a.conv)
    j["conv"].push_back({{"kernel", c.kernel}, {"stride", c.stride}, {"channels", c.channels}});
  if (a.memory) {
    j["memory"] = {{"rows", a.memory->rows},
                   {"cols", a.memory->cols},
                   {"read_heads", a.memory->read_heads},
                   {"temporal_links", a.memory->temporal_links}};
  } else {
    j["memory"] = nullptr;
  }
  j["fuse_size"] = a.fuse_size;
  j["mem_l2"] = a.mem_l2;
  return j;
}

ArchSpec json_arch(const json& j) {
  ArchSpec a;
  a.kind = parse_arch_kind(j.at("kind").get<std::string>());
  a.input_dim = j.at("input_dim").get<int>();
  a.range_dim = j.at("range_dim").get<int>();
  a.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
  for (const json& c : j.at("conv"))
    a.conv.push_back({c.at("kernel").get<int>(), c.at("stride").get<int>(), c.at("channels").get<int>()});
  if (!j.at("memory").is_null()) {
    const json& m = j.at("memory");
    a.memory = MemorySpec{m.at("rows").get<int>(), m.at("cols").get<int>(),
                          m.at("read_heads").get<int>(), m.at("temporal_links").get<bool>()};
  }
  a.fuse_size = j.at("fuse_size").get<int>();
  a.mem_l2 = j.at("mem_l2").get<double>();
  a.validate();
  return a;
}

}  // namespace

std::string arch_to_json(const ArchSpec& arch) { return arch_json(arch).dump(); }

ArchSpec arch_from_json(const std::string& text) {
  try {
    return json_arch(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad architecture: ") + e.what());
  }
}

std::string checkpoint_to_json(const Checkpoint& ck) {
  json j;
  j["format"] = "memnav-checkpoint";
  j["version"] = 1;
  j["arch"] = arch_json(ck.arch);
  j["theta"] = vec_json(ck.theta);
  j["optimizer"] = {{"lr", ck.optimizer.lr}, {"rho", ck.optimizer.rho}, {"eps", ck.optimizer.eps}};
  j["optimizer_state"] = {{"mean_square", vec_json(ck.optimizer_state.mean_square)},
                          {"steps", ck.optimizer_state.steps}};
  j["updates"] = ck.updates;
  j["seed"] = ck.seed;
  j["meta"] = ck.meta;
  return j.dump() + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "memnav-checkpoint") throw ParseError("not a memnav checkpoint");
    Checkpoint ck;
    ck.arch = json_arch(j.at("arch"));
    ck.theta = json_vec(j.at("theta"));
    const json& o = j.at("optimizer");
    ck.optimizer = {o.at("lr").get<double>(), o.at("rho").get<double>(), o.at("eps").get<double>()};
    const json& s = j.at("optimizer_state");
    ck.optimizer_state.mean_square = json_vec(s.at("mean_square"));
    ck.optimizer_state.steps = s.at("steps").get<long>();
    ck.updates = j.at("updates").get<long>();
    ck.seed = j.at("seed").get<std::uint64_t>();
    ck.meta = j.at("meta").get<std::map<std::string, std::string>>();
    if (ck.optimizer_state.mean_square.size() != ck.theta.size())
      throw ParseError("optimizer state length differs from theta");
    return ck;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << checkpoint_to_json(ck);
  if (!out) throw std::runtime_error("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace memnav::nn
