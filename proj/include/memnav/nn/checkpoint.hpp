#pragma once

// JSON checkpoint: architecture, flat parameters, optimizer state, update
// counter and free-form metadata. Reals are written in shortest round-trip
// form, so save/load reproduces every bit of theta and the optimizer state.

#include <cstdint>
#include <map>
#include <string>

#include "memnav/nn/arch.hpp"
#include "memnav/nn/rmsprop.hpp"

namespace memnav::nn {

struct Checkpoint {
  ArchSpec arch;
  Vec theta;
  RmsPropConfig optimizer;
  RmsPropState optimizer_state;
  long updates = 0;  // global J
  std::uint64_t seed = 0;
  std::map<std::string, std::string> meta;
};

std::string checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::string arch_to_json(const ArchSpec& arch);
ArchSpec arch_from_json(const std::string& text);

}  // namespace memnav::nn
