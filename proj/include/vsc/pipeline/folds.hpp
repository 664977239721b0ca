#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vsc::pipe {

struct FoldSpec {
  std::string held_out;
  std::vector<std::string> train;
  std::uint64_t seed = 0;
};

// Leave-one-specimen-out: one fold per specimen. Needs >= 2 specimens.
std::vector<FoldSpec> make_folds(const std::vector<std::string>& specimens,
                                 std::uint64_t base_seed = 0);

}  // namespace vsc::pipe
