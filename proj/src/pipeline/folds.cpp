#include "vsc/pipeline/folds.hpp"

#include <set>

#include "vsc/core.hpp"

namespace vsc::pipe {

std::vector<FoldSpec> make_folds(const std::vector<std::string>& specimens,
                                 std::uint64_t base_seed) {
  if (specimens.size() < 2)
    fail(ErrorCategory::InvalidArgument,
         "make_folds: need at least 2 specimens for cross-validation");
  const std::set<std::string> unique(specimens.begin(), specimens.end());
  if (unique.size() != specimens.size())
    fail(ErrorCategory::InvalidArgument, "make_folds: duplicate specimen ids");

  std::vector<FoldSpec> folds;
  folds.reserve(specimens.size());
  for (std::size_t i = 0; i < specimens.size(); ++i) {
    FoldSpec f;
    f.held_out = specimens[i];
    for (std::size_t j = 0; j < specimens.size(); ++j)
      if (j != i) f.train.push_back(specimens[j]);
    f.seed = base_seed + i;
    folds.push_back(std::move(f));
  }
  return folds;
}

}  // namespace vsc::pipe
