#pragma once

#include "vsc/net/model.hpp"

namespace vsc::net {

// Single-file checkpoint: versioned header with the config JSON and seed,
// little-endian IEEE-754 parameter blobs, trailing CRC-32. Round-trips bit
// exactly.
void save_model(const CompletionModel& model, const std::string& path);
CompletionModel load_model(const std::string& path);

}  // namespace vsc::net
