#pragma once

#include <ostream>
#include <string>

#include "json.hpp"
#include "nn/network.hpp"
#include "params.hpp"

namespace matfit::nn {

struct ModelInfo {
  Network<float> net;
  Bounds bounds;
  nlohmann::json meta;  // training metadata carried verbatim
};

// "MFNN1": magic, u32 length-prefixed UTF-8 JSON header (descriptor, bounds,
// metadata), float32 LE weight blob in descriptor order (per layer: W
// row-major, then bias). Round trips are byte-exact.
void save_model(const Network<float>& net, const Bounds& bounds,
                const nlohmann::json& meta, const std::string& path);

// expected_bounds, when given, is compared against the header bounds; a
// mismatch emits a warning line to `warn` (default stderr) but still loads.
ModelInfo load_model(const std::string& path, const Bounds* expected_bounds = nullptr,
                     std::ostream* warn = nullptr);

nlohmann::json arch_to_json(const ArchDescriptor& d);
ArchDescriptor arch_from_json(const nlohmann::json& j);

}  // namespace matfit::nn
