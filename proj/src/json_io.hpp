#pragma once

// JSON helpers shared by the file formats; not part of the public headers.

#include <string>

#include <json.hpp>

#include "ctcmbqc/circuit.hpp"

namespace ctcmbqc {

Gate gate_from_json(const nlohmann::ordered_json &j);
nlohmann::ordered_json gate_to_json(const Gate &g);
/// Throws Parse with line and column on malformed JSON.
nlohmann::ordered_json parse_json_document(const std::string &text);

}  // namespace ctcmbqc
