#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace innerdyn {

using Json = nlohmann::ordered_json;

// All floating-point output goes through one formatter (17 significant
// digits) so that reports are byte-identical across runs and thread counts.
std::string format_double(double value);

// Serialize with format_double applied to every number. nlohmann's own dump
// uses shortest-roundtrip formatting, which breaks the fixed-width contract.
std::string dump_json(const Json& value, int indent = 2);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t value);

}
