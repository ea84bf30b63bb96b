#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "nmx/model.hpp"

namespace nmx {

struct ModelFile {
  SystemModel model;
  InfoStructure info;
};

// Parses the `nmx-model v1` text format. Throws ParseError (with line/column) on malformed input.
// Table outputs that name an unknown element are kept as kOutOfSpace so that `validate` reports them.
ModelFile parse_model(std::string_view text);
ModelFile read_model_file(const std::string& path);

// Canonical serialization; parse(serialize(m)) reproduces m exactly.
std::string serialize_model(const SystemModel& model, const InfoStructure& info);

}  // namespace nmx
