#pragma once

#include <string>
#include <string_view>

namespace sgf::resources {

/// Bundled data file by its path relative to core/data (e.g. "templates.json").
std::string_view get(std::string_view name);

}  // namespace sgf::resources
