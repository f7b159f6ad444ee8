#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace got::resources {

struct entry {
  std::string path;
  std::string_view data;
};

const std::vector<entry>& all();
// Throws std::out_of_range for unknown paths.
std::string_view get(std::string_view path);
std::vector<std::string> lines(std::string_view path);

}  // namespace got::resources
