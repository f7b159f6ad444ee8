#include "got/resources.hpp"

#include <stdexcept>

namespace got::resources {

std::string_view get(std::string_view path) {
  for (const auto& e : all()) {
    if (e.path == path) return e.data;
  }
  throw std::out_of_range("no embedded resource " + std::string(path));
}

std::vector<std::string> lines(std::string_view path) {
  std::vector<std::string> out;
  std::string_view data = get(path);
  std::size_t pos = 0;
  while (pos < data.size()) {
    std::size_t nl = data.find('\n', pos);
    if (nl == std::string_view::npos) nl = data.size();
    if (nl > pos) out.emplace_back(data.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

}  // namespace got::resources
