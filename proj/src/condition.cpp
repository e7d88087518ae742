#include "dualcycle/condition.hpp"

#include <algorithm>

namespace dualcycle {

Condition::Condition(std::initializer_list<std::pair<std::string, std::string>> attrs) {
  for (const auto& [name, value] : attrs) set(name, value);
}

void Condition::set(const std::string& name, const std::string& value) {
  auto it = std::lower_bound(attrs_.begin(), attrs_.end(), name,
                             [](const auto& a, const std::string& n) { return a.first < n; });
  if (it != attrs_.end() && it->first == name) {
    it->second = value;
  } else {
    attrs_.insert(it, {name, value});
  }
}

std::optional<std::string> Condition::value_of(const std::string& name) const {
  auto it = std::lower_bound(attrs_.begin(), attrs_.end(), name,
                             [](const auto& a, const std::string& n) { return a.first < n; });
  if (it != attrs_.end() && it->first == name) return it->second;
  return std::nullopt;
}

std::string Condition::to_string() const {
  if (attrs_.empty()) return "(unconditional)";
  std::string out;
  for (const auto& [name, value] : attrs_) {
    if (!out.empty()) out += ",";
    out += name + "=" + value;
  }
  return out;
}

}  // namespace dualcycle
