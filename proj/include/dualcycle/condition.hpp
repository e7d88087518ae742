#pragma once

#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dualcycle {

// A set of attribute constraints ("accessory=scarf, body-color=orange").
// Stored sorted by attribute name with unique names, so two conditions
// describing the same constraints compare equal regardless of input order.
// The empty condition means "unconditional".
class Condition {
 public:
  Condition() = default;
  Condition(std::initializer_list<std::pair<std::string, std::string>> attrs);

  // Inserts or replaces the value for one attribute.
  void set(const std::string& name, const std::string& value);

  bool empty() const { return attrs_.empty(); }
  size_t size() const { return attrs_.size(); }
  const std::vector<std::pair<std::string, std::string>>& attributes() const { return attrs_; }
  std::optional<std::string> value_of(const std::string& name) const;

  bool operator==(const Condition& other) const { return attrs_ == other.attrs_; }
  bool operator!=(const Condition& other) const { return !(*this == other); }

  // "a=x,b=y" in sorted attribute order; "(unconditional)" when empty.
  std::string to_string() const;

 private:
  std::vector<std::pair<std::string, std::string>> attrs_;
};

}  // namespace dualcycle
