#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustya/types.hpp"

namespace trustya::test {

// Fields that must never describe a player other than the recipient.
inline const std::vector<std::string>& private_fields() {
  static const std::vector<std::string> fields{"savings", "pcards", "received_pool", "received_this_round",
                                               "available", "givers", "pending_pot"};
  return fields;
}

// Walks a JSON document and reports every object whose "id" (or "investor")
// names someone other than `self` while carrying a private field. Objects
// without an id inherit the owner of the innermost enclosing object.
inline void find_leaks(const nlohmann::json& j, PlayerId self, std::optional<std::uint32_t> owner,
                       const std::string& path, std::vector<std::string>& leaks) {
  if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k) find_leaks(j[k], self, owner, path + "[" + std::to_string(k) + "]", leaks);
    return;
  }
  if (!j.is_object()) return;
  for (const char* key : {"id", "investor"}) {
    if (j.contains(key) && j[key].is_number_integer() && j[key].get<std::int64_t>() >= 0) owner = j[key].get<std::uint32_t>();
  }
  if (owner && *owner != self.value) {
    for (const auto& f : private_fields()) {
      if (j.contains(f)) leaks.push_back(path + "." + f + " of player " + std::to_string(*owner));
    }
  }
  for (const auto& [key, value] : j.items()) find_leaks(value, self, owner, path + "." + key, leaks);
}

inline std::vector<std::string> leaks_in(const nlohmann::json& j, PlayerId self) {
  std::vector<std::string> leaks;
  find_leaks(j, self, std::nullopt, "$", leaks);
  return leaks;
}

}  // namespace trustya::test
