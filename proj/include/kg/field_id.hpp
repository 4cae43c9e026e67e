#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

namespace kg {

/// Identifier of a data node in a knowledge graph, e.g. "L19" or "SCH3.L14".
class FieldId {
public:
  FieldId() = default;
  explicit FieldId(std::string id) : id_(std::move(id)) {}

  const std::string& str() const noexcept { return id_; }
  bool empty() const noexcept { return id_.empty(); }

  /// True iff `token` is non-empty and matches [A-Za-z0-9_.]+.
  static bool is_valid_token(std::string_view token) noexcept;

  friend auto operator<=>(const FieldId&, const FieldId&) = default;
  friend bool operator==(const FieldId&, const FieldId&) = default;

  friend std::ostream& operator<<(std::ostream& os, const FieldId& id) { return os << id.id_; }

private:
  std::string id_;
};

} // namespace kg

template <>
struct std::hash<kg::FieldId> {
  std::size_t operator()(const kg::FieldId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
