#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace morph {

// Thin wrapper giving each 64-bit identifier its own type.
template <class Tag>
struct Id {
  std::uint64_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::uint64_t v) : value(v) {}
  constexpr auto operator<=>(const Id&) const = default;
};

struct RidTag;
struct TableIdTag;
struct TxnIdTag;
struct LsnTag;
struct TimestampTag;

using Rid = Id<RidTag>;
using TableId = Id<TableIdTag>;
using TxnId = Id<TxnIdTag>;
using Lsn = Id<LsnTag>;
using Timestamp = Id<TimestampTag>;

inline constexpr Timestamp kMaxTimestamp{std::numeric_limits<std::uint64_t>::max() >> 1};

// The catalog is itself a table; its schema record lives at RID 0.
inline constexpr TableId kCatalogTableId{0};

enum class DataType : std::uint8_t { Int64, Float64, Varchar };

// Null is represented by std::monostate.
using Value = std::variant<std::monostate, std::int64_t, double, std::string>;
using RecordPayload = std::vector<Value>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

// True when the value may be stored in a column of the given type (Null always fits).
bool value_matches(const Value& v, DataType type);

std::string to_string(DataType type);
DataType parse_data_type(const std::string& text);
std::string to_string(const Value& v);

// Capacity exhaustion and similar resource limits.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace morph

template <class Tag>
struct std::hash<morph::Id<Tag>> {
  std::size_t operator()(const morph::Id<Tag>& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};
