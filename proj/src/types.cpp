#include "morph/types.hpp"

#include <sstream>

namespace morph {

bool value_matches(const Value& v, DataType type) {
  switch (v.index()) {
    case 0:
      return true;
    case 1:
      return type == DataType::Int64;
    case 2:
      return type == DataType::Float64;
    default:
      return type == DataType::Varchar;
  }
}

std::string to_string(DataType type) {
  switch (type) {
    case DataType::Int64:
      return "int64";
    case DataType::Float64:
      return "float64";
    case DataType::Varchar:
      return "varchar";
  }
  return "?";
}

DataType parse_data_type(const std::string& text) {
  if (text == "int64" || text == "int") return DataType::Int64;
  if (text == "float64" || text == "float" || text == "double") return DataType::Float64;
  if (text == "varchar" || text == "string") return DataType::Varchar;
  throw std::invalid_argument("unknown data type '" + text + "'");
}

std::string to_string(const Value& v) {
  switch (v.index()) {
    case 0:
      return "NULL";
    case 1:
      return std::to_string(std::get<std::int64_t>(v));
    case 2: {
      std::ostringstream os;
      os << std::get<double>(v);
      return os.str();
    }
    default:
      return "'" + std::get<std::string>(v) + "'";
  }
}

}  // namespace morph
