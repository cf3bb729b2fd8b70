#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace opttomo::toml {

// Minimal TOML reader covering the subset used by pipeline configs:
// comments, bare/quoted keys, dotted keys, [tables], [[arrays of tables]],
// strings, integers, floats, booleans, arrays, inline tables.
class Value;
using Array = std::vector<Value>;
using Table = std::map<std::string, Value>;

class Value {
public:
  using Storage = std::variant<bool, std::int64_t, double, std::string, Array, Table>;

  Value() : data_(std::int64_t{0}) {}
  explicit Value(bool b) : data_(b) {}
  explicit Value(std::int64_t i) : data_(i) {}
  explicit Value(double d) : data_(d) {}
  explicit Value(std::string s) : data_(std::move(s)) {}
  explicit Value(Array a) : data_(std::move(a)) {}
  explicit Value(Table t) : data_(std::move(t)) {}

  bool is_bool() const { return std::holds_alternative<bool>(data_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(data_); }
  bool is_float() const { return std::holds_alternative<double>(data_); }
  bool is_string() const { return std::holds_alternative<std::string>(data_); }
  bool is_array() const { return std::holds_alternative<Array>(data_); }
  bool is_table() const { return std::holds_alternative<Table>(data_); }

  // Accessors throw a configuration error on type mismatch; as_double
  // accepts integers.
  bool as_bool() const;
  std::int64_t as_int() const;
  double as_double() const;
  const std::string& as_string() const;
  const Array& as_array() const;
  Array& as_array();
  const Table& as_table() const;
  Table& as_table();

  std::string type_name() const;

private:
  Storage data_;
};

Table parse(const std::string& text, const std::string& origin = "<string>");
Table parse_file(const std::filesystem::path& path);

// Lookup helpers; `path` is dotted ("recon.grid_size"). find returns nullptr
// when any component is absent.
const Value* find(const Table& root, const std::string& path);
const Value& require(const Table& root, const std::string& path);

// Parses `text` with TOML value syntax and stores it at the dotted path,
// creating intermediate tables. Used for command-line overrides.
void set_override(Table& root, const std::string& path, const std::string& text);

}  // namespace opttomo::toml
