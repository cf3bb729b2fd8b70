#include "opttomo/toml.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "opttomo/errors.hpp"

namespace opttomo::toml {

namespace {

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line,
                             const std::string& message) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << message;
  fail(errc::config_error, os.str());
}

struct Parser {
  const std::string& text;
  std::string origin;
  std::size_t pos = 0;
  std::size_t line = 1;

  bool at_end() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  char advance() {
    char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }

  [[noreturn]] void err(const std::string& message) const {
    parse_fail(origin, line, message);
  }

  void skip_ws_inline() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos;
  }

  void skip_comment() {
    while (!at_end() && peek() != '\n') ++pos;
  }

  // Whitespace, comments and newlines; used where TOML allows line breaks.
  void skip_filler() {
    for (;;) {
      skip_ws_inline();
      if (at_end()) return;
      char c = peek();
      if (c == '#') {
        skip_comment();
      } else if (c == '\n' || c == '\r') {
        advance();
      } else {
        return;
      }
    }
  }

  void expect_line_end() {
    skip_ws_inline();
    if (at_end()) return;
    if (peek() == '#') {
      skip_comment();
      return;
    }
    if (peek() == '\r') { advance(); }
    if (at_end()) return;
    if (peek() == '\n') { advance(); return; }
    err("unexpected trailing characters");
  }

  static bool is_bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_basic_string() {
    if (advance() != '"') err("expected '\"'");
    std::string out;
    for (;;) {
      if (at_end()) err("unterminated string");
      char c = advance();
      if (c == '"') return out;
      if (c == '\n') err("newline in string");
      if (c == '\\') {
        if (at_end()) err("unterminated escape");
        char e = advance();
        switch (e) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'b': out.push_back('\b'); break;
          case 'f': out.push_back('\f'); break;
          case 'n': out.push_back('\n'); break;
          case 'r': out.push_back('\r'); break;
          case 't': out.push_back('\t'); break;
          default: err("unsupported escape sequence");
        }
      } else {
        out.push_back(c);
      }
    }
  }

  std::string parse_literal_string() {
    if (advance() != '\'') err("expected '\\''");
    std::string out;
    for (;;) {
      if (at_end()) err("unterminated string");
      char c = advance();
      if (c == '\'') return out;
      if (c == '\n') err("newline in string");
      out.push_back(c);
    }
  }

  std::string parse_key_part() {
    skip_ws_inline();
    if (at_end()) err("expected key");
    char c = peek();
    if (c == '"') return parse_basic_string();
    if (c == '\'') return parse_literal_string();
    if (!is_bare_char(c)) err("expected key");
    std::string out;
    while (!at_end() && is_bare_char(peek())) out.push_back(advance());
    return out;
  }

  std::vector<std::string> parse_dotted_key() {
    std::vector<std::string> parts{parse_key_part()};
    for (;;) {
      skip_ws_inline();
      if (at_end() || peek() != '.') return parts;
      advance();
      parts.push_back(parse_key_part());
    }
  }

  Value parse_number_or_bool() {
    std::size_t start = pos;
    while (!at_end() && (is_bare_char(peek()) || peek() == '+' || peek() == '.'))
      ++pos;
    std::string tok = text.substr(start, pos - start);
    if (tok == "true") return Value(true);
    if (tok == "false") return Value(false);

    std::string digits;
    digits.reserve(tok.size());
    bool prev_digit = false;
    for (char c : tok) {
      if (c == '_') {
        if (!prev_digit) parse_fail(origin, line, "misplaced underscore in number");
        prev_digit = false;
        continue;
      }
      prev_digit = std::isdigit(static_cast<unsigned char>(c)) != 0;
      digits.push_back(c);
    }
    if (digits.empty()) err("expected value");

    bool is_float = digits.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
      std::int64_t iv = 0;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), iv);
      if (ec == std::errc() && p == digits.data() + digits.size()) return Value(iv);
    }
    try {
      std::size_t used = 0;
      double dv = std::stod(digits, &used);
      if (used == digits.size()) return Value(dv);
    } catch (const std::exception&) {
    }
    err("malformed number '" + tok + "'");
  }

  Value parse_value() {
    skip_filler();
    if (at_end()) err("expected value");
    char c = peek();
    if (c == '"') return Value(parse_basic_string());
    if (c == '\'') return Value(parse_literal_string());
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    return parse_number_or_bool();
  }

  Value parse_array() {
    advance();  // '['
    Array items;
    for (;;) {
      skip_filler();
      if (at_end()) err("unterminated array");
      if (peek() == ']') {
        advance();
        return Value(std::move(items));
      }
      items.push_back(parse_value());
      skip_filler();
      if (at_end()) err("unterminated array");
      if (peek() == ',') {
        advance();
      } else if (peek() != ']') {
        err("expected ',' or ']' in array");
      }
    }
  }

  Value parse_inline_table() {
    advance();  // '{'
    Table t;
    skip_ws_inline();
    if (!at_end() && peek() == '}') {
      advance();
      return Value(std::move(t));
    }
    for (;;) {
      auto key_parts = parse_dotted_key();
      skip_ws_inline();
      if (at_end() || advance() != '=') err("expected '=' in inline table");
      Value v = parse_value();
      insert_dotted(t, key_parts, std::move(v));
      skip_ws_inline();
      if (at_end()) err("unterminated inline table");
      char c = advance();
      if (c == '}') return Value(std::move(t));
      if (c != ',') err("expected ',' or '}' in inline table");
      skip_ws_inline();
    }
  }

  void insert_dotted(Table& table, const std::vector<std::string>& parts, Value v) {
    Table* cursor = &table;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      auto [it, inserted] = cursor->try_emplace(parts[i], Value(Table{}));
      if (!inserted && !it->second.is_table())
        err("key '" + parts[i] + "' is not a table");
      cursor = &it->second.as_table();
    }
    auto [it, inserted] = cursor->try_emplace(parts.back(), std::move(v));
    if (!inserted) err("duplicate key '" + parts.back() + "'");
  }

  Table parse_document() {
    Table root;
    Table* current = &root;
    for (;;) {
      skip_filler();
      if (at_end()) return root;
      char c = peek();
      if (c == '[') {
        advance();
        bool array_of_tables = !at_end() && peek() == '[';
        if (array_of_tables) advance();
        auto parts = parse_dotted_key();
        skip_ws_inline();
        if (at_end() || advance() != ']') err("expected ']'");
        if (array_of_tables && (at_end() || advance() != ']')) err("expected ']]'");
        expect_line_end();
        current = open_table(root, parts, array_of_tables);
      } else {
        auto key_parts = parse_dotted_key();
        skip_ws_inline();
        if (at_end() || advance() != '=') err("expected '='");
        Value v = parse_value();
        expect_line_end();
        insert_dotted(*current, key_parts, std::move(v));
      }
    }
  }

  Table* open_table(Table& root, const std::vector<std::string>& parts,
                    bool array_of_tables) {
    Table* cursor = &root;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      bool last = i + 1 == parts.size();
      auto [it, inserted] = cursor->try_emplace(
          parts[i], (last && array_of_tables) ? Value(Array{}) : Value(Table{}));
      Value& slot = it->second;
      if (last && array_of_tables) {
        if (!slot.is_array()) err("key '" + parts[i] + "' is not a table array");
        Array& arr = slot.as_array();
        arr.push_back(Value(Table{}));
        return &arr.back().as_table();
      }
      if (slot.is_array()) {
        // [a.b] after [[a]] appends into the latest element.
        Array& arr = slot.as_array();
        if (arr.empty() || !arr.back().is_table())
          err("key '" + parts[i] + "' is not a table");
        cursor = &arr.back().as_table();
      } else if (slot.is_table()) {
        cursor = &slot.as_table();
      } else {
        err("key '" + parts[i] + "' is not a table");
      }
    }
    return cursor;
  }
};

}  // namespace

bool Value::as_bool() const {
  if (!is_bool()) fail(errc::config_error, "expected boolean, got " + type_name());
  return std::get<bool>(data_);
}

std::int64_t Value::as_int() const {
  if (!is_int()) fail(errc::config_error, "expected integer, got " + type_name());
  return std::get<std::int64_t>(data_);
}

double Value::as_double() const {
  if (is_int()) return static_cast<double>(std::get<std::int64_t>(data_));
  if (!is_float()) fail(errc::config_error, "expected number, got " + type_name());
  return std::get<double>(data_);
}

const std::string& Value::as_string() const {
  if (!is_string()) fail(errc::config_error, "expected string, got " + type_name());
  return std::get<std::string>(data_);
}

const Array& Value::as_array() const {
  if (!is_array()) fail(errc::config_error, "expected array, got " + type_name());
  return std::get<Array>(data_);
}

Array& Value::as_array() {
  if (!is_array()) fail(errc::config_error, "expected array, got " + type_name());
  return std::get<Array>(data_);
}

const Table& Value::as_table() const {
  if (!is_table()) fail(errc::config_error, "expected table, got " + type_name());
  return std::get<Table>(data_);
}

Table& Value::as_table() {
  if (!is_table()) fail(errc::config_error, "expected table, got " + type_name());
  return std::get<Table>(data_);
}

std::string Value::type_name() const {
  switch (data_.index()) {
    case 0: return "boolean";
    case 1: return "integer";
    case 2: return "float";
    case 3: return "string";
    case 4: return "array";
    case 5: return "table";
  }
  return "unknown";
}

Table parse(const std::string& text, const std::string& origin) {
  Parser p{text, origin};
  return p.parse_document();
}

Table parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::unreadable_file, "cannot open config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string part;
  for (char c : path) {
    if (c == '.') {
      parts.push_back(part);
      part.clear();
    } else {
      part.push_back(c);
    }
  }
  parts.push_back(part);
  for (const auto& p : parts)
    if (p.empty()) fail(errc::config_error, "empty component in key '" + path + "'");
  return parts;
}

}  // namespace

const Value* find(const Table& root, const std::string& path) {
  const Table* cursor = &root;
  auto parts = split_path(path);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    auto it = cursor->find(parts[i]);
    if (it == cursor->end()) return nullptr;
    if (i + 1 == parts.size()) return &it->second;
    if (!it->second.is_table()) return nullptr;
    cursor = &it->second.as_table();
  }
  return nullptr;
}

const Value& require(const Table& root, const std::string& path) {
  const Value* v = find(root, path);
  if (v == nullptr) fail(errc::config_error, "missing required key '" + path + "'");
  return *v;
}

void set_override(Table& root, const std::string& path, const std::string& text) {
  Parser p{text, "<override " + path + ">"};
  Value v = p.parse_value();
  p.skip_ws_inline();
  if (!p.at_end()) p.err("unexpected trailing characters in override value");

  Table* cursor = &root;
  auto parts = split_path(path);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    auto [it, inserted] = cursor->try_emplace(parts[i], Value(Table{}));
    if (!it->second.is_table())
      fail(errc::config_error, "override key '" + path + "' descends into non-table");
    cursor = &it->second.as_table();
  }
  (*cursor)[parts.back()] = std::move(v);
}

}  // namespace opttomo::toml
