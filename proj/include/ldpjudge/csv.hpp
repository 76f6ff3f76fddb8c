#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace ldpjudge {

/// RFC 4180 field quoting: fields holding a comma, quote, CR or LF are quoted
/// and embedded quotes doubled.
inline std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
  return out;
}

}  // namespace ldpjudge
