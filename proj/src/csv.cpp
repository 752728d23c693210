#include "lossdev/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace lossdev {

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render(const CsvCell& cell) {
  struct Visitor {
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& s) const { return quote(s); }
  };
  return std::visit(Visitor{}, cell);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, ptr);
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j > 0) out += ',';
    out += quote(header[j]);
  }
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw std::logic_error("csv: row width differs from header");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out += ',';
      out += render(row[j]);
    }
    out += '\n';
  }
  return out;
}

CsvTable emit_curve(std::span<const RatePoint> points) {
  CsvTable t{{"x", "lambda_star", "rate", "status"}, {}};
  for (const auto& p : points) t.rows.push_back({p.x, p.lambda_star, p.rate, std::string(status_name(p.status))});
  return t;
}

CsvTable emit_curve(std::span<const CgfPoint> points) {
  CsvTable t{{"lambda", "value", "d1", "d2"}, {}};
  for (const auto& p : points) t.rows.push_back({p.lambda, p.value, p.d1, p.d2});
  return t;
}

}  // namespace lossdev
