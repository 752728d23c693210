// CSV rendering with fixed, locale-independent number formatting.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lossdev/cgf.hpp"
#include "lossdev/legendre.hpp"

namespace lossdev {

using CsvCell = std::variant<double, std::int64_t, std::uint64_t, std::string>;

/// 17 significant digits; infinities render as `inf` / `-inf`.
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;

  /// Header row, then one line per row.
  std::string str() const;
};

CsvTable emit_curve(std::span<const RatePoint> points);
CsvTable emit_curve(std::span<const CgfPoint> points);

}  // namespace lossdev
