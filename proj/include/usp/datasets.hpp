#pragma once

#include <string>
#include <string_view>

#include "usp/error.hpp"
#include "usp/table.hpp"

namespace usp::datasets {

/// Marital status (rows: never married, married, divorced, widowed) by
/// education (columns: middle school or lower, high school, bachelor's,
/// master's, PhD or higher); 300 survey respondents.
inline ContingencyTable marital() {
  return ContingencyTable::from_rows({
      {18, 36, 21, 9, 6},
      {12, 36, 45, 36, 21},
      {6, 9, 9, 3, 3},
      {3, 9, 9, 6, 3},
  });
}

/// Eye colour (black, brown, blue, green, grey) of 85 females and 82 males.
inline ContingencyTable eyecolour() {
  return ContingencyTable::from_rows({
      {20, 30, 10, 15, 10},
      {25, 15, 12, 20, 10},
  });
}

inline ContingencyTable by_name(std::string_view name) {
  if (name == "marital") return marital();
  if (name == "eyecolour" || name == "eyecolor") return eyecolour();
  throw InvalidConfig("unknown dataset '" + std::string(name) + "' (expected marital or eyecolour)");
}

}  // namespace usp::datasets
