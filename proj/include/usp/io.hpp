#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "usp/asymptotics.hpp"
#include "usp/error.hpp"
#include "usp/simulation.hpp"
#include "usp/table.hpp"

namespace usp {

/// Parses a table from CSV: one row per line, comma-separated non-negative
/// integers, no header. Blank lines and lines starting with '#' are skipped.
inline ContingencyTable parse_table_csv(std::istream& in) {
  std::vector<std::vector<Count>> rows;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return std::string_view{};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    std::vector<Count> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = content.find(',', start);
      const std::string_view field =
          trim(content.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      Count value = 0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(row.size() + 1) +
                         ": '" + std::string(field) + "' is not an integer");
      if (value < 0) throw NegativeCount(rows.size(), row.size(), value);
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                       " entries, expected " + std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyTable("CSV input contains no table rows");
  return ContingencyTable::from_rows(rows);
}

inline std::string format_number(double v, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline void write_power_csv(std::ostream& os, std::span<const PowerCurvePoint> points) {
  os << "epsilon,n,reps,method,mode,rejection_rate,std_err\n";
  for (const auto& p : points)
    for (const auto& r : p.rates)
      os << format_number(p.epsilon) << ',' << p.n << ',' << p.reps << ',' << to_string(r.test.method) << ','
         << to_string(r.test.mode) << ',' << format_number(r.rejection_rate) << ',' << format_number(r.std_err)
         << '\n';
}

inline void write_dhat_csv(std::ostream& os, double epsilon, Count n, std::span<const double> samples) {
  os << "epsilon,n,rep,dhat\n";
  for (std::size_t r = 0; r < samples.size(); ++r)
    os << format_number(epsilon) << ',' << n << ',' << r << ',' << format_number(samples[r], 17) << '\n';
}

inline void write_subsample_csv(std::ostream& os, Count m, std::span<const TestRate> rates) {
  os << "m,reps,method,mode,rejection_rate,std_err\n";
  for (const auto& r : rates)
    os << m << ',' << r.reps << ',' << to_string(r.test.method) << ',' << to_string(r.test.mode) << ','
       << format_number(r.rejection_rate) << ',' << format_number(r.std_err) << '\n';
}

inline void write_size_curve_csv(std::ostream& os, std::span<const SizeCurvePoint> points) {
  os << "lambda,alpha,test,asymptotic_size\n";
  for (const auto& p : points)
    os << format_number(p.lambda) << ',' << format_number(p.alpha) << ',' << to_string(p.test) << ','
       << format_number(p.asymptotic_size, 12) << '\n';
}

}  // namespace usp
