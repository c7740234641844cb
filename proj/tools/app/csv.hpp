#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace shellsolve::app {

/// %.12g; NaN prints as "nan", an empty optional as an empty cell.
std::string fmt(double v);
std::string fmt(const std::optional<double>& v);
std::string quote(const std::string& s);

/// Writes header and rows with LF endings; throws std::runtime_error when the
/// file cannot be opened.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace shellsolve::app
