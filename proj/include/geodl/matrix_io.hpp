#pragma once

#include "geodl/linalg.hpp"

#include <iosfwd>
#include <string>

namespace geodl {

// Plain-text fixture format: a "rows cols" header line, then one line per
// row of space-separated decimals printed with 17 significant digits.
void write_matrix(std::ostream& os, const Matrix& m);
Matrix read_matrix(std::istream& is);

std::string format_matrix(const Matrix& m);
Matrix parse_matrix(const std::string& text);

}  // namespace geodl
