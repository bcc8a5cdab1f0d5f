#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "hdpca/core.hpp"

namespace hdpca {

/// Shortest-exact text for a double: 17 significant digits, general notation.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// p rows of p comma-separated values.
template <typename Scalar>
void write_matrix_csv(std::ostream& os, const SymmetricMatrix<Scalar>& m) {
  const auto& v = m.values();
  for (Index i = 0; i < v.rows(); ++i) {
    for (Index j = 0; j < v.cols(); ++j) {
      if (j) os << ',';
      os << format_number(static_cast<double>(v(i, j)));
    }
    os << '\n';
  }
}

}  // namespace hdpca
