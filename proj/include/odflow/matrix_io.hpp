#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "odflow/core.hpp"

namespace odflow {

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

// Dense CSV: header row of zone ids, then one row per origin zone with its
// id in the first column.
void write_matrix_csv(const Matrix& matrix, std::span<const std::string> ids,
                      std::ostream& out);

struct LabeledMatrix {
  std::vector<std::string> ids;
  Matrix values;
};

LabeledMatrix read_matrix_csv(std::istream& in);

}  // namespace odflow
