#include "odflow/matrix_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace odflow {

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buffer, ptr);
}

void write_matrix_csv(const Matrix& matrix, std::span<const std::string> ids,
                      std::ostream& out) {
  if (static_cast<Eigen::Index>(ids.size()) != matrix.rows() ||
      matrix.rows() != matrix.cols()) {
    throw std::invalid_argument("need one id per matrix row/column");
  }
  out << "zone";
  for (const std::string& id : ids) out << ',' << id;
  out << '\n';
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      out << ',' << format_double(matrix(i, j));
    }
    out << '\n';
  }
}

LabeledMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("empty matrix file", 1);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  LabeledMatrix result;
  {
    std::stringstream header(line);
    std::string field;
    bool first = true;
    while (std::getline(header, field, ',')) {
      if (first) {
        first = false;
        continue;  // corner cell
      }
      result.ids.push_back(field);
    }
  }
  const auto n = static_cast<Eigen::Index>(result.ids.size());
  if (n == 0) throw ParseError("matrix header has no zone ids", 1);
  result.values = Matrix::Zero(n, n);

  std::size_t line_number = 1;
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row >= n) throw ParseError("more matrix rows than header ids", line_number);

    std::stringstream fields(line);
    std::string field;
    if (!std::getline(fields, field, ',')) {
      throw ParseError("missing row label", line_number);
    }
    if (field != result.ids[static_cast<std::size_t>(row)]) {
      throw ParseError("row label '" + field + "' does not match header order",
                       line_number);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::getline(fields, field, ',')) {
        throw ParseError("row has too few columns", line_number);
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("bad number '" + field + "'", line_number);
      }
      result.values(row, j) = v;
    }
    if (std::getline(fields, field, ',')) {
      throw ParseError("row has too many columns", line_number);
    }
    ++row;
  }
  if (row != n) {
    throw ParseError("expected " + std::to_string(n) + " matrix rows, got " +
                         std::to_string(row),
                     line_number);
  }
  return result;
}

}  // namespace odflow
