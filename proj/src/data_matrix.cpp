#include "augmentor/data_matrix.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace augmentor {

DataMatrix::DataMatrix(Matrix values, Index response_col, std::vector<std::string> column_names)
    : values_(std::move(values)), column_names_(std::move(column_names)) {
  if (values_.rows() < 1 || values_.cols() < 2) {
    throw std::invalid_argument("DataMatrix needs at least 1 row and 2 columns");
  }
  if (!values_.allFinite()) {
    throw std::invalid_argument("DataMatrix entries must be finite");
  }
  response_col_ = response_col < 0 ? values_.cols() + response_col : response_col;
  if (response_col_ < 0 || response_col_ >= values_.cols()) {
    throw std::invalid_argument("response column out of range");
  }
  if (!column_names_.empty() && static_cast<Index>(column_names_.size()) != values_.cols()) {
    throw std::invalid_argument("column_names length does not match column count");
  }
}

Matrix DataMatrix::predictors() const {
  Matrix x(rows(), cols() - 1);
  Index out = 0;
  for (Index c = 0; c < cols(); ++c) {
    if (c == response_col_) continue;
    x.col(out++) = values_.col(c);
  }
  return x;
}

DataMatrix DataMatrix::select_rows(const std::vector<Index>& rows) const {
  Matrix out(static_cast<Index>(rows.size()), cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Index>(i)) = values_.row(rows[i]);
  }
  return DataMatrix(std::move(out), response_col_, column_names_);
}

DataMatrix DataMatrix::vstack(const std::vector<const DataMatrix*>& parts) {
  if (parts.empty()) throw std::invalid_argument("vstack of zero parts");
  Index total = 0;
  for (const auto* p : parts) {
    if (!p->same_schema(*parts.front())) throw std::invalid_argument("vstack schema mismatch");
    total += p->rows();
  }
  Matrix out(total, parts.front()->cols());
  Index at = 0;
  for (const auto* p : parts) {
    out.middleRows(at, p->rows()) = p->values();
    at += p->rows();
  }
  return DataMatrix(std::move(out), parts.front()->response_col(), parts.front()->column_names());
}

DataMatrix DataMatrix::from_xy(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw std::invalid_argument("from_xy: row count mismatch");
  Matrix out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()) = y;
  return DataMatrix(std::move(out), x.cols());
}

DataMatrix read_csv(const std::string& path, int response_col) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::vector<std::string> names;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv " + path);
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::invalid_argument("non-numeric csv cell '" + cell + "' in " + path);
      }
    }
    if (row.size() != names.size()) throw std::invalid_argument("ragged csv row in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("csv has no data rows: " + path);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return DataMatrix(std::move(m), response_col, std::move(names));
}

void write_csv(const DataMatrix& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (Index c = 0; c < data.cols(); ++c) {
    if (c) out << ',';
    if (!data.column_names().empty()) {
      out << data.column_names()[static_cast<std::size_t>(c)];
    } else {
      out << (c == data.response_col() ? std::string("y") : "x" + std::to_string(c + 1));
    }
  }
  out << '\n';
  char buf[64];
  for (Index r = 0; r < data.rows(); ++r) {
    for (Index c = 0; c < data.cols(); ++c) {
      if (c) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", data.values()(r, c));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace augmentor
