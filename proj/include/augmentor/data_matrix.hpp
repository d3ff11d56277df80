#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace augmentor {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numeric table: rows are samples, one designated column is the response.
/// All entries are finite; the constructor enforces the invariants and
/// throws std::invalid_argument otherwise.
class DataMatrix {
 public:
  DataMatrix() = default;
  explicit DataMatrix(Matrix values, Index response_col = -1,
                      std::vector<std::string> column_names = {});

  [[nodiscard]] const Matrix& values() const { return values_; }
  [[nodiscard]] Index rows() const { return values_.rows(); }
  [[nodiscard]] Index cols() const { return values_.cols(); }
  [[nodiscard]] Index response_col() const { return response_col_; }
  [[nodiscard]] const std::vector<std::string>& column_names() const { return column_names_; }
  [[nodiscard]] Index n_predictors() const { return values_.cols() - 1; }

  /// Predictor block with the response column removed, order preserved.
  [[nodiscard]] Matrix predictors() const;
  [[nodiscard]] Vector response() const { return values_.col(response_col_); }

  [[nodiscard]] DataMatrix select_rows(const std::vector<Index>& rows) const;

  /// Row-wise concatenation; schemas (column count, response column) must match.
  [[nodiscard]] static DataMatrix vstack(const std::vector<const DataMatrix*>& parts);

  /// Builds a matrix from predictors and response placing the response last.
  [[nodiscard]] static DataMatrix from_xy(const Matrix& x, const Vector& y);

  [[nodiscard]] bool same_schema(const DataMatrix& other) const {
    return cols() == other.cols() && response_col() == other.response_col();
  }

 private:
  Matrix values_;
  Index response_col_ = 0;
  std::vector<std::string> column_names_;
};

/// Reads a headered CSV of numbers. A negative response column counts from
/// the end (-1 is the last column).
DataMatrix read_csv(const std::string& path, int response_col = -1);
void write_csv(const DataMatrix& data, const std::string& path);

}  // namespace augmentor
