#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "minnorm/covariate_shift.hpp"
#include "minnorm/types.hpp"

namespace minnorm {

/// Shortest round-trip decimal form, '.' separator, independent of locale.
std::string format_number(double x);

/// Splits one CSV line on commas, trimming surrounding whitespace.
std::vector<std::string> split_csv_line(std::string_view line);

/// Spectrum file with header lam1,lam2,weight (columns in any order).
JointSpectrum read_spectrum_csv(const std::string& path);

/// Numeric matrix; a first line with any non-numeric field is treated as a header.
Matrix read_matrix_csv(const std::string& path);

/// Rows of x_1..x_p,y: all columns but the last form X, the last is y.
void read_regression_csv(const std::string& path, Matrix& X, Vector& y);

}  // namespace minnorm
