#ifndef DGLM_IO_HPP
#define DGLM_IO_HPP

#include <string>
#include <string_view>

#include <Eigen/Core>

#include "dglm/model.hpp"

namespace dglm {

/// Rows `t,value`. An empty value is a missing observation; a first row
/// whose t field is not numeric is taken as a header. Throws IoError with
/// the line number for malformed rows or non-increasing t.
TimeSeries parse_csv(const std::string& path);
TimeSeries parse_csv_text(std::string_view text, const std::string& source = "<text>");

// Header `t,y`, 17 significant digits, missing values as empty fields.
std::string format_series_csv(const TimeSeries& series);
void write_series_csv(const std::string& path, const TimeSeries& series);

// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

/// Writes to a temporary file beside `path`, then renames over it.
void write_file_atomic(const std::string& path, const std::string& content);

/// Reference trajectory CSV: header, then `t,mean_1,...,mean_m` rows.
/// Returns m x T.
Eigen::MatrixXd read_trajectory_csv(const std::string& path, int state_dim);

}  // namespace dglm

#endif  // DGLM_IO_HPP
