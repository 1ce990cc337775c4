#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace msvc {

/// Malformed or unreadable input files. Maps to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  Eigen::Index rows() const noexcept {
    return columns.empty() ? 0 : static_cast<Eigen::Index>(columns.front().size());
  }
  /// Throws InputError naming the column when absent.
  Eigen::VectorXd column(const std::string& name) const;
  bool has(const std::string& name) const;
};

/// Comma separated, header required, every cell numeric. Errors name the
/// offending row (1-based, header is row 1) and column.
Table read_csv(std::istream& in, const std::string& source = "input");
Table read_csv_file(const std::string& path);

/// Numbers are written with 17 significant digits.
void write_csv(std::ostream& out, const std::vector<std::string>& header, const Eigen::MatrixXd& values);
void write_csv_file(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values);

std::string format_double(double v);
std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace msvc
