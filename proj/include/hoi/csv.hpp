#pragma once

#include "hoi/copula.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hoi::csv {

/// Header row of variable names, then one row per sample; '.' decimals.
DataMatrix read_data(const std::filesystem::path& path);

/// Square analytic covariance: header of names, then N rows of N values.
CovarianceMatrix read_covariance(const std::filesystem::path& path,
                                 std::vector<std::string>* names = nullptr);

struct NamedPath {
  std::string id;  // file stem
  std::filesystem::path path;
};

/// A single file, or every *.csv in a directory ordered by filename.
std::vector<NamedPath> list_inputs(const std::filesystem::path& input);

void write_data(std::ostream& out, const DataMatrix& data);
void write_covariance(std::ostream& out, const CovarianceMatrix& cov,
                      const std::vector<std::string>& names);

/// Shortest decimal that round-trips.
std::string format_double(double v);

/// Quotes a field when it holds a comma, quote or newline.
std::string field(const std::string& text);

}  // namespace hoi::csv
