#include "hoi/csv.hpp"

#include "hoi/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace hoi::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, const std::filesystem::path& path, std::size_t line) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* begin = t.data();
  if (!t.empty() && t.front() == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw Error(ErrorCode::InvalidData, path.string() + ":" + std::to_string(line) +
                                            ": cannot parse \"" + t + "\" as a number");
  return v;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  Table table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
      line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (table.header.empty()) {
      for (auto& f : fields) table.header.push_back(trim(f));
      continue;
    }
    if (fields.size() != table.header.size())
      throw Error(ErrorCode::InvalidData, path.string() + ":" + std::to_string(lineno) +
                                              ": expected " + std::to_string(table.header.size()) +
                                              " fields, got " + std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, path, lineno));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw Error(ErrorCode::InvalidData, path.string() + ": empty file");
  return table;
}

}  // namespace

DataMatrix read_data(const std::filesystem::path& path) {
  Table t = read_table(path);
  DataMatrix data;
  data.column_names = std::move(t.header);
  data.values.resize(static_cast<Eigen::Index>(t.rows.size()),
                     static_cast<Eigen::Index>(data.column_names.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.rows[r].size(); ++c)
      data.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.rows[r][c];
  return data;
}

CovarianceMatrix read_covariance(const std::filesystem::path& path,
                                 std::vector<std::string>* names) {
  Table t = read_table(path);
  const auto n = t.header.size();
  if (t.rows.size() != n)
    throw Error(ErrorCode::InvalidData,
                path.string() + ": covariance needs as many rows as header columns");
  CovarianceMatrix cov;
  cov.sigma.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      cov.sigma(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.rows[r][c];
  cov.validate();
  if (names) *names = std::move(t.header);
  return cov;
}

std::vector<NamedPath> list_inputs(const std::filesystem::path& input) {
  namespace fs = std::filesystem;
  std::vector<NamedPath> out;
  if (fs::is_directory(input)) {
    for (const auto& entry : fs::directory_iterator(input)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv")
        out.push_back(NamedPath{entry.path().stem().string(), entry.path()});
    }
    std::sort(out.begin(), out.end(), [](const NamedPath& a, const NamedPath& b) {
      return a.path.filename().string() < b.path.filename().string();
    });
    if (out.empty()) throw Error(ErrorCode::Io, "no .csv files in " + input.string());
  } else if (fs::exists(input)) {
    out.push_back(NamedPath{input.stem().string(), input});
  } else {
    throw Error(ErrorCode::Io, "input not found: " + input.string());
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_data(std::ostream& out, const DataMatrix& data) {
  for (Eigen::Index j = 0; j < data.n_vars(); ++j) {
    if (j) out << ',';
    out << field(data.column_names.empty() ? "x" + std::to_string(j)
                                           : data.column_names[static_cast<std::size_t>(j)]);
  }
  out << '\n';
  for (Eigen::Index t = 0; t < data.n_samples(); ++t) {
    for (Eigen::Index j = 0; j < data.n_vars(); ++j) {
      if (j) out << ',';
      out << format_double(data.values(t, j));
    }
    out << '\n';
  }
}

void write_covariance(std::ostream& out, const CovarianceMatrix& cov,
                      const std::vector<std::string>& names) {
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << field(names[j]);
  out << '\n';
  for (Eigen::Index i = 0; i < cov.n_vars(); ++i) {
    for (Eigen::Index j = 0; j < cov.n_vars(); ++j) out << (j ? "," : "") << format_double(cov.sigma(i, j));
    out << '\n';
  }
}

}  // namespace hoi::csv
