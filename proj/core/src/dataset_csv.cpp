#include "gtsel/dataset_csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "gtsel/errors.hpp"

namespace gtsel {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& field, int line_no, const char* what) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw csv_format_error(std::string("cannot parse ") + what + " '" + field + "'",
                           line_no);
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') {
    s.pop_back();
  }
  return s;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in, double se, double sp) {
  std::string line;
  if (!std::getline(in, line)) {
    throw csv_format_error("empty input", 0);
  }
  const auto header = split_fields(strip_cr(line));
  if (header.size() < 3 || header[0] != "pool_id" || header[1] != "z") {
    throw csv_format_error("header must be pool_id,z,x1,...,xp", 1);
  }
  const int p = static_cast<int>(header.size()) - 2;
  for (int j = 0; j < p; ++j) {
    if (header[2 + j] != "x" + std::to_string(j + 1)) {
      throw csv_format_error("covariate columns must be named x1..xp in order", 1);
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> row_pool;
  std::map<std::string, int> pool_index;
  std::vector<std::vector<int>> pools;
  std::vector<int> z;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) {
      continue;
    }
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) != p + 2) {
      throw csv_format_error("expected " + std::to_string(p + 2) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
    }
    const std::string& label = fields[0];
    if (label.empty()) {
      throw csv_format_error("empty pool_id", line_no);
    }
    const double zv = parse_double(fields[1], line_no, "z");
    if (zv != 0.0 && zv != 1.0) {
      throw csv_format_error("z must be 0 or 1", line_no);
    }
    const int zi = static_cast<int>(zv);

    const int row = static_cast<int>(rows.size());
    auto [it, inserted] = pool_index.emplace(label, static_cast<int>(pools.size()));
    if (inserted) {
      pools.emplace_back();
      z.push_back(zi);
    } else if (z[it->second] != zi) {
      throw csv_format_error("pool '" + label + "' has inconsistent z values", line_no);
    }
    pools[it->second].push_back(row);

    std::vector<double> xrow(p);
    for (int j = 0; j < p; ++j) {
      xrow[j] = parse_double(fields[2 + j], line_no, "covariate");
    }
    rows.push_back(std::move(xrow));
    row_pool.push_back(it->second);
  }
  if (rows.empty()) {
    throw csv_format_error("no data rows", line_no);
  }

  Dataset data;
  data.X = Eigen::MatrixXd(rows.size(), p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < p; ++j) {
      data.X(static_cast<int>(i), j) = rows[i][j];
    }
  }
  data.pools = std::move(pools);
  data.z = std::move(z);
  data.se = se;
  data.sp = sp;
  try {
    data.validate();
  } catch (const std::invalid_argument& e) {
    throw csv_format_error(e.what(), 0);
  }
  return data;
}

Dataset read_dataset_csv_file(const std::string& path, double se, double sp) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "' for reading");
  }
  return read_dataset_csv(in, se, sp);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  data.validate();
  const int n = data.n();
  const int p = data.p();

  std::vector<int> row_pool(n, -1);
  for (int j = 0; j < data.pool_count(); ++j) {
    for (int i : data.pools[j]) {
      row_pool[i] = j;
    }
  }

  out << "pool_id,z";
  for (int j = 0; j < p; ++j) {
    out << ",x" << j + 1;
  }
  out << "\n";
  for (int i = 0; i < n; ++i) {
    out << 'g' << row_pool[i] + 1 << ',' << data.z[row_pool[i]];
    for (int j = 0; j < p; ++j) {
      out << ',' << format_double(data.X(i, j));
    }
    out << "\n";
  }
}

void write_dataset_csv_file(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  write_dataset_csv(out, data);
  if (!out.good()) {
    throw std::runtime_error("failed writing '" + path + "'");
  }
}

void write_truth_csv(std::ostream& out, const std::vector<int>& y_true) {
  out << "id,y_true\n";
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    out << i + 1 << ',' << y_true[i] << "\n";
  }
}

void write_truth_csv_file(const std::string& path, const std::vector<int>& y_true) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  write_truth_csv(out, y_true);
  if (!out.good()) {
    throw std::runtime_error("failed writing '" + path + "'");
  }
}

}  // namespace gtsel
