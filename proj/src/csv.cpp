#include "groklab/csv.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "groklab/common.hpp"

namespace groklab {

std::string format_double(double v) {
  char buf[40];
  // shortest representation that round-trips a double
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path) {
  fp_ = std::fopen(path.c_str(), "wb");
  if (!fp_) throw RuntimeFault("cannot open for writing: " + path);
}

CsvWriter::~CsvWriter() {
  if (fp_) std::fclose(static_cast<std::FILE*>(fp_));
}

void CsvWriter::comment(const std::string& text) {
  std::fprintf(static_cast<std::FILE*>(fp_), "# %s\n", text.c_str());
}

void CsvWriter::header(const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i)
    std::fprintf(static_cast<std::FILE*>(fp_), "%s%s", i ? "," : "", cols[i].c_str());
  std::fprintf(static_cast<std::FILE*>(fp_), "\n");
}

void CsvWriter::sep() {
  if (row_open_) std::fputc(',', static_cast<std::FILE*>(fp_));
  row_open_ = true;
}

void CsvWriter::field(const std::string& s) {
  sep();
  std::fputs(s.c_str(), static_cast<std::FILE*>(fp_));
}

void CsvWriter::field(double v) { field(format_double(v)); }

void CsvWriter::field(long long v) {
  sep();
  std::fprintf(static_cast<std::FILE*>(fp_), "%lld", v);
}

void CsvWriter::field(std::optional<long long> v) {
  if (v)
    field(*v);
  else
    sep();
}

void CsvWriter::end_row() {
  std::fputc('\n', static_cast<std::FILE*>(fp_));
  row_open_ = false;
}

static std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFault("cannot open: " + path);
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      t.columns = split_line(line);
      have_header = true;
    } else {
      t.rows.push_back(split_line(line));
    }
  }
  return t;
}

int CsvTable::col(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

double CsvTable::num(std::size_t row, int c) const {
  if (c < 0 || row >= rows.size() || static_cast<std::size_t>(c) >= rows[row].size())
    throw RuntimeFault("csv: bad cell access");
  return std::stod(rows[row][c]);
}

std::optional<long long> CsvTable::opt_int(std::size_t row, int c) const {
  if (c < 0 || row >= rows.size() || static_cast<std::size_t>(c) >= rows[row].size())
    throw RuntimeFault("csv: bad cell access");
  const std::string& s = rows[row][c];
  if (s.empty()) return std::nullopt;
  return std::stoll(s);
}

}  // namespace groklab
