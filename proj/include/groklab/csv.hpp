#pragma once

#include <optional>
#include <string>
#include <vector>

namespace groklab {

// Minimal CSV layer shared by all outputs: header row, '.' decimal,
// optional leading '#' comment lines, empty cell = absent value.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void comment(const std::string& text);
  void header(const std::vector<std::string>& cols);

  void field(const std::string& s);
  void field(double v);
  void field(long long v);
  void field(std::optional<long long> v);  // empty cell when absent
  void end_row();

 private:
  void sep();
  void* fp_;
  bool row_open_ = false;
};

// round-trip decimal formatting for doubles
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const;  // -1 when missing
  double num(std::size_t row, int col) const;
  std::optional<long long> opt_int(std::size_t row, int col) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace groklab
