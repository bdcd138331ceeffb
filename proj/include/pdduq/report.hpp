#pragma once

#include <string>
#include <vector>

namespace pdduq {

// 17 significant digits, '.' decimal separator, round-trips exactly.
std::string format_double(double v);
// RFC 4180 field quoting.
std::string csv_escape(const std::string& field);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> row);
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  // CRLF line endings as the RFC prescribes.
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace pdduq
