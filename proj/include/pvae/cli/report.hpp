#pragma once

#include <string>
#include <utility>
#include <vector>

namespace pvae::cli {

using Record = std::vector<std::pair<std::string, std::string>>;

/// Line-delimited records: tab-separated key=value fields, one record per line.
/// Tabs and newlines inside values are replaced by spaces.
class ReportWriter {
 public:
  void add(const Record& record);
  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

/// Hex SHA-256 of a file's bytes. Throws IoError when unreadable.
std::string sha256_file(const std::string& path);

/// Splits one report line back into fields.
Record parse_record(const std::string& line);

}  // namespace pvae::cli
