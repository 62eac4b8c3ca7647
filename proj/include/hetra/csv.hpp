#pragma once

#include <string>
#include <vector>

namespace hetra::csv {

/// Shortest text that reads back to the same double.
std::string number(double v);

/// Splits one CSV line on commas. Fields never contain quotes or commas in
/// the files this project writes.
std::vector<std::string> split(const std::string& line);

/// Reads a whole CSV file into rows of fields (header included).
std::vector<std::vector<std::string>> read_file(const std::string& path);

/// Writes `text` to `path`; throws std::runtime_error naming the path.
void write_file(const std::string& path, const std::string& text);

}  // namespace hetra::csv
