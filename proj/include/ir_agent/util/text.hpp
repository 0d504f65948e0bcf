#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ir_agent::util {

/// Shortest decimal text that round-trips to `value` ("1200", "1445.5").
std::string format_number(double value);

std::string_view trim(std::string_view text);
std::vector<std::string> split_lines(std::string_view text);

/// RFC 4180 record splitting: quoted fields, doubled quotes, CRLF tolerated.
/// Returns one vector of fields per record; blank lines are skipped but
/// counted, so `line_numbers[i]` is the 1-based source line of record i.
struct CsvTable {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};
CsvTable parse_csv(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Deterministic 64-bit generator with portable bounded draws. Standard
/// distributions are implementation-defined, which would make splits and
/// initializations differ across standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform integer in [0, bound), bound > 0, rejection-sampled.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double low, double high) { return low + (high - low) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::uint64_t state_;
};

}  // namespace ir_agent::util
