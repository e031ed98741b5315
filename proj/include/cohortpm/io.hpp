#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cohortpm::io {

/// Splits one CSV record on commas and trims surrounding blanks. No quoting.
std::vector<std::string> split_csv_line(std::string_view line);

std::string_view trim(std::string_view s);

/// Strict decimal parse: the whole field must be consumed and the value finite.
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a, used for schema fingerprints and input content hashes.
class Fnv1a {
public:
    void update(std::string_view bytes);
    std::uint64_t digest() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

} // namespace cohortpm::io
