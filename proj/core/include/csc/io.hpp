#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace csc {

/// 17-significant-digit decimal formatting; round-trips doubles exactly.
std::string format_full(double x);

/// Write content to path atomically (temporary file in the same directory,
/// then rename).
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// FNV-1a 64-bit content hash, hex-encoded; used by the artifact manifests.
std::string content_hash(const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

/// Simple CSV builder: comma separators, LF line endings, header row first.
class CsvBuilder {
public:
    explicit CsvBuilder(std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);
    const std::string& str() const { return buf_; }

private:
    std::string buf_;
    std::size_t ncols_;
};

} // namespace csc
