#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "nslab/fields.hpp"

namespace nslab {

/// Shortest round-trip decimal form of a double (deterministic).
std::string format_double(double v);

/// RFC-4180 CSV writer: CRLF line endings, quoting where needed.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::uint64_t fnv1a(const std::string& bytes);

/// Flat binary snapshot: header (dims, spacing, dt) + row-major values.
void save_field_binary(const Field& f, const std::string& path);
Field load_field_binary(const std::string& path);
void save_field_csv(const Field& f, const std::string& path);

extern const char* kVersionString;

}  // namespace nslab
