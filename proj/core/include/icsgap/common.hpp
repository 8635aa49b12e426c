#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace icsgap {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// RFC 4122 name-based UUID (SHA-1), lower-case canonical form.
std::string uuid5(std::string_view namespace_uuid, std::string_view name);

// One JSON value per line, compact, UTF-8, trailing newline after each line.
std::string dump_ndjson(const std::vector<ojson>& rows);
std::vector<json> parse_ndjson(std::string_view text);
std::vector<json> read_ndjson(const std::filesystem::path& path);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
bool is_word_char(char c);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// RFC 3339 UTC timestamp of the current time, second precision.
std::string utc_now();

}  // namespace icsgap
