#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace editfactory {

using Bytes = std::vector<std::uint8_t>;

std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view data);

// Returns an ISO-8601 UTC timestamp ("2026-01-02T03:04:05Z").
using Clock = std::function<std::string()>;
std::string utc_now();
Clock system_clock_utc();
Clock fixed_clock(std::string timestamp);

Bytes read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);
// Writes via a temporary sibling and rename so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string trim(std::string_view s);
// Trim plus collapse of internal whitespace runs to one space.
std::string normalize_whitespace(std::string_view s);
std::string to_lower_ascii(std::string_view s);

std::string base64_encode(std::span<const std::uint8_t> data);

// Replaces every character outside [A-Za-z0-9._-] with '_'.
std::string sanitize_filename(std::string_view s);

}  // namespace editfactory
