#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "covrank/error.hpp"

namespace covrank::jsonl {

using Json = nlohmann::json;

// Calls `fn(record, line_number)` for each non-blank line. Exceptions thrown
// by `fn` that are not already ParseErrors are rewrapped with the location.
void for_each(const std::filesystem::path& path,
              const std::function<void(const Json&, std::size_t)>& fn);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

// Field accessors that raise a ParseError naming the field.
std::string get_string(const Json& j, const char* key);
double get_number(const Json& j, const char* key);
std::int64_t get_integer(const Json& j, const char* key);

// Compact single-line serialization used for every JSONL writer.
std::string dump(const Json& j);

}  // namespace covrank::jsonl
