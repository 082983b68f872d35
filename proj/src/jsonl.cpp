#include "covrank/jsonl.hpp"

namespace covrank::jsonl {
namespace {

struct FieldError : IoError {
  using IoError::IoError;
};

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw FieldError("record is not a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw FieldError(std::string("missing field \"") + key + "\"");
  return *it;
}

}  // namespace

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path.string());
  return out;
}

void for_each(const std::filesystem::path& path,
              const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(path.string(), number, e.what());
    }
    try {
      fn(record, number);
    } catch (const ParseError&) {
      throw;
    } catch (const Json::exception& e) {
      throw ParseError(path.string(), number, e.what());
    } catch (const IoError& e) {
      throw ParseError(path.string(), number, e.what());
    }
  }
}

std::string get_string(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_string()) throw FieldError(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

double get_number(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) throw FieldError(std::string("field \"") + key + "\" must be a number");
  return v.get<double>();
}

std::int64_t get_integer(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_integer()) {
    throw FieldError(std::string("field \"") + key + "\" must be an integer");
  }
  return v.get<std::int64_t>();
}

std::string dump(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::strict); }

}  // namespace covrank::jsonl
