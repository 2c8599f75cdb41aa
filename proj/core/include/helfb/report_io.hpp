// Config parsing (flat key = value with [section] headers), byte-stable
// numeric formatting, atomic file emission, and a structural JSON schema
// check for the report files.
#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "helfb/grid.hpp"

namespace helfb {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

namespace io {

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

class IniConfig {
  public:
    static IniConfig parse_file(const std::string& path);
    static IniConfig parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    // Keys are "section.name"; parse errors carry file and line.
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // All keys of one section, in file order.
    std::vector<std::pair<std::string, std::string>> section(const std::string& name) const;

    const std::string& origin() const { return origin_; }

  private:
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

    std::map<std::string, std::string> entries_;
    std::map<std::string, int> line_of_;
    std::vector<std::string> order_;
    std::string origin_;
};

// Writes content to "<path>.tmp" and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

void write_json_atomic(const std::string& path, const nlohmann::json& doc);

struct SchemaIssue {
    std::string path;
    std::string what;
};

// Structural validation supporting type/object/required/properties/array/
// items; returns the first issue found.
std::optional<SchemaIssue> validate_against_schema(const nlohmann::json& doc,
                                                   const nlohmann::json& schema);

// Stream-field round trip: psi.csv carries (x, y, psi) for the active nodes
// in row-major order.
std::string stream_field_csv(const StreamField& psi);
void fill_stream_field_from_csv(const std::string& path, StreamField& psi);

}  // namespace io
}  // namespace helfb
