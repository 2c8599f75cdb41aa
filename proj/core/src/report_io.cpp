#include "helfb/report_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace helfb::io {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

IniConfig IniConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path);
}

IniConfig IniConfig::parse_string(const std::string& text, const std::string& origin) {
    IniConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        cfg.entries_[full] = value;
        cfg.line_of_[full] = lineno;
        cfg.order_.push_back(full);
    }
    return cfg;
}

void IniConfig::fail(const std::string& key, const std::string& what) const {
    auto it = line_of_.find(key);
    const std::string where =
        it == line_of_.end() ? origin_ : origin_ + ":" + std::to_string(it->second);
    throw ConfigError(where + ": " + what + " (key '" + key + "')");
}

std::string IniConfig::get_string(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) fail(key, "missing required config value");
    return it->second;
}

std::string IniConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double IniConfig::get_double(const std::string& key) const {
    const std::string raw = get_string(key);
    double value = 0.0;
    const char* begin = raw.data();
    const char* end = raw.data() + raw.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) fail(key, "not a number: '" + raw + "'");
    return value;
}

double IniConfig::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int IniConfig::get_int(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const std::string raw = get_string(key);
    int value = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (ec != std::errc{} || ptr != raw.data() + raw.size()) {
        fail(key, "not an integer: '" + raw + "'");
    }
    return value;
}

bool IniConfig::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string raw = get_string(key);
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    fail(key, "not a boolean: '" + raw + "'");
}

std::vector<std::pair<std::string, std::string>> IniConfig::section(
    const std::string& name) const {
    std::vector<std::pair<std::string, std::string>> out;
    const std::string prefix = name + ".";
    for (const std::string& key : order_) {
        if (key.rfind(prefix, 0) == 0) {
            out.emplace_back(key.substr(prefix.size()), entries_.at(key));
        }
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out.good()) throw std::runtime_error("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
    }
}

void write_json_atomic(const std::string& path, const nlohmann::json& doc) {
    write_file_atomic(path, doc.dump(2) + "\n");
}

namespace {

bool type_matches(const nlohmann::json& value, const std::string& type) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "number") return value.is_number();
    if (type == "integer") return value.is_number_integer();
    if (type == "boolean") return value.is_boolean();
    if (type == "null") return value.is_null();
    return false;
}

std::optional<SchemaIssue> validate_node(const nlohmann::json& doc,
                                         const nlohmann::json& schema,
                                         const std::string& path) {
    if (schema.contains("type")) {
        const std::string type = schema["type"].get<std::string>();
        if (!type_matches(doc, type)) {
            return SchemaIssue{path, "expected " + type};
        }
    }
    if (schema.contains("required")) {
        for (const auto& req : schema["required"]) {
            if (!doc.contains(req.get<std::string>())) {
                return SchemaIssue{path, "missing required member '" + req.get<std::string>() + "'"};
            }
        }
    }
    if (schema.contains("properties") && doc.is_object()) {
        for (const auto& [name, sub] : schema["properties"].items()) {
            if (doc.contains(name)) {
                if (auto issue = validate_node(doc[name], sub, path + "/" + name)) return issue;
            }
        }
    }
    if (schema.contains("items") && doc.is_array()) {
        const auto& sub = schema["items"];
        for (std::size_t i = 0; i < doc.size(); ++i) {
            if (auto issue = validate_node(doc[i], sub, path + "/" + std::to_string(i))) {
                return issue;
            }
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<SchemaIssue> validate_against_schema(const nlohmann::json& doc,
                                                   const nlohmann::json& schema) {
    return validate_node(doc, schema, "");
}

std::string stream_field_csv(const StreamField& psi) {
    const CrossSectionGrid& g = psi.grid();
    std::string out = "x,y,psi\n";
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            const int node = g.node_index(i, j);
            if (!g.node_active[node]) continue;
            const Vec2 p = g.node_pos(i, j);
            out += format_double(p.x);
            out += ',';
            out += format_double(p.y);
            out += ',';
            out += format_double(psi.values()[node]);
            out += '\n';
        }
    }
    return out;
}

void fill_stream_field_from_csv(const std::string& path, StreamField& psi) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    const CrossSectionGrid& g = psi.grid();
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
    int j = 0, i = 0;
    auto advance = [&]() {
        while (j <= g.ny) {
            if (i > g.nx) {
                i = 0;
                ++j;
                continue;
            }
            if (j <= g.ny && g.node_active[g.node_index(i, j)]) return true;
            ++i;
        }
        return false;
    };
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        if (!advance()) throw ConfigError(path + ": more rows than active grid nodes");
        double x = 0, y = 0, v = 0;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        if (!(ls >> x >> y >> v)) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed row");
        }
        const Vec2 expect = g.node_pos(i, j);
        if (std::abs(x - expect.x) > 1e-9 * std::max(1.0, std::abs(expect.x)) ||
            std::abs(y - expect.y) > 1e-9 * std::max(1.0, std::abs(expect.y))) {
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": row does not match the grid layout");
        }
        psi.values()[g.node_index(i, j)] = v;
        ++i;
    }
    if (advance()) throw ConfigError(path + ": fewer rows than active grid nodes");
}

}  // namespace helfb::io
