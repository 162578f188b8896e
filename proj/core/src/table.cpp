#include "resil/table.hpp"

#include <charconv>
#include <fstream>

#include "resil/errors.hpp"

namespace resil {

namespace {

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const TableSection& sec, const std::string& key,
                            const std::string& raw, const char* want) {
    throw ConfigError("section [" + sec.name + "] key '" + key + "': expected " + want +
                      ", got '" + raw + "'");
}

}  // namespace

bool TableSection::has(const std::string& key) const { return find(key) != nullptr; }

const std::string* TableSection::find(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

std::string TableSection::get(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) throw ConfigError("section [" + name + "] is missing key '" + key + "'");
    return *v;
}

std::string TableSection::get_or(const std::string& key, std::string fallback) const {
    const std::string* v = find(key);
    return v ? *v : std::move(fallback);
}

double TableSection::get_double(const std::string& key) const {
    std::string raw = get(key);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), out);
    if (ec != std::errc() || ptr != raw.data() + raw.size())
        bad_value(*this, key, raw, "a number");
    return out;
}

double TableSection::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long TableSection::get_int(const std::string& key) const {
    std::string raw = get(key);
    long out = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), out);
    if (ec != std::errc() || ptr != raw.data() + raw.size())
        bad_value(*this, key, raw, "an integer");
    return out;
}

long TableSection::get_int_or(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool TableSection::get_bool_or(const std::string& key, bool fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    bad_value(*this, key, *v, "a boolean");
}

const TableSection* Table::find(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

const TableSection& Table::require(const std::string& name) const {
    const TableSection* s = find(name);
    if (!s)
        throw ConfigError(source.string() + ": missing required section [" + name + "]");
    return *s;
}

Table load_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());

    Table t;
    t.source = path;
    TableSection* cur = nullptr;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string s = strip(line);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                                  ": unterminated section header");
            std::string name = strip(s.substr(1, s.size() - 2));
            if (name.empty())
                throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                                  ": empty section name");
            if (t.find(name))
                throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                                  ": duplicate section [" + name + "]");
            t.sections.push_back({name, lineno, {}});
            cur = &t.sections.back();
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        std::string key = strip(s.substr(0, eq));
        std::string value = strip(s.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": empty key");
        if (!cur) {
            t.sections.push_back({"", 0, {}});
            cur = &t.sections.back();
        }
        if (cur->find(key))
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": duplicate key '" + key + "' in section [" + cur->name +
                              "]");
        cur->entries.emplace_back(std::move(key), std::move(value));
    }
    return t;
}

}  // namespace resil
