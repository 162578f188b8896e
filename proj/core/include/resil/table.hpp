#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace resil {

// One [section] of a flat key=value file, keys kept in file order.
struct TableSection {
    std::string name;
    int line = 0;
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const;
    const std::string* find(const std::string& key) const;
    std::string get(const std::string& key) const;                // ConfigError if absent
    std::string get_or(const std::string& key, std::string fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int_or(const std::string& key, long fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
};

// [section] headers, key = value lines, '#' comments, blank lines.
// Keys before any section header land in a section named "".
struct Table {
    std::filesystem::path source;
    std::vector<TableSection> sections;

    const TableSection* find(const std::string& name) const;
    const TableSection& require(const std::string& name) const;
};

Table load_table(const std::filesystem::path& path);

}  // namespace resil
