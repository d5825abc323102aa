#pragma once

#include <map>
#include <string>
#include <vector>

namespace pbench {

/// Minimal INI-style config reader shared by the prompt, backend, and
/// pipeline config files.
///
/// Syntax:
///   [section]            sections; keys before any header live in ""
///   key = value          value trimmed; \n \t \\ escapes expanded
///   # comment            full-line comments (also ';')
///
/// Duplicate keys within a section: last one wins.
class IniFile {
public:
    static IniFile parse(const std::string& text, const std::string& origin = "<string>");
    static IniFile parse_file(const std::string& path);

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;

    /// Throws ConfigError when the key is missing.
    const std::string& get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long long get_int(const std::string& section, const std::string& key, long long fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    /// Section names in file order.
    const std::vector<std::string>& sections() const { return order_; }

    /// Section names starting with the given prefix, in file order.
    std::vector<std::string> sections_with_prefix(const std::string& prefix) const;

    /// Keys of one section in file order.
    std::vector<std::string> keys(const std::string& section) const;

    const std::string& origin() const { return origin_; }

private:
    std::string origin_;
    std::vector<std::string> order_;
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections_;
};

}  // namespace pbench
