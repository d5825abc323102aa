#include "pbench/config.hpp"

#include <algorithm>
#include <stdexcept>

#include "pbench/errors.hpp"
#include "pbench/util.hpp"

namespace pbench {

namespace {

std::string unescape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            char c = s[++i];
            switch (c) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '\\': out += '\\'; break;
                default:
                    out += '\\';
                    out += c;
            }
        } else {
            out += s[i];
        }
    }
    return out;
}

}  // namespace

IniFile IniFile::parse(const std::string& text, const std::string& origin) {
    IniFile ini;
    ini.origin_ = origin;
    std::string section;
    int lineno = 0;
    for (const std::string& raw : split(text, '\n')) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(origin + ": unterminated section header", lineno);
            section = trim(line.substr(1, line.size() - 2));
            if (!ini.sections_.count(section)) {
                ini.order_.push_back(section);
                ini.sections_[section] = {};
            }
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(origin + ": expected 'key = value'", lineno);
        std::string key = trim(line.substr(0, eq));
        std::string value = unescape(trim(line.substr(eq + 1)));
        if (key.empty()) throw ParseError(origin + ": empty key", lineno);
        if (!ini.sections_.count(section)) {
            ini.order_.push_back(section);
            ini.sections_[section] = {};
        }
        ini.sections_[section].emplace_back(key, value);
    }
    return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
    return parse(read_file(path), path);
}

bool IniFile::has_section(const std::string& section) const {
    return sections_.count(section) != 0;
}

bool IniFile::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](const auto& kv) { return kv.first == key; });
}

const std::string& IniFile::get(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    if (it != sections_.end()) {
        // last occurrence wins
        for (auto kv = it->second.rbegin(); kv != it->second.rend(); ++kv) {
            if (kv->first == key) return kv->second;
        }
    }
    throw ConfigError(origin_ + ": missing key '" + key + "' in section [" + section + "]");
}

std::string IniFile::get_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& v = get(section, key);
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "' in [" + section +
                          "] is not a number: " + v);
    }
}

long long IniFile::get_int(const std::string& section, const std::string& key,
                           long long fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& v = get(section, key);
    try {
        std::size_t pos = 0;
        long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "' in [" + section +
                          "] is not an integer: " + v);
    }
}

bool IniFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = to_lower_ascii(get(section, key));
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError(origin_ + ": key '" + key + "' in [" + section +
                      "] is not a boolean: " + v);
}

std::vector<std::string> IniFile::sections_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& s : order_) {
        if (s.rfind(prefix, 0) == 0) out.push_back(s);
    }
    return out;
}

std::vector<std::string> IniFile::keys(const std::string& section) const {
    std::vector<std::string> out;
    auto it = sections_.find(section);
    if (it == sections_.end()) return out;
    for (const auto& kv : it->second) {
        if (std::find(out.begin(), out.end(), kv.first) == out.end()) out.push_back(kv.first);
    }
    return out;
}

}  // namespace pbench
