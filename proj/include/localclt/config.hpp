#ifndef LOCALCLT_CONFIG_HPP
#define LOCALCLT_CONFIG_HPP

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "localclt/errors.hpp"

namespace localclt {

// Flat key-value run configuration with [section] headers.
//
//   # comment
//   [simulate]
//   generator = mdep_ma
//   sizes = 256, 512, 1024
//
// Keys and section names are case-sensitive; values keep internal spaces and
// lose surrounding whitespace. Duplicate keys within a section are an error.
class RunConfig {
public:
    static RunConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        return parse_stream(in, path);
    }

    static RunConfig parse_stream(std::istream& in, const std::string& origin = "<config>") {
        RunConfig cfg;
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip(line);
            if (s.empty() || s[0] == '#') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": unterminated section header");
                section = strip(s.substr(1, s.size() - 2));
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected key = value");
            std::string key = strip(s.substr(0, eq));
            std::string value = strip(s.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            std::string full = section.empty() ? key : section + "." + key;
            if (!cfg.values_.emplace(full, value).second)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                                  full + "'");
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_real(const std::string& key) const { return to_real(key, get_string(key)); }
    double get_real(const std::string& key, double fallback) const {
        return has(key) ? get_real(key) : fallback;
    }

    long long get_int(const std::string& key) const { return to_int(key, get_string(key)); }
    long long get_int(const std::string& key, long long fallback) const {
        return has(key) ? get_int(key) : fallback;
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const std::string v = get_string(key);
        char* end = nullptr;
        std::uint64_t out = std::strtoull(v.c_str(), &end, 10);
        if (end == nullptr || *end != '\0')
            throw ConfigError("config key '" + key + "': bad unsigned integer '" + v + "'");
        return out;
    }

    std::vector<double> get_real_list(const std::string& key) const {
        std::vector<double> out;
        for (const auto& tok : split_commas(get_string(key))) out.push_back(to_real(key, tok));
        return out;
    }

    std::vector<long long> get_int_list(const std::string& key) const {
        std::vector<long long> out;
        for (const auto& tok : split_commas(get_string(key))) out.push_back(to_int(key, tok));
        return out;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

private:
    static std::string strip(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    static std::vector<std::string> split_commas(const std::string& s) {
        std::vector<std::string> out;
        std::size_t pos = 0;
        while (pos <= s.size()) {
            std::size_t comma = s.find(',', pos);
            if (comma == std::string::npos) comma = s.size();
            std::string tok = strip(s.substr(pos, comma - pos));
            if (!tok.empty()) out.push_back(tok);
            pos = comma + 1;
            if (comma == s.size()) break;
        }
        return out;
    }

    static double to_real(const std::string& key, const std::string& v) {
        char* end = nullptr;
        double out = std::strtod(v.c_str(), &end);
        if (end == nullptr || *end != '\0')
            throw ConfigError("config key '" + key + "': bad number '" + v + "'");
        return out;
    }

    static long long to_int(const std::string& key, const std::string& v) {
        char* end = nullptr;
        long long out = std::strtoll(v.c_str(), &end, 10);
        if (end == nullptr || *end != '\0')
            throw ConfigError("config key '" + key + "': bad integer '" + v + "'");
        return out;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace localclt

#endif
