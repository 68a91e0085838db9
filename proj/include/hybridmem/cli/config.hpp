// Copyright 2026 The hybridmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// INI-style scenario configuration:
//
//   # comment
//   [rates]
//   kappa = 0.01
//
// Keys are addressed as "section.key". Every scenario has a fixed table of
// known keys with defaults; anything else is rejected.

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hybridmem::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct KeySpec {
    std::string key;  // section.key
    std::string default_value;
    std::string help;
};

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

/// Raw parsed entries with their source line numbers.
struct IniEntries {
    struct Entry {
        std::string value;
        std::size_t line;
    };
    std::map<std::string, Entry> values;
};

inline IniEntries parse_ini(std::istream& in, const std::string& source = "<config>") {
    IniEntries out;
    std::string section;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError(source + ":" + std::to_string(lineno) + ": malformed section header");
            }
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        }
        const std::string full = (section.empty() || key.find('.') != std::string::npos)
                                     ? key
                                     : section + "." + key;
        if (out.values.count(full)) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + full + "'");
        }
        out.values[full] = {value, lineno};
    }
    return out;
}

/// Resolved key/value map for one scenario.
class Config {
public:
    Config() = default;
    explicit Config(std::vector<KeySpec> known) : known_(std::move(known)) {
        for (const auto& k : known_) values_[k.key] = k.default_value;
    }

    const std::vector<KeySpec>& known() const { return known_; }

    bool is_known(const std::string& key) const { return values_.count(key) > 0; }

    std::string suggest(const std::string& key) const {
        std::string best;
        std::size_t best_d = std::string::npos;
        for (const auto& k : known_) {
            const auto d = edit_distance(key, k.key);
            if (d < best_d) {
                best_d = d;
                best = k.key;
            }
        }
        return best;
    }

    void set(const std::string& key, const std::string& value, const std::string& where = "") {
        if (!is_known(key)) {
            std::string msg = (where.empty() ? "" : where + ": ") + "unknown key '" + key + "'";
            const auto s = suggest(key);
            if (!s.empty()) msg += " (did you mean '" + s + "'?)";
            throw ConfigError(msg);
        }
        values_[key] = value;
        overridden_.push_back(key);
    }

    void apply(const IniEntries& entries, const std::string& source) {
        for (const auto& [key, e] : entries.values) {
            set(key, e.value, source + ":" + std::to_string(e.line));
        }
    }

    /// "key=value" override from the command line.
    void apply_override(const std::string& kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not key=value");
        set(trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)),
            "--set");
    }

    const std::string& raw(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("internal: key '" + key + "' not registered");
        return it->second;
    }

    bool overridden(const std::string& key) const {
        return std::find(overridden_.begin(), overridden_.end(), key) != overridden_.end();
    }

    double number(const std::string& key) const {
        const auto& s = raw(key);
        double v = 0.0;
        const auto* end = s.data() + s.size();
        const auto [ptr, ec] = std::from_chars(s.data(), end, v);
        if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
            throw ConfigError("key '" + key + "': '" + s + "' is not a finite number");
        }
        return v;
    }

    double non_negative(const std::string& key) const {
        const double v = number(key);
        if (v < 0.0) throw ConfigError("key '" + key + "' must be non-negative, got " + raw(key));
        return v;
    }

    double positive(const std::string& key) const {
        const double v = number(key);
        if (!(v > 0.0)) throw ConfigError("key '" + key + "' must be positive, got " + raw(key));
        return v;
    }

    std::size_t count(const std::string& key) const {
        const double v = number(key);
        if (v < 0.0 || v != std::floor(v) || v > 1e9) {
            throw ConfigError("key '" + key + "' must be a non-negative integer, got " + raw(key));
        }
        return static_cast<std::size_t>(v);
    }

    bool flag(const std::string& key) const {
        const auto& s = raw(key);
        if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
        if (s == "false" || s == "off" || s == "no" || s == "0") return false;
        throw ConfigError("key '" + key + "' must be true/false, got '" + s + "'");
    }

    std::string choice(const std::string& key, std::initializer_list<std::string_view> allowed) const {
        const auto& s = raw(key);
        for (auto a : allowed) {
            if (s == a) return s;
        }
        std::string list;
        for (auto a : allowed) list += (list.empty() ? "" : "|") + std::string(a);
        throw ConfigError("key '" + key + "' must be one of " + list + ", got '" + s + "'");
    }

    /// Comma-separated numbers.
    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(raw(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            double v = 0.0;
            const auto* end = item.data() + item.size();
            const auto [ptr, ec] = std::from_chars(item.data(), end, v);
            if (item.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
                throw ConfigError("key '" + key + "': '" + item + "' is not a number");
            }
            out.push_back(v);
        }
        if (out.empty()) throw ConfigError("key '" + key + "' needs at least one value");
        return out;
    }

    /// All values in registration order, for metadata.
    std::vector<std::pair<std::string, std::string>> entries() const {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& k : known_) out.emplace_back(k.key, values_.at(k.key));
        return out;
    }

private:
    std::vector<KeySpec> known_;
    std::map<std::string, std::string> values_;
    std::vector<std::string> overridden_;
};

/// One linear axis of a sweep grid.
struct Axis {
    std::string name;
    double start = 0.0;
    double stop = 0.0;
    std::size_t points = 2;

    double at(std::size_t i) const {
        if (points == 1) return start;
        return start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
};

inline constexpr std::size_t kMaxGridCells = 10000;

/// Cartesian product of axes, first axis slowest.
struct SweepGrid {
    std::vector<Axis> axes;

    void validate() const {
        std::size_t cells = 1;
        for (const auto& a : axes) {
            if (a.points < 2) throw ConfigError("sweep axis '" + a.name + "' needs at least 2 points");
            cells *= a.points;
            if (cells > kMaxGridCells) {
                throw ConfigError("sweep grid exceeds " + std::to_string(kMaxGridCells) + " cells");
            }
        }
    }

    std::size_t size() const {
        std::size_t n = 1;
        for (const auto& a : axes) n *= a.points;
        return n;
    }

    std::vector<double> point(std::size_t flat) const {
        std::vector<double> out(axes.size());
        for (std::size_t i = axes.size(); i-- > 0;) {
            out[i] = axes[i].at(flat % axes[i].points);
            flat /= axes[i].points;
        }
        return out;
    }
};

}  // namespace hybridmem::cli
