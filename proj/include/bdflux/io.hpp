#pragma once

// Text I/O: lossless CSV (shortest round-trip decimal for binary64), the
// flat "section.key = value" config grammar with line-number diagnostics,
// JSON metadata that can be re-ingested as a config, and minimal
// self-contained SVG line plots.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "grid.hpp"

namespace bdflux {

// ------------------------------------------------------------------ numbers

inline std::string format_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(e[-1]))) --e;
    auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e)
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return v;
}

// ---------------------------------------------------------------------- CSV

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::invalid_argument("csv: no column '" + std::string(name) + "'");
    }
};

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("csv: row width differs from header");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            std::size_t pos = s.find(',', start);
            cells.push_back(s.substr(start, pos == std::string::npos ? pos : pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        return cells;
    };
    if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (auto& c : split(line)) t.header.push_back(c);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.header.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": wrong number of cells");
        std::vector<double> row;
        row.reserve(cells.size());
        for (auto& c : cells) row.push_back(parse_double(c));
        t.rows.push_back(std::move(row));
    }
    return t;
}

// Snapshot files carry a redundant constant t column so each file is
// self-describing.
inline void write_snapshot_csv(const std::filesystem::path& path, const GridField& s) {
    std::vector<std::vector<double>> rows;
    rows.reserve(s.u.size());
    for (std::size_t i = 0; i < s.u.size(); ++i)
        rows.push_back({s.grid.x(static_cast<int>(i)), s.u[i], s.t});
    write_csv(path, {"x", "u", "t"}, rows);
}

inline GridField read_snapshot_csv(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    std::size_t cx = t.column("x"), cu = t.column("u"), ct = t.column("t");
    if (t.rows.size() < 16) throw std::runtime_error("snapshot too short: " + path.string());
    Grid g{t.rows.front()[cx], t.rows.back()[cx], static_cast<int>(t.rows.size())};
    GridField f(g, t.rows.front()[ct]);
    double dx = g.dx();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        double expect = g.x(static_cast<int>(i));
        if (std::abs(t.rows[i][cx] - expect) > 1e-9 * (1.0 + std::abs(expect)))
            throw std::runtime_error("snapshot grid not uniform: " + path.string());
        (void)dx;
        f.u[i] = t.rows[i][cu];
    }
    return f;
}

// ------------------------------------------------------------------- config

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(const std::string& what, int line_no)
        : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + what : what),
          line(line_no) {}
};

// Flat key/value store. Text form is one "section.key = value" per line with
// '#' comments; a JSON object file (taken as nested sections) loads into the
// same store, which is how run metadata re-ingests as a config.
class Config {
public:
    static Config parse_text(const std::string& text) {
        Config c;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip_comment(line);
            if (trim(s).empty()) continue;
            std::size_t eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
            std::string key = trim(s.substr(0, eq));
            std::string value = trim(s.substr(eq + 1));
            if (key.empty()) throw ConfigError("empty key", lineno);
            if (key.find('.') == std::string::npos)
                throw ConfigError("key must be section.name: '" + key + "'", lineno);
            if (c.kv_.count(key)) throw ConfigError("duplicate key '" + key + "'", lineno);
            c.kv_[key] = value;
        }
        return c;
    }

    static Config from_json(const nlohmann::json& j) {
        Config c;
        flatten(j, "", c);
        return c;
    }

    static Config load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open config: " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        std::string text = ss.str();
        std::size_t i = 0;
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i < text.size() && text[i] == '{') return from_json(nlohmann::json::parse(text));
        return parse_text(text);
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get_string(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) throw ConfigError("missing required key '" + key + "'", 0);
        return it->second;
    }
    std::string get_string(const std::string& key, const std::string& dflt) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? dflt : it->second;
    }

    double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
    double get_double(const std::string& key, double dflt) const {
        return has(key) ? get_double(key) : dflt;
    }

    long get_int(const std::string& key) const {
        double v = get_double(key);
        long n = static_cast<long>(std::llround(v));
        if (v != static_cast<double>(n)) throw ConfigError("key '" + key + "' is not an integer", 0);
        return n;
    }
    long get_int(const std::string& key, long dflt) const {
        return has(key) ? get_int(key) : dflt;
    }

    bool get_bool(const std::string& key, bool dflt) const {
        if (!has(key)) return dflt;
        std::string v = get_string(key);
        if (v == "true" || v == "on" || v == "1") return true;
        if (v == "false" || v == "off" || v == "0") return false;
        throw ConfigError("key '" + key + "' is not a boolean: '" + v + "'", 0);
    }

    std::vector<double> get_double_list(const std::string& key) const {
        std::string raw = get_string(key);
        std::vector<double> out;
        std::string cell;
        std::istringstream in(raw);
        while (std::getline(in, cell, ',')) {
            cell = trim(cell);
            if (cell.empty()) continue;
            out.push_back(to_double(key, cell));
        }
        if (out.empty()) throw ConfigError("key '" + key + "' holds no numbers", 0);
        return out;
    }
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& dflt) const {
        return has(key) ? get_double_list(key) : dflt;
    }

    const std::map<std::string, std::string>& entries() const { return kv_; }

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [key, value] : kv_) {
            nlohmann::json* node = &j;
            std::size_t start = 0;
            while (true) {
                std::size_t dot = key.find('.', start);
                if (dot == std::string::npos) {
                    (*node)[key.substr(start)] = value;
                    break;
                }
                node = &(*node)[key.substr(start, dot - start)];
                start = dot + 1;
            }
        }
        return j;
    }

private:
    static std::string strip_comment(const std::string& s) {
        std::size_t pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }
    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }
    static double to_double(const std::string& key, const std::string& v) {
        try {
            return parse_double(v);
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' is not a number: '" + v + "'", 0);
        }
    }
    static void flatten(const nlohmann::json& j, const std::string& prefix, Config& c) {
        if (j.is_object()) {
            for (auto it = j.begin(); it != j.end(); ++it)
                flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), c);
        } else if (j.is_array()) {
            std::string joined;
            for (const auto& v : j) {
                if (!joined.empty()) joined += ", ";
                joined += scalar_to_string(v);
            }
            c.kv_[prefix] = joined;
        } else {
            c.kv_[prefix] = scalar_to_string(j);
        }
    }
    static std::string scalar_to_string(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        if (v.is_number()) return format_double(v.get<double>());
        if (v.is_null()) return "";
        return v.dump();
    }

    std::map<std::string, std::string> kv_;
};

// ---------------------------------------------------------------------- SVG

struct SvgSeries {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x, y;
};

// Minimal standalone polyline plot; axes box with min/max labels, one
// polyline per series, legend swatches top-right.
inline void write_svg_lines(const std::filesystem::path& path, const std::string& title,
                            const std::vector<SvgSeries>& series, int width = 720,
                            int height = 420) {
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    bool first = true;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("svg: x/y length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (first) {
                x_lo = x_hi = s.x[i];
                y_lo = y_hi = s.y[i];
                first = false;
            } else {
                x_lo = std::min(x_lo, s.x[i]);
                x_hi = std::max(x_hi, s.x[i]);
                y_lo = std::min(y_lo, s.y[i]);
                y_hi = std::max(y_hi, s.y[i]);
            }
        }
    }
    if (x_hi <= x_lo) x_hi = x_lo + 1;
    if (y_hi <= y_lo) y_hi = y_lo + (std::abs(y_lo) > 0 ? std::abs(y_lo) : 1) * 1e-3;
    const double ml = 60, mr = 20, mt = 40, mb = 40;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto sx = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto sy = [&](double y) { return mt + (y_hi - y) / (y_hi - y_lo) * ph; };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
        << title << "</text>\n";
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    auto label = [&](double px, double py, const std::string& text, const char* anchor) {
        out << "<text x=\"" << px << "\" y=\"" << py << "\" text-anchor=\"" << anchor
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">" << text
            << "</text>\n";
    };
    label(ml, height - mb + 16, format_double(x_lo), "start");
    label(width - mr, height - mb + 16, format_double(x_hi), "end");
    label(ml - 6, height - mb, format_double(y_lo), "end");
    label(ml - 6, mt + 10, format_double(y_hi), "end");
    int li = 0;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.4\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            out << format_double(sx(s.x[i])) << ',' << format_double(sy(s.y[i])) << ' ';
        }
        out << "\"/>\n";
        if (!s.label.empty()) {
            double y = mt + 14 + 16 * li;
            out << "<line x1=\"" << width - mr - 90 << "\" y1=\"" << y << "\" x2=\""
                << width - mr - 70 << "\" y2=\"" << y << "\" stroke=\"" << s.color
                << "\" stroke-width=\"2\"/>\n";
            label(width - mr - 64, y + 4, s.label, "start");
            ++li;
        }
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace bdflux
