#pragma once

// Result tables and their CSV, JSON and SVG renderings. Numbers are written
// with std::to_chars (shortest round-trip form), so equal results give equal
// bytes; the only run-dependent text is the "# generated:" comment line.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace persistlab {

using Cell = std::variant<std::monostate, std::int64_t, double, std::string, bool>;

struct Column {
    std::string name;
    std::string unit; // "1" for dimensionless
};

struct Table {
    std::string title;
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;
    // Scalar results of the run (fit parameters and the like), in order.
    std::vector<std::pair<std::string, Cell>> summary;
    // Generating configuration, in order.
    std::vector<std::pair<std::string, std::string>> config;

    std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i].name == name) return i;
        throw std::out_of_range("Table: no column '" + name + "'");
    }

    void add_row(std::vector<Cell> row)
    {
        if (row.size() != columns.size()) throw std::logic_error("Table: row width does not match columns");
        rows.push_back(std::move(row));
    }

    /// Numeric view of a cell; empty cells read as NaN.
    double number(std::size_t row, const std::string& name) const { return as_number(rows.at(row).at(column(name))); }

    double summary_number(const std::string& key) const
    {
        for (const auto& [k, v] : summary)
            if (k == key) return as_number(v);
        throw std::out_of_range("Table: no summary entry '" + key + "'");
    }

    static double as_number(const Cell& c)
    {
        if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
        if (const auto* d = std::get_if<double>(&c)) return *d;
        if (const auto* b = std::get_if<bool>(&c)) return *b ? 1.0 : 0.0;
        return std::numeric_limits<double>::quiet_NaN();
    }
};

inline std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_cell(const Cell& c)
{
    struct {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const { return format_double(v); }
        std::string operator()(const std::string& v) const { return v; }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
    } visitor;
    return std::visit(visitor, c);
}

/// RFC 4180 quoting: fields holding a comma, quote or line break are quoted
/// and embedded quotes doubled.
inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

inline std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

inline constexpr const char* kGeneratedPrefix = "# generated: ";

/// '#'-comment header (tool version, timestamp, config, units, summary),
/// one header row, then data rows, '\n' line endings.
inline std::string to_csv(const Table& t, const std::string& version, bool with_timestamp = true)
{
    std::string out = "# persistlab " + version + " " + t.title + "\n";
    if (with_timestamp) out += kGeneratedPrefix + utc_timestamp() + "\n";
    out += "# config:";
    for (const auto& [k, v] : t.config) out += " " + k + "=" + v;
    out += "\n# units:";
    for (const auto& c : t.columns) out += " " + c.name + "[" + c.unit + "]";
    out += "\n";
    for (const auto& [k, v] : t.summary) out += "# result: " + k + "=" + format_cell(v) + "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_field(t.columns[i].name);
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(format_cell(row[i]));
        out += "\n";
    }
    return out;
}

/// The CSV text without its timestamp line: the part that must be
/// reproducible.
inline std::string csv_payload(const std::string& csv)
{
    std::string out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(kGeneratedPrefix, 0) != 0) out += line + "\n";
    return out;
}

inline nlohmann::ordered_json cell_json(const Cell& c)
{
    struct {
        nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
        nlohmann::ordered_json operator()(std::int64_t v) const { return v; }
        nlohmann::ordered_json operator()(double v) const
        {
            if (std::isfinite(v)) return v;
            return format_double(v); // JSON has no inf/nan
        }
        nlohmann::ordered_json operator()(const std::string& v) const { return v; }
        nlohmann::ordered_json operator()(bool v) const { return v; }
    } visitor;
    return std::visit(visitor, c);
}

/// {"meta": {...}, "summary": {...}, "records": [{col: value, ...}, ...]}.
/// JSON carries no timestamp, so the whole document is the payload.
inline std::string to_json(const Table& t, const std::string& version)
{
    nlohmann::ordered_json doc;
    doc["meta"]["tool"] = "persistlab";
    doc["meta"]["version"] = version;
    doc["meta"]["table"] = t.title;
    for (const auto& [k, v] : t.config) doc["meta"]["config"][k] = v;
    for (const auto& c : t.columns) doc["meta"]["units"][c.name] = c.unit;
    doc["summary"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.summary) doc["summary"][k] = cell_json(v);
    doc["records"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json rec;
        for (std::size_t i = 0; i < row.size(); ++i) rec[t.columns[i].name] = cell_json(row[i]);
        doc["records"].push_back(std::move(rec));
    }
    return doc.dump(2) + "\n";
}

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    std::vector<double> y_low, y_high; // optional error bars
};

struct PlotSpec {
    std::string title, x_label, y_label;
    bool log_y = false;
    std::vector<PlotSeries> series;
};

namespace detail {

inline std::string svg_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string fixed(double v, int digits = 2)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

// 1-2-5 steps covering [lo, hi] with about `target` ticks.
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6)
{
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> ticks;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) ticks.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return ticks;
}

} // namespace detail

/// Static SVG 1.1 line/scatter chart with axes, ticks and a legend.
inline std::string to_svg(const PlotSpec& spec)
{
    const double W = 720, H = 450, left = 80, right = 170, top = 45, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;
    auto ty = [&](double v) { return spec.log_y ? (v > 0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN()) : v; };

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : spec.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double yv = ty(s.y[i]);
            if (!std::isfinite(s.x[i]) || !std::isfinite(yv)) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, yv);
            ymax = std::max(ymax, yv);
            for (const auto* band : {&s.y_low, &s.y_high})
                if (i < band->size() && std::isfinite(ty((*band)[i]))) {
                    ymin = std::min(ymin, ty((*band)[i]));
                    ymax = std::max(ymax, ty((*band)[i]));
                }
        }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
    if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double v) { return top + (ymax - v) / (ymax - ymin) * ph; };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"25\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
       << detail::svg_escape(spec.title) << "</text>\n"
       << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double v : detail::nice_ticks(xmin, xmax)) {
        os << "<line x1=\"" << detail::fixed(px(v)) << "\" y1=\"" << top + ph << "\" x2=\"" << detail::fixed(px(v))
           << "\" y2=\"" << top + ph + 5 << "\" stroke=\"black\"/>"
           << "<text x=\"" << detail::fixed(px(v)) << "\" y=\"" << top + ph + 20
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << format_double(v) << "</text>\n";
    }
    for (double v : detail::nice_ticks(ymin, ymax)) {
        const std::string label = spec.log_y ? "1e" + format_double(v) : format_double(v);
        os << "<line x1=\"" << left - 5 << "\" y1=\"" << detail::fixed(py(v)) << "\" x2=\"" << left << "\" y2=\""
           << detail::fixed(py(v)) << "\" stroke=\"black\"/>"
           << "<text x=\"" << left - 8 << "\" y=\"" << detail::fixed(py(v) + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << detail::svg_escape(spec.x_label)
       << "</text>\n"
       << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
       << "transform=\"rotate(-90 20 " << top + ph / 2 << ")\">" << detail::svg_escape(spec.y_label) << "</text>\n";

    for (std::size_t k = 0; k < spec.series.size(); ++k) {
        const auto& s = spec.series[k];
        const char* color = colors[k % 6];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double yv = ty(s.y[i]);
            if (!std::isfinite(s.x[i]) || !std::isfinite(yv)) continue;
            pts += detail::fixed(px(s.x[i])) + "," + detail::fixed(py(yv)) + " ";
            if (i < s.y_low.size() && i < s.y_high.size() && std::isfinite(ty(s.y_low[i])) &&
                std::isfinite(ty(s.y_high[i])))
                os << "<line x1=\"" << detail::fixed(px(s.x[i])) << "\" y1=\"" << detail::fixed(py(ty(s.y_low[i])))
                   << "\" x2=\"" << detail::fixed(px(s.x[i])) << "\" y2=\"" << detail::fixed(py(ty(s.y_high[i])))
                   << "\" stroke=\"" << color << "\"/>\n";
            os << "<circle cx=\"" << detail::fixed(px(s.x[i])) << "\" cy=\"" << detail::fixed(py(yv))
               << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        if (!pts.empty()) os << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color << "\"/>\n";
        const double ly = top + 15 + 20.0 * k;
        os << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 35 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>"
           << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">"
           << detail::svg_escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace persistlab
