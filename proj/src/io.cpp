#include "censmax/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "censmax/error.hpp"
#include "censmax/log.hpp"

namespace censmax {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

int parse_digits(std::string_view s, std::size_t pos, std::size_t len) {
    if (pos + len > s.size()) throw DataError("bad timestamp");
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') throw DataError("bad timestamp");
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

[[noreturn]] void row_error(std::size_t line, const std::string& what) {
    std::ostringstream os;
    os << "line " << line << ": " << what;
    throw DataError(os.str());
}

}  // namespace

double parse_time(std::string_view text) {
    text = trim(text);
    if (auto v = parse_number(text)) {
        if (!std::isfinite(*v)) throw DataError("non-finite time");
        return *v;
    }
    using namespace std::chrono;
    try {
        if (text.size() < 10 || text[4] != '-' || text[7] != '-') throw DataError("bad timestamp");
        const int y = parse_digits(text, 0, 4);
        const int mo = parse_digits(text, 5, 2);
        const int d = parse_digits(text, 8, 2);
        const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
        if (!ymd.ok()) throw DataError("bad timestamp");
        double secs = 0.0;
        std::size_t pos = 10;
        if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
            const int hh = parse_digits(text, pos + 1, 2);
            if (pos + 3 >= text.size() || text[pos + 3] != ':') throw DataError("bad timestamp");
            const int mm = parse_digits(text, pos + 4, 2);
            if (hh > 23 || mm > 59) throw DataError("bad timestamp");
            secs = hh * 3600.0 + mm * 60.0;
            pos += 6;
            if (pos < text.size() && text[pos] == ':') {
                std::size_t end = pos + 1;
                while (end < text.size() && (std::isdigit(static_cast<unsigned char>(text[end])) || text[end] == '.')) ++end;
                const auto s = parse_number(text.substr(pos + 1, end - pos - 1));
                if (!s || *s < 0.0 || *s >= 61.0) throw DataError("bad timestamp");
                secs += *s;
                pos = end;
            }
        }
        if (pos < text.size()) {
            const std::string_view tz = text.substr(pos);
            if (tz == "Z") {
                // UTC
            } else if ((tz[0] == '+' || tz[0] == '-') && tz.size() == 6 && tz[3] == ':') {
                const int oh = parse_digits(tz, 1, 2), om = parse_digits(tz, 4, 2);
                const double offset = oh * 3600.0 + om * 60.0;
                secs -= (tz[0] == '+' ? offset : -offset);
            } else {
                throw DataError("bad timestamp");
            }
        }
        return static_cast<double>(sys_days{ymd}.time_since_epoch().count()) + secs / 86400.0;
    } catch (const DataError&) {
        throw DataError("unparseable timestamp '" + std::string(text) + "'");
    }
}

std::string format_iso_time(double days) {
    using namespace std::chrono;
    const double whole = std::floor(days);
    const sys_days d{std::chrono::days{static_cast<long>(whole)}};
    const year_month_day ymd{d};
    double secs = (days - whole) * 86400.0;
    long isecs = std::lround(secs);
    if (isecs >= 86400) isecs = 86399;
    std::ostringstream os;
    os << std::setfill('0') << std::setw(4) << static_cast<int>(ymd.year()) << '-' << std::setw(2)
       << static_cast<unsigned>(ymd.month()) << '-' << std::setw(2) << static_cast<unsigned>(ymd.day()) << 'T'
       << std::setw(2) << isecs / 3600 << ':' << std::setw(2) << (isecs / 60) % 60 << ':' << std::setw(2)
       << isecs % 60 << 'Z';
    return os.str();
}

ReadResult read_timeseries(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    int col_time = -1, col_value = -1, col_lat = -1, col_lon = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cols = split_csv(line);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (cols[i] == "time") col_time = static_cast<int>(i);
            else if (cols[i] == "value") col_value = static_cast<int>(i);
            else if (cols[i] == "lat") col_lat = static_cast<int>(i);
            else if (cols[i] == "lon") col_lon = static_cast<int>(i);
        }
        break;
    }
    if (col_time < 0 || col_value < 0) throw DataError("CSV header must contain 'time' and 'value' columns");
    if ((col_lat < 0) != (col_lon < 0)) throw DataError("CSV header must contain both 'lat' and 'lon' or neither");

    const std::size_t width = static_cast<std::size_t>(std::max({col_time, col_value, col_lat, col_lon})) + 1;
    ReadResult res;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cols = split_csv(line);
        if (cols.size() < width) row_error(lineno, "expected at least " + std::to_string(width) + " columns");
        RawRecord r;
        r.line = lineno;
        try {
            r.time = parse_time(cols[static_cast<std::size_t>(col_time)]);
        } catch (const DataError& e) {
            row_error(lineno, e.what());
        }
        const auto v = parse_number(cols[static_cast<std::size_t>(col_value)]);
        if (!v || !std::isfinite(*v)) {
            row_error(lineno, "non-numeric value '" + std::string(cols[static_cast<std::size_t>(col_value)]) + "'");
        }
        r.value = *v;
        if (col_lat >= 0) {
            const auto la = parse_number(cols[static_cast<std::size_t>(col_lat)]);
            const auto lo = parse_number(cols[static_cast<std::size_t>(col_lon)]);
            if (!la || !lo) row_error(lineno, "non-numeric lat/lon");
            double lon = *lo;
            if (lon >= 180.0 && lon < 360.0) lon -= 360.0;
            if (*la < -90.0 || *la > 90.0 || lon < -180.0 || lon >= 180.0) row_error(lineno, "lat/lon out of range");
            r.lat = *la;
            r.lon = lon;
        }
        res.records.push_back(r);
    }
    for (std::size_t i = 1; i < res.records.size(); ++i) {
        if (res.records[i].time < res.records[i - 1].time) res.was_sorted = false;
    }
    if (!res.was_sorted) {
        std::stable_sort(res.records.begin(), res.records.end(),
                         [](const RawRecord& a, const RawRecord& b) { return a.time < b.time; });
        warn("input rows were not in time order; sorted");
    }
    for (std::size_t i = 1; i < res.records.size(); ++i) {
        if (res.records[i].time == res.records[i - 1].time) ++res.n_duplicate_times;
    }
    if (res.n_duplicate_times > 0) {
        warn(std::to_string(res.n_duplicate_times) + " record(s) share a time stamp with an earlier record");
    }
    return res;
}

ReadResult read_timeseries(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open '" + path + "'");
    return read_timeseries(f);
}

TimeSeries to_series(const std::vector<RawRecord>& records) {
    TimeSeries ts;
    for (const RawRecord& r : records) {
        ts.times.push_back(r.time);
        ts.values.push_back(r.value);
    }
    return ts;
}

TimeSeries monthly_blocks(const std::vector<RawRecord>& records, int month) {
    if (month < 1 || month > 12) throw ConfigError("month must lie in 1..12");
    using namespace std::chrono;
    // Keyed by year so blocks come out in calendar order.
    std::map<int, std::vector<std::pair<double, double>>> blocks;
    for (const RawRecord& r : records) {
        const sys_days d{std::chrono::days{static_cast<long>(std::floor(r.time))}};
        const year_month_day ymd{d};
        if (static_cast<unsigned>(ymd.month()) != static_cast<unsigned>(month)) continue;
        const sys_days start{ymd.year() / ymd.month() / 1};
        blocks[static_cast<int>(ymd.year())].emplace_back(r.time - static_cast<double>(start.time_since_epoch().count()),
                                                          r.value);
    }
    if (blocks.empty()) {
        warn("no records fall in month " + std::to_string(month));
    }
    TimeSeries ts;
    for (auto& [y, rows] : blocks) {
        for (auto [t, v] : rows) {
            ts.times.push_back(t);
            ts.values.push_back(v);
            ts.block_ids.push_back(y);
        }
    }
    return ts;
}

void WindowSpec::validate() const {
    if (!(half_width > 0.0)) throw ConfigError("window half width must be positive");
    if (!(track_gap_minutes > 0.0)) throw ConfigError("track gap must be positive");
    if (lat < -90.0 || lat > 90.0) throw ConfigError("window centre latitude out of range");
}

double great_circle_km(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kEarthRadiusKm = 6371.0;
    const double r = std::numbers::pi / 180.0;
    const double dlat = (lat2 - lat1) * r, dlon = (lon2 - lon1) * r;
    const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(lat1 * r) * std::cos(lat2 * r) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::vector<RawRecord> window_extract(const std::vector<RawRecord>& records, const WindowSpec& w) {
    w.validate();
    auto lon_diff = [](double a, double b) {
        double d = std::fmod(a - b + 540.0, 360.0) - 180.0;
        return std::fabs(d);
    };
    const double gap_days = w.track_gap_minutes / 1440.0;
    std::vector<RawRecord> out;
    std::optional<RawRecord> best;
    double best_dist = 0.0, last_time = 0.0;
    bool have_last = false;
    for (const RawRecord& r : records) {
        if (!r.lat || !r.lon) throw DataError("window extraction needs lat/lon columns");
        if (std::fabs(*r.lat - w.lat) > w.half_width || lon_diff(*r.lon, w.lon) > w.half_width) continue;
        if (have_last && r.time - last_time > gap_days && best) {
            out.push_back(*best);
            best.reset();
        }
        const double d = great_circle_km(*r.lat, *r.lon, w.lat, w.lon);
        if (!best || d < best_dist) {
            best = r;
            best_dist = d;
        }
        last_time = r.time;
        have_last = true;
    }
    if (best) out.push_back(*best);
    if (out.empty()) warn("no track intersects the window");
    return out;
}

void write_series_csv(std::ostream& out, const TimeSeries& series) {
    const auto old = out.precision(17);
    out << "time,value\n";
    for (std::size_t i = 0; i < series.size(); ++i) out << series.times[i] << ',' << series.values[i] << '\n';
    out.precision(old);
}

}  // namespace censmax
