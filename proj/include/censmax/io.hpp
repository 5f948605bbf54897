#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "censmax/time_series.hpp"

namespace censmax {

// One CSV row. `time` is in days since 1970-01-01T00:00:00Z.
struct RawRecord {
    double time = 0.0;
    double value = 0.0;
    std::optional<double> lat;
    std::optional<double> lon;
    std::size_t line = 0;  // 1-based source line
};

// Parses an ISO-8601 UTC timestamp (YYYY-MM-DD[THH:MM[:SS[.fff]]][Z|+HH:MM])
// or a plain number of days. Throws DataError.
double parse_time(std::string_view text);
std::string format_iso_time(double days);

struct ReadResult {
    std::vector<RawRecord> records;  // sorted by time (stable)
    std::size_t n_duplicate_times = 0;
    bool was_sorted = true;
};

// CSV with header `time,value[,lat,lon]`. Malformed rows raise DataError
// naming the line; unsorted input is sorted with a notice.
ReadResult read_timeseries(std::istream& in);
ReadResult read_timeseries(const std::string& path);

TimeSeries to_series(const std::vector<RawRecord>& records);

// One block per occurrence of `month` (1-12); times are days since the first
// of that month and block ids are calendar years.
TimeSeries monthly_blocks(const std::vector<RawRecord>& records, int month);

struct WindowSpec {
    double lat = 0.0;
    double lon = 0.0;
    double half_width = 1.5;          // degrees; 1.5 gives a 3 x 3 degree box
    double track_gap_minutes = 30.0;  // a longer silence starts a new track

    void validate() const;
};

double great_circle_km(double lat1, double lon1, double lat2, double lon2);

// For every track segment crossing the box, the single record nearest to the
// centre (first in time on ties), in time order.
std::vector<RawRecord> window_extract(const std::vector<RawRecord>& records, const WindowSpec& w);

// `time,value` rows with 17 significant digits; times as day numbers.
void write_series_csv(std::ostream& out, const TimeSeries& series);

}  // namespace censmax
