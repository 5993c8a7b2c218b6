#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dlmpsim {

enum class SeriesKind { lmp, demand };

/// Uniformly spaced series. Timestamps are UTC seconds since the epoch.
struct TimeSeries {
    SeriesKind kind = SeriesKind::lmp;
    std::vector<int64_t> timestamps;
    std::vector<double> values;
    int64_t native_interval_s = 0;
    // Indices that were filled by interpolation during ingestion.
    std::vector<size_t> interpolated_at;

    size_t size() const { return values.size(); }
};

int64_t parse_iso8601_utc(const std::string& text);
std::string format_iso8601_utc(int64_t epoch_s);

/// Reads a {timestamp,value} CSV. Gaps of at most two consecutive missing
/// points are linearly interpolated and flagged; longer gaps are rejected.
TimeSeries load_series(const std::string& path, SeriesKind kind);
TimeSeries parse_series_csv(const std::string& text, SeriesKind kind);

/// alpha(t) = demand(t) / max_t demand(t), in (0,1].
TimeSeries demand_ratio(const TimeSeries& demand);

/// Downsampling takes the mean over each window; upsampling holds the
/// source value over the finer steps. Intervals must be commensurate.
TimeSeries resample(const TimeSeries& series, int64_t target_interval_s);

void write_series_csv(const TimeSeries& series, const std::string& path);

/// Deterministic 24-hour summer-weekday shapes at 5-minute resolution:
/// single evening peak at 17:00 and a configurable mean price level.
TimeSeries synthetic_day_lmp(double mean_per_kwh = 0.0267);
TimeSeries synthetic_day_demand();

}  // namespace dlmpsim
