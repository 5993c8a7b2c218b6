#include "dlmpsim/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dlmpsim/errors.hpp"

namespace dlmpsim {

namespace {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t yy = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    size_t b = s.find_last_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

}  // namespace

int64_t parse_iso8601_utc(const std::string& text) {
    int y, mo, d, h, mi, s;
    char sep;
    int consumed = 0;
    int got = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d%n", &y, &mo, &d, &sep, &h, &mi, &s,
                          &consumed);
    if (got != 7 || (sep != 'T' && sep != ' '))
        throw ParseError("bad ISO-8601 timestamp: " + text);
    std::string rest = trim(text.substr(consumed));
    if (!rest.empty() && rest != "Z")
        throw ParseError("unsupported timestamp suffix in: " + text);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 ||
        s > 60)
        throw ParseError("timestamp field out of range: " + text);
    return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
           h * 3600 + mi * 60 + s;
}

std::string format_iso8601_utc(int64_t epoch_s) {
    int64_t days = epoch_s / 86400;
    int64_t rem = epoch_s % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, mo, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem % 3600) / 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

TimeSeries parse_series_csv(const std::string& text, SeriesKind kind) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty series file");
    {
        std::string header = trim(line);
        if (header != "timestamp,value")
            throw ParseError("series CSV must start with 'timestamp,value', got: " + header);
    }

    std::vector<int64_t> ts;
    std::vector<double> vals;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string row = trim(line);
        if (row.empty()) continue;
        size_t comma = row.find(',');
        if (comma == std::string::npos)
            throw ParseError("series CSV line " + std::to_string(lineno) + " has no comma");
        int64_t t = parse_iso8601_utc(trim(row.substr(0, comma)));
        std::string vtext = trim(row.substr(comma + 1));
        size_t pos = 0;
        double v;
        try {
            v = std::stod(vtext, &pos);
        } catch (const std::exception&) {
            throw ParseError("bad value on series CSV line " + std::to_string(lineno));
        }
        if (pos != vtext.size())
            throw ParseError("trailing junk in value on series CSV line " + std::to_string(lineno));
        if (!std::isfinite(v))
            throw ParseError("non-finite value on series CSV line " + std::to_string(lineno));
        ts.push_back(t);
        vals.push_back(v);
    }
    if (ts.size() < 2) throw ParseError("series needs at least two rows");

    for (size_t i = 1; i < ts.size(); ++i)
        if (ts[i] <= ts[i - 1])
            throw ParseError("timestamps must be strictly increasing (row " + std::to_string(i + 1) +
                             ")");

    // The native interval is the smallest observed spacing; larger spacings
    // must be whole multiples of it (missing rows).
    int64_t step = ts[1] - ts[0];
    for (size_t i = 1; i < ts.size(); ++i) step = std::min(step, ts[i] - ts[i - 1]);
    if (step <= 0) throw ParseError("degenerate timestamp spacing");

    TimeSeries out;
    out.kind = kind;
    out.native_interval_s = step;
    for (size_t i = 0; i < ts.size(); ++i) {
        if (i > 0) {
            int64_t gap = ts[i] - ts[i - 1];
            if (gap % step != 0)
                throw ParseError("timestamp spacing is not a multiple of the native interval at " +
                                 format_iso8601_utc(ts[i]));
            int64_t missing = gap / step - 1;
            if (missing > 2)
                throw ParseError("gap of " + std::to_string(missing) +
                                 " consecutive points before " + format_iso8601_utc(ts[i]) +
                                 " exceeds the 2-point interpolation limit");
            for (int64_t k = 1; k <= missing; ++k) {
                double f = static_cast<double>(k) / static_cast<double>(missing + 1);
                out.interpolated_at.push_back(out.values.size());
                out.timestamps.push_back(ts[i - 1] + k * step);
                out.values.push_back(vals[i - 1] + f * (vals[i] - vals[i - 1]));
            }
        }
        out.timestamps.push_back(ts[i]);
        out.values.push_back(vals[i]);
    }
    return out;
}

TimeSeries load_series(const std::string& path, SeriesKind kind) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open series file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_series_csv(ss.str(), kind);
}

TimeSeries demand_ratio(const TimeSeries& demand) {
    if (demand.values.empty()) throw ParseError("empty demand series");
    double peak = 0.0;
    for (double v : demand.values) {
        if (v <= 0.0) throw ParseError("demand_ratio requires strictly positive demand");
        peak = std::max(peak, v);
    }
    TimeSeries out = demand;
    out.kind = SeriesKind::demand;
    out.interpolated_at.clear();
    for (double& v : out.values) v /= peak;
    return out;
}

TimeSeries resample(const TimeSeries& series, int64_t target_interval_s) {
    if (target_interval_s <= 0) throw ParseError("target interval must be positive");
    const int64_t native = series.native_interval_s;
    if (native <= 0) throw ParseError("series has no native interval");
    if (target_interval_s == native) return series;

    TimeSeries out;
    out.kind = series.kind;
    out.native_interval_s = target_interval_s;

    if (target_interval_s % native == 0) {
        // Downsample: mean over each whole window.
        int64_t k = target_interval_s / native;
        size_t n = series.size();
        if (n % static_cast<size_t>(k) != 0)
            throw ParseError("series length not divisible by downsampling factor");
        for (size_t i = 0; i < n; i += k) {
            bool constant = true;
            for (size_t j = 1; j < static_cast<size_t>(k); ++j)
                if (series.values[i + j] != series.values[i]) constant = false;
            double v;
            if (constant) {
                v = series.values[i];
            } else {
                double acc = 0.0;
                for (size_t j = 0; j < static_cast<size_t>(k); ++j) acc += series.values[i + j];
                v = acc / static_cast<double>(k);
            }
            out.timestamps.push_back(series.timestamps[i]);
            out.values.push_back(v);
        }
        return out;
    }
    if (native % target_interval_s == 0) {
        // Upsample: zero-order hold within each source step.
        int64_t k = native / target_interval_s;
        for (size_t i = 0; i < series.size(); ++i) {
            for (int64_t j = 0; j < k; ++j) {
                out.timestamps.push_back(series.timestamps[i] + j * target_interval_s);
                out.values.push_back(series.values[i]);
            }
        }
        return out;
    }
    throw ParseError("target interval " + std::to_string(target_interval_s) +
                     "s is incommensurate with native " + std::to_string(native) + "s");
}

void write_series_csv(const TimeSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write series file: " + path);
    out << "timestamp,value\n";
    char buf[64];
    for (size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.10g", series.values[i]);
        out << format_iso8601_utc(series.timestamps[i]) << "," << buf << "\n";
    }
}

namespace {

const int64_t kDayStart = parse_iso8601_utc("2020-08-25T00:00:00Z");

double bump(double h, double center, double width) {
    double z = (h - center) / width;
    return std::exp(-z * z);
}

}  // namespace

TimeSeries synthetic_day_demand() {
    TimeSeries out;
    out.kind = SeriesKind::demand;
    out.native_interval_s = 300;
    for (int i = 0; i < 288; ++i) {
        double h = i * 300.0 / 3600.0;
        // Overnight trough, morning shoulder, single evening peak at 17:00.
        double shape = 0.52 + 0.42 * bump(h, 17.0, 3.4) + 0.16 * bump(h, 9.0, 2.8) -
                       0.07 * bump(h, 3.5, 2.4);
        out.timestamps.push_back(kDayStart + i * 300);
        out.values.push_back(2600.0 * shape);  // MW-scale carrier, alpha normalizes it away
    }
    return out;
}

TimeSeries synthetic_day_lmp(double mean_per_kwh) {
    TimeSeries out;
    out.kind = SeriesKind::lmp;
    out.native_interval_s = 300;
    std::vector<double> raw(288);
    double acc = 0.0;
    for (int i = 0; i < 288; ++i) {
        double h = i * 300.0 / 3600.0;
        double v = 0.0165 + 0.0310 * bump(h, 17.0, 2.4) + 0.0052 * bump(h, 9.5, 3.2) -
                   0.0016 * bump(h, 3.0, 2.6);
        raw[i] = v;
        acc += v;
    }
    double scale = mean_per_kwh / (acc / 288.0);
    for (int i = 0; i < 288; ++i) {
        out.timestamps.push_back(kDayStart + i * 300);
        out.values.push_back(raw[i] * scale);
    }
    return out;
}

}  // namespace dlmpsim
