#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbm/estimators.hpp"
#include "sbm/tuning.hpp"
#include "sbm/types.hpp"

namespace sbm {

// One trading session of tick data: event times in seconds from session
// open, strictly increasing after duplicate collapsing, prices > 0.
struct TickSession {
    std::string date;
    std::vector<double> times;
    std::vector<double> prices;
};

struct TickSeries {
    std::vector<TickSession> sessions;
    double day_length_seconds = kDefaultDaySeconds;
};

namespace detail {

// "HH:MM:SS[.frac]" -> seconds of day.
inline bool parse_time_of_day(const std::string& s, double& out) {
    int h = 0, m = 0;
    double sec = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream iss(s);
    if (!(iss >> h >> c1 >> m >> c2 >> sec) || c1 != ':' || c2 != ':') return false;
    out = h * 3600.0 + m * 60.0 + sec;
    return true;
}

// Accepts plain seconds-from-open or ISO-8601 "YYYY-MM-DD[T ]HH:MM:SS".
// ISO rows carry their date; their clock times are later re-anchored so
// each session's first tick sits at t = 0.
struct ParsedStamp {
    double seconds = 0.0;
    std::string date;  // empty for plain numeric stamps
    bool iso = false;
};

inline bool parse_timestamp(const std::string& s, ParsedStamp& out) {
    if (s.size() >= 19 && s[4] == '-' && s[7] == '-' && (s[10] == 'T' || s[10] == ' ')) {
        out.date = s.substr(0, 10);
        out.iso = true;
        return parse_time_of_day(s.substr(11), out.seconds);
    }
    try {
        std::size_t pos = 0;
        out.seconds = std::stod(s, &pos);
        out.iso = false;
        return pos == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace detail

// Loads tick CSV with columns timestamp,price[,date]. Duplicate timestamps
// collapse to the last trade. Bad rows are reported with their row numbers.
inline TickSeries load_ticks(std::istream& input,
                             double day_length_seconds = kDefaultDaySeconds) {
    TickSeries series;
    series.day_length_seconds = day_length_seconds;

    struct RawTick {
        double seconds;
        double price;
        std::string date;
        bool iso;
    };
    std::vector<RawTick> ticks;
    std::vector<std::size_t> bad_rows;
    std::string line;
    std::size_t row = 0;
    bool first_data_row = true;
    while (std::getline(input, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = detail::split_csv_row(line);
        if (fields.size() < 2) {
            bad_rows.push_back(row);
            continue;
        }
        detail::ParsedStamp stamp;
        if (!detail::parse_timestamp(fields[0], stamp)) {
            if (first_data_row) {  // header row
                first_data_row = false;
                continue;
            }
            bad_rows.push_back(row);
            continue;
        }
        first_data_row = false;
        double price = 0.0;
        try {
            price = std::stod(fields[1]);
        } catch (const std::exception&) {
            bad_rows.push_back(row);
            continue;
        }
        if (!(price > 0.0))
            throw std::invalid_argument("load_ticks: non-positive price at row " +
                                        std::to_string(row));
        std::string date = stamp.date;
        if (fields.size() >= 3 && !fields[2].empty()) date = fields[2];
        ticks.push_back({stamp.seconds, price, date, stamp.iso});
    }
    if (!bad_rows.empty()) {
        std::string msg = "load_ticks: unparseable rows:";
        for (auto r : bad_rows) msg += " " + std::to_string(r);
        throw std::invalid_argument(msg);
    }

    // group into sessions preserving file order
    std::vector<char> session_iso;
    for (const auto& t : ticks) {
        if (series.sessions.empty() || series.sessions.back().date != t.date) {
            series.sessions.push_back({t.date, {}, {}});
            session_iso.push_back(t.iso);
        }
        auto& s = series.sessions.back();
        if (!s.times.empty() && t.seconds == s.times.back()) {
            s.prices.back() = t.price;  // duplicate timestamp: last trade wins
            continue;
        }
        s.times.push_back(t.seconds);
        s.prices.push_back(t.price);
    }
    for (std::size_t si = 0; si < series.sessions.size(); ++si) {
        auto& s = series.sessions[si];
        // ISO clock times are re-anchored so the first tick sits at t = 0
        if (session_iso[si] && !s.times.empty()) {
            const double open = s.times.front();
            for (auto& t : s.times) t -= open;
        }
        for (std::size_t i = 1; i < s.times.size(); ++i)
            if (!(s.times[i] > s.times[i - 1]))
                throw std::invalid_argument("load_ticks: non-monotone timestamps in session " +
                                            (s.date.empty() ? std::string("<default>") : s.date));
    }
    return series;
}

inline TickSeries load_ticks(const std::string& path,
                             double day_length_seconds = kDefaultDaySeconds) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("load_ticks: cannot open " + path);
    return load_ticks(file, day_length_seconds);
}

struct ResampleResult {
    IncrementSeries series;
    std::size_t dropped_leading = 0;  // grid points before the first tick
};

// Previous-tick interpolation onto the regular grid t_i = i * delta
// anchored at session open. Increments never span session boundaries.
inline ResampleResult resample_calendar_detailed(const TickSeries& ticks,
                                                 double delta_seconds) {
    if (!(delta_seconds > 0.0))
        throw std::invalid_argument("resample_calendar: delta must be > 0");
    ResampleResult result;
    auto& series = result.series;
    for (const auto& s : ticks.sessions) {
        if (s.times.size() < 2 || s.times.back() - s.times.front() < 2.0 * delta_seconds)
            throw std::invalid_argument("resample_calendar: session too short for delta");
        const std::size_t grid_points =
            static_cast<std::size_t>(std::floor(s.times.back() / delta_seconds)) + 1;
        std::size_t tick = 0;
        double prev_log = 0.0;
        bool have_prev = false;
        for (std::size_t i = 0; i < grid_points; ++i) {
            const double t = static_cast<double>(i) * delta_seconds;
            while (tick + 1 < s.times.size() && s.times[tick + 1] <= t) ++tick;
            if (s.times[tick] > t) {  // no tick at or before this grid point
                ++result.dropped_leading;
                continue;
            }
            const double cur_log = std::log(s.prices[tick]);
            if (have_prev) series.values.push_back(cur_log - prev_log);
            prev_log = cur_log;
            have_prev = true;
        }
    }
    if (series.values.empty())
        throw std::invalid_argument("resample_calendar: no increments produced");
    series.noisy = true;
    series.scheme.day_length_seconds = ticks.day_length_seconds;
    series.scheme.n = series.values.size();
    const double delta_days = delta_seconds / ticks.day_length_seconds;
    series.scheme.T = delta_days * static_cast<double>(series.scheme.n);
    return result;
}

inline IncrementSeries resample_calendar(const TickSeries& ticks, double delta_seconds) {
    return resample_calendar_detailed(ticks, delta_seconds).series;
}

// One row of the multi-frequency empirical report.
struct EmpiricalRow {
    double freq_seconds = 0.0;
    std::size_t n = 0;
    double rho_hat = 0.0;
    double sigma_naive = 0.0;   // sqrt of the K=1 estimator
    double sigma_robust = 0.0;  // unbiased two-scale estimator, data-driven K
    double kappa_naive = 0.0;   // K=1 with the naive sigma plug-in
    double kappa_robust = 0.0;  // unbiased two-scale estimator at K*_4
    std::vector<std::string> flags;
};

inline std::vector<EmpiricalRow> empirical_report(const TickSeries& ticks,
                                                  const std::vector<double>& freq_seconds,
                                                  double sigma0) {
    std::vector<EmpiricalRow> rows;
    for (double freq : freq_seconds) {
        EmpiricalRow row;
        row.freq_seconds = freq;
        try {
            const auto series = resample_calendar(ticks, freq);
            row.n = series.values.size();
            const auto moments = estimate_noise_moments(series);
            row.rho_hat = std::sqrt(moments.m2_eps);
            const double naive_s2 = mme_sigma2(series);
            row.sigma_naive = std::sqrt(naive_s2);
            try {
                row.kappa_naive = ts_kappa(series, 1, naive_s2);
            } catch (const std::exception& e) {
                row.flags.push_back(std::string("kappa_naive: ") + e.what());
            }
            const auto trace = plugin_sigma(series, sigma0, SigmaVariant::Unbiased);
            const double robust_s2 = trace.final().sigma2;
            row.sigma_robust = trace.final_value();
            try {
                TheoryInputs in;
                in.n = series.values.size();
                in.T = series.scheme.T;
                in.sigma2 = robust_s2;
                in.m2_eps = moments.m2_eps;
                in.m4_eps = moments.m4_eps;
                in.m4_diff = moments.m4_diff;
                in.e_eps = moments.e_eps;
                row.kappa_robust = ts_kappa_unbiased(series, k_star_4(in), robust_s2);
            } catch (const std::exception& e) {
                row.flags.push_back(std::string("kappa_robust: ") + e.what());
            }
        } catch (const std::exception& e) {
            row.flags.push_back(e.what());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace sbm
