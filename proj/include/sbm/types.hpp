#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbm {

// Trading-day convention: 6.5 hours.
inline constexpr double kDefaultDaySeconds = 23400.0;

enum class ClockFamily { Gamma, InverseGaussian };

inline std::string to_string(ClockFamily c) {
    return c == ClockFamily::Gamma ? "gamma" : "inverse_gaussian";
}

inline ClockFamily clock_from_string(const std::string& s) {
    if (s == "gamma" || s == "vg") return ClockFamily::Gamma;
    if (s == "inverse_gaussian" || s == "ig" || s == "nig") return ClockFamily::InverseGaussian;
    throw std::invalid_argument("unknown clock family: " + s);
}

// Model parameters of the subordinated Brownian motion
//   X_t = sigma * W(tau_t) + theta * tau_t + b * t,
// with E tau_t = t and Var(tau_t) = kappa * t.
struct ModelParams {
    double sigma = 0.02;   // volatility, per sqrt(day)
    double kappa = 0.3;    // kurtosis parameter, days
    double theta = 0.0;    // business-time drift
    double b = 0.0;        // calendar-time drift
    ClockFamily clock = ClockFamily::Gamma;

    void validate() const {
        if (!(sigma >= 0.0) || !std::isfinite(sigma))
            throw std::invalid_argument("sigma must be finite and >= 0");
        if (!(kappa > 0.0) || !std::isfinite(kappa))
            throw std::invalid_argument("kappa must be finite and > 0");
        if (!std::isfinite(theta) || !std::isfinite(b))
            throw std::invalid_argument("drift parameters must be finite");
    }
};

// Regular calendar-time grid t_i = i * delta, delta = T / n, T in days.
struct SamplingScheme {
    std::size_t n = 0;
    double T = 0.0;
    double day_length_seconds = kDefaultDaySeconds;

    double delta() const { return T / static_cast<double>(n); }

    void validate() const {
        if (n < 1) throw std::invalid_argument("scheme requires n >= 1");
        if (!(T > 0.0) || !std::isfinite(T))
            throw std::invalid_argument("scheme requires finite T > 0");
        if (!(day_length_seconds > 0.0))
            throw std::invalid_argument("day_length_seconds must be > 0");
    }

    // Grid with spacing `freq_seconds` over `T_days` trading days.
    static SamplingScheme from_frequency(double T_days, double freq_seconds,
                                         double day_seconds = kDefaultDaySeconds) {
        if (!(freq_seconds > 0.0)) throw std::invalid_argument("frequency must be > 0");
        SamplingScheme s;
        s.day_length_seconds = day_seconds;
        s.T = T_days;
        s.n = static_cast<std::size_t>(std::llround(T_days * day_seconds / freq_seconds));
        s.validate();
        return s;
    }
};

// Additive white Gaussian observation noise with standard deviation rho.
struct NoiseSpec {
    double rho = 0.0;

    void validate() const {
        if (!(rho >= 0.0) || !std::isfinite(rho))
            throw std::invalid_argument("rho must be finite and >= 0");
    }
};

// Ordered increments of the (possibly noisy) log-price path.
struct IncrementSeries {
    std::vector<double> values;
    SamplingScheme scheme;
    bool noisy = false;
};

// Parses labels like "5s", "30sec", "1min", "10min", "1h" into seconds.
inline double parse_frequency_seconds(const std::string& label) {
    std::size_t pos = 0;
    while (pos < label.size() &&
           (std::isdigit(static_cast<unsigned char>(label[pos])) || label[pos] == '.'))
        ++pos;
    if (pos == 0) throw std::invalid_argument("bad frequency label: " + label);
    const double value = std::stod(label.substr(0, pos));
    std::string unit = label.substr(pos);
    if (unit == "s" || unit == "sec" || unit == "secs") return value;
    if (unit == "m" || unit == "min" || unit == "mins") return value * 60.0;
    if (unit == "h" || unit == "hr" || unit == "hour") return value * 3600.0;
    throw std::invalid_argument("bad frequency unit in: " + label);
}

}  // namespace sbm
