// Command-line front end: simulate, estimate, mc-table, mc-rates, empirical.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sbm/data_io.hpp"
#include "sbm/estimators.hpp"
#include "sbm/mc.hpp"
#include "sbm/simulate.hpp"
#include "sbm/tuning.hpp"
#include "sbm/types.hpp"

using json = nlohmann::json;

namespace {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// temp file + rename so readers never observe a partial file
void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

void write_sidecar(const std::string& out_path, const json& resolved) {
    write_atomic(out_path + ".meta.json", resolved.dump(2) + "\n");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string freq_label(double seconds) {
    if (seconds >= 3600.0 && std::fmod(seconds, 3600.0) == 0.0)
        return std::to_string(static_cast<long>(seconds / 3600.0)) + "h";
    if (seconds >= 60.0 && std::fmod(seconds, 60.0) == 0.0)
        return std::to_string(static_cast<long>(seconds / 60.0)) + "min";
    return std::to_string(static_cast<long>(seconds)) + "s";
}

sbm::IncrementSeries read_increments_csv(const std::string& path, double freq_seconds,
                                         double day_seconds) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    sbm::IncrementSeries series;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        if (row == 1 && line.rfind("index", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("bad increments row " + std::to_string(row));
        series.values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (series.values.empty()) throw std::invalid_argument("no increments in " + path);
    series.noisy = true;
    series.scheme.day_length_seconds = day_seconds;
    series.scheme.n = series.values.size();
    series.scheme.T =
        freq_seconds / day_seconds * static_cast<double>(series.scheme.n);
    return series;
}

json noise_moments_json(const sbm::NoiseMoments& m) {
    return json{{"m2_eps", m.m2_eps},
                {"m4_eps", m.m4_eps},
                {"m4_diff", m.m4_diff},
                {"m8_diff", m.m8_diff},
                {"e_eps", m.e_eps}};
}

json scheme_json(const sbm::SamplingScheme& s) {
    return json{{"n", s.n},
                {"T_days", s.T},
                {"delta_days", s.delta()},
                {"day_length_seconds", s.day_length_seconds}};
}

struct ModelFlags {
    double sigma = 0.02;
    double kappa = 0.3;
    double theta = 0.0;
    double b = 0.0;
    double rho = 0.005;
    std::string clock = "vg";

    sbm::ModelParams model() const {
        sbm::ModelParams p;
        p.sigma = sigma;
        p.kappa = kappa;
        p.theta = theta;
        p.b = b;
        p.clock = sbm::clock_from_string(clock);
        return p;
    }
    sbm::NoiseSpec noise() const { return sbm::NoiseSpec{rho}; }

    void add_options(CLI::App* cmd) {
        cmd->add_option("--sigma", sigma, "volatility per sqrt(day)");
        cmd->add_option("--kappa", kappa, "kurtosis parameter (days)");
        cmd->add_option("--theta", theta, "business-time drift");
        cmd->add_option("--b", b, "calendar-time drift");
        cmd->add_option("--rho", rho, "noise standard deviation");
        cmd->add_option("--model,--clock", clock, "subordinator family: vg or nig");
    }
    json to_json() const {
        return json{{"sigma", sigma}, {"kappa", kappa}, {"theta", theta},
                    {"b", b},         {"rho", rho},     {"clock", clock}};
    }
};

int run_simulate(const ModelFlags& mf, double t_days, const std::string& freq,
                 std::uint64_t seed, double day_seconds, const std::string& out) {
    const double freq_seconds = sbm::parse_frequency_seconds(freq);
    const auto scheme = sbm::SamplingScheme::from_frequency(t_days, freq_seconds, day_seconds);
    const auto series = sbm::simulate_increments(mf.model(), scheme, mf.noise(), seed);
    std::string csv = "index,increment\n";
    csv.reserve(series.values.size() * 28 + 32);
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        csv += std::to_string(i + 1);
        csv += ',';
        csv += format_full(series.values[i]);
        csv += '\n';
    }
    write_atomic(out, csv);
    json meta = {{"subcommand", "simulate"}, {"model", mf.to_json()},
                 {"t_days", t_days},         {"freq", freq},
                 {"freq_seconds", freq_seconds}, {"seed", seed},
                 {"day_length_seconds", day_seconds}, {"n", scheme.n}};
    write_sidecar(out, meta);
    return 0;
}

int run_estimate(const std::string& input, const std::string& estimator, double sigma0,
                 const std::string& freq, double day_seconds, const std::string& out) {
    const double freq_seconds = sbm::parse_frequency_seconds(freq);
    const auto series = read_increments_csv(input, freq_seconds, day_seconds);

    sbm::EstimateReport report;
    report.estimator_id = estimator;
    report.scheme = series.scheme;
    report.noise_moments = sbm::estimate_noise_moments(series);
    if (estimator == "mme-sigma") {
        report.value = std::sqrt(sbm::mme_sigma2(series));
    } else if (estimator == "mme-kappa") {
        report.value = sbm::mme_kappa(series);
    } else if (estimator == "sigma1" || estimator == "sigma2" || estimator == "sigma3") {
        const auto trace = sbm::plugin_sigma(
            series, sigma0, static_cast<sbm::SigmaVariant>(estimator.back() - '0'));
        report.value = trace.final_value();
        report.K_used = trace.final().K;
    } else if (estimator == "kappa1" || estimator == "kappa2" || estimator == "kappa3") {
        const auto trace = sbm::plugin_kappa(
            series, sigma0, static_cast<sbm::KappaVariant>(estimator.back() - '0'));
        report.value = trace.final_value();
        report.K_used = trace.final().K;
        report.sigma_plugin = std::sqrt(trace.final().sigma2);
    } else {
        throw std::invalid_argument("unknown estimator: " + estimator);
    }

    json j = {{"estimator_id", report.estimator_id},
              {"value", report.value},
              {"K_used", report.K_used},
              {"sigma_plugin", report.sigma_plugin},
              {"noise_moments", noise_moments_json(report.noise_moments)},
              {"scheme", scheme_json(report.scheme)},
              {"sigma0", sigma0}};
    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        write_atomic(out, j.dump(2) + "\n");
        write_sidecar(out, j);
    }
    return 0;
}

struct McFlags {
    ModelFlags model;
    double t_days = 252.0;
    std::string freqs = "5min";
    std::size_t reps = 200;
    std::uint64_t seed = 20240612;
    std::string estimators = "sigma1,sigma2,sigma3";
    double sigma0 = 0.063;
    double day_seconds = sbm::kDefaultDaySeconds;
    unsigned threads = 0;

    sbm::MCConfig config() const {
        sbm::MCConfig c;
        c.model = model.model();
        c.noise = model.noise();
        c.T_days = t_days;
        for (const auto& f : split_list(freqs))
            c.frequencies_seconds.push_back(sbm::parse_frequency_seconds(f));
        c.replications = reps;
        c.master_seed = seed;
        c.estimators = split_list(estimators);
        c.sigma0 = sigma0;
        c.day_seconds = day_seconds;
        c.threads = threads;
        return c;
    }
    json to_json() const {
        return json{{"model", model.to_json()},   {"t_days", t_days},
                    {"frequencies", freqs},       {"replications", reps},
                    {"master_seed", seed},        {"estimators", estimators},
                    {"sigma0", sigma0},           {"day_length_seconds", day_seconds},
                    {"threads", threads}};
    }
};

void apply_config_file(McFlags& flags, const std::string& path, const CLI::App* cmd) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j;
    in >> j;
    // file values apply only where no flag was passed: flags win
    const auto absent = [&](const std::string& name) {
        const auto* opt = cmd->get_option_no_throw(name);
        return opt == nullptr || opt->count() == 0;
    };
    if (j.contains("sigma") && absent("--sigma")) flags.model.sigma = j["sigma"];
    if (j.contains("kappa") && absent("--kappa")) flags.model.kappa = j["kappa"];
    if (j.contains("theta") && absent("--theta")) flags.model.theta = j["theta"];
    if (j.contains("b") && absent("--b")) flags.model.b = j["b"];
    if (j.contains("rho") && absent("--rho")) flags.model.rho = j["rho"];
    if (j.contains("clock") && absent("--clock")) flags.model.clock = j["clock"];
    if (j.contains("t_days") && absent("--t-days")) flags.t_days = j["t_days"];
    if (j.contains("frequencies") && absent("--freqs"))
        flags.freqs = j["frequencies"].is_string()
                          ? j["frequencies"].get<std::string>()
                          : [&] {
                                std::string s;
                                for (const auto& f : j["frequencies"])
                                    s += (s.empty() ? "" : ",") + f.get<std::string>();
                                return s;
                            }();
    if (j.contains("replications") && absent("--reps")) flags.reps = j["replications"];
    if (j.contains("master_seed") && absent("--seed")) flags.seed = j["master_seed"];
    if (j.contains("estimators") && absent("--estimators"))
        flags.estimators = j["estimators"].is_string()
                               ? j["estimators"].get<std::string>()
                               : [&] {
                                     std::string s;
                                     for (const auto& e : j["estimators"])
                                         s += (s.empty() ? "" : ",") + e.get<std::string>();
                                     return s;
                                 }();
    if (j.contains("sigma0") && absent("--sigma0")) flags.sigma0 = j["sigma0"];
    if (j.contains("day_length_seconds") && absent("--day-seconds"))
        flags.day_seconds = j["day_length_seconds"];
}

int run_mc_table(const McFlags& flags, const std::string& out) {
    const auto config = flags.config();
    const auto summary = sbm::run_table(config);
    std::string csv = "freq,column,mean,sd,mse,failures,reps\n";
    for (const auto& cell : summary.cells) {
        csv += freq_label(cell.freq_seconds) + "," + cell.column + "," +
               format_full(cell.mean) + "," + format_full(cell.sd) + "," +
               format_full(cell.mse) + "," + std::to_string(cell.failures) + "," +
               std::to_string(cell.reps) + "\n";
    }
    write_atomic(out, csv);
    json meta = flags.to_json();
    meta["subcommand"] = "mc-table";
    write_sidecar(out, meta);
    return 0;
}

int run_mc_rates(const McFlags& flags, const std::string& estimator, const std::string& freq,
                 int months_min, int months_max, const std::string& out,
                 const std::string& points_out) {
    sbm::RateEstimator which;
    if (estimator == "sigma-oracle") which = sbm::RateEstimator::SigmaUnbiasedOracle;
    else if (estimator == "sigma3") which = sbm::RateEstimator::SigmaPlugin3;
    else if (estimator == "kappa-oracle") which = sbm::RateEstimator::KappaUnbiasedOracle;
    else if (estimator == "kappa3") which = sbm::RateEstimator::KappaPlugin3;
    else throw std::invalid_argument("unknown rate estimator: " + estimator);
    if (months_min >= months_max) throw std::invalid_argument("bad month range");

    std::vector<double> T_list;
    for (int m = months_min; m <= months_max; ++m) T_list.push_back(21.0 * m);
    const double freq_seconds = sbm::parse_frequency_seconds(freq);
    const auto result =
        sbm::rate_regression(flags.config(), freq_seconds, T_list, which);

    std::string csv = "freq,estimator,slope,ci_half_width,intercept,r2,points,dropped\n";
    csv += freq + "," + estimator + "," + format_full(result.fit.slope) + "," +
           format_full(result.fit.half_width) + "," + format_full(result.fit.intercept) + "," +
           format_full(result.fit.r2) + "," +
           std::to_string(result.points.size() - result.dropped) + "," +
           std::to_string(result.dropped) + "\n";
    write_atomic(out, csv);
    if (!points_out.empty()) {
        std::string pts = "T_days,log_T,log_var,variance,dropped\n";
        for (const auto& p : result.points)
            pts += format_full(p.T_days) + "," + format_full(p.log_T) + "," +
                   format_full(p.log_var) + "," + format_full(p.variance) + "," +
                   (p.dropped ? "1" : "0") + "\n";
        write_atomic(points_out, pts);
    }
    json meta = flags.to_json();
    meta["subcommand"] = "mc-rates";
    meta["estimator"] = estimator;
    meta["freq"] = freq;
    meta["months"] = {months_min, months_max};
    write_sidecar(out, meta);
    return 0;
}

int run_empirical(const std::string& input, const std::string& freqs, double sigma0,
                  double day_seconds, const std::string& out) {
    const auto ticks = sbm::load_ticks(input, day_seconds);
    std::vector<double> freq_seconds;
    for (const auto& f : split_list(freqs))
        freq_seconds.push_back(sbm::parse_frequency_seconds(f));
    const auto rows = sbm::empirical_report(ticks, freq_seconds, sigma0);
    std::string csv = "freq,n,rho_hat,sigma_naive,sigma_robust,kappa_naive,kappa_robust,flags\n";
    for (const auto& r : rows) {
        std::string flags;
        for (const auto& f : r.flags) flags += (flags.empty() ? "" : ";") + f;
        csv += freq_label(r.freq_seconds) + "," + std::to_string(r.n) + "," +
               format_full(r.rho_hat) + "," + format_full(r.sigma_naive) + "," +
               format_full(r.sigma_robust) + "," + format_full(r.kappa_naive) + "," +
               format_full(r.kappa_robust) + "," + flags + "\n";
    }
    write_atomic(out, csv);
    json meta = {{"subcommand", "empirical"}, {"input", input},     {"frequencies", freqs},
                 {"sigma0", sigma0},          {"day_length_seconds", day_seconds}};
    write_sidecar(out, meta);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Estimation toolkit for noisy subordinated Brownian motion"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate increments onto a CSV file");
    ModelFlags sim_model;
    sim_model.add_options(sim);
    double sim_t_days = 252.0;
    std::string sim_freq = "1min";
    std::uint64_t sim_seed = 1;
    double sim_day_seconds = sbm::kDefaultDaySeconds;
    std::string sim_out;
    sim->add_option("--t-days", sim_t_days, "horizon in trading days");
    sim->add_option("--freq", sim_freq, "grid spacing label, e.g. 5s, 1min");
    sim->add_option("--seed", sim_seed, "rng seed");
    sim->add_option("--day-seconds", sim_day_seconds, "trading-day length in seconds");
    sim->add_option("--out", sim_out, "output CSV path")->required();

    // estimate
    auto* est = app.add_subcommand("estimate", "run an estimator on an increments CSV");
    std::string est_input, est_estimator = "sigma3", est_freq = "1min", est_out;
    double est_sigma0 = 0.063;
    double est_day_seconds = sbm::kDefaultDaySeconds;
    est->add_option("--input", est_input, "increments CSV")->required();
    est->add_option("--estimator", est_estimator,
                    "sigma1|sigma2|sigma3|kappa1|kappa2|kappa3|mme-sigma|mme-kappa");
    est->add_option("--sigma0", est_sigma0, "initial volatility guess");
    est->add_option("--freq", est_freq, "grid spacing of the input series");
    est->add_option("--day-seconds", est_day_seconds, "trading-day length in seconds");
    est->add_option("--out", est_out, "output JSON path (default stdout)");

    // mc-table
    auto* table = app.add_subcommand("mc-table", "Monte Carlo estimator table");
    McFlags table_flags;
    std::string table_config, table_out;
    table_flags.model.add_options(table);
    table->add_option("--config", table_config, "JSON config file");
    table->add_option("--t-days", table_flags.t_days, "horizon in trading days");
    table->add_option("--freqs", table_flags.freqs, "comma-separated frequency labels");
    table->add_option("--reps", table_flags.reps, "replications");
    table->add_option("--seed", table_flags.seed, "master seed");
    table->add_option("--estimators", table_flags.estimators, "comma-separated estimator ids");
    table->add_option("--sigma0", table_flags.sigma0, "initial volatility guess");
    table->add_option("--day-seconds", table_flags.day_seconds, "trading-day length");
    table->add_option("--threads", table_flags.threads, "worker threads (0 = all cores)");
    table->add_option("--out", table_out, "output CSV path")->required();

    // mc-rates
    auto* rates = app.add_subcommand("mc-rates", "variance rate regression over horizons");
    McFlags rates_flags;
    std::string rates_estimator = "sigma-oracle", rates_freq = "1min", rates_out, rates_points;
    int rates_mmin = 2, rates_mmax = 24;
    rates_flags.model.add_options(rates);
    rates->add_option("--estimator", rates_estimator, "sigma-oracle|sigma3|kappa-oracle|kappa3");
    rates->add_option("--freq", rates_freq, "grid spacing label");
    rates->add_option("--t-months-min", rates_mmin, "first horizon in 21-day months");
    rates->add_option("--t-months-max", rates_mmax, "last horizon in 21-day months");
    rates->add_option("--reps", rates_flags.reps, "replications per horizon");
    rates->add_option("--seed", rates_flags.seed, "master seed");
    rates->add_option("--sigma0", rates_flags.sigma0, "initial volatility guess");
    rates->add_option("--day-seconds", rates_flags.day_seconds, "trading-day length");
    rates->add_option("--threads", rates_flags.threads, "worker threads (0 = all cores)");
    rates->add_option("--out", rates_out, "output CSV path")->required();
    rates->add_option("--points-out", rates_points, "CSV for the (log T, log var) cloud");

    // empirical
    auto* emp = app.add_subcommand("empirical", "multi-frequency report from tick data");
    std::string emp_input, emp_freqs = "5min,1min,30s,10s", emp_out;
    double emp_sigma0 = 0.063;
    double emp_day_seconds = sbm::kDefaultDaySeconds;
    emp->add_option("--input", emp_input, "tick CSV: timestamp,price[,date]")->required();
    emp->add_option("--freqs", emp_freqs, "comma-separated frequency labels");
    emp->add_option("--sigma0", emp_sigma0, "initial volatility guess");
    emp->add_option("--day-seconds", emp_day_seconds, "trading-day length");
    emp->add_option("--out", emp_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed())
            return run_simulate(sim_model, sim_t_days, sim_freq, sim_seed, sim_day_seconds,
                                sim_out);
        if (est->parsed())
            return run_estimate(est_input, est_estimator, est_sigma0, est_freq,
                                est_day_seconds, est_out);
        if (table->parsed()) {
            if (!table_config.empty()) apply_config_file(table_flags, table_config, table);
            return run_mc_table(table_flags, table_out);
        }
        if (rates->parsed())
            return run_mc_rates(rates_flags, rates_estimator, rates_freq, rates_mmin,
                                rates_mmax, rates_out, rates_points);
        if (emp->parsed())
            return run_empirical(emp_input, emp_freqs, emp_sigma0, emp_day_seconds, emp_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
