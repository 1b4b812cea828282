#include "ustatgof/mc.hpp"

#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "ustatgof/errors.hpp"
#include "ustatgof/specfun.hpp"

namespace ustatgof::mc {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* estimator_name(est::Method m) { return m == est::Method::ML ? "ml" : "mom"; }

int worker_count(const MCConfig& config, long reps) {
    int t = config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency());
    if (t < 1) t = 1;
    return static_cast<int>(std::min<long>(t, reps));
}

}  // namespace

void MCConfig::validate() const {
    if (!(lambda > 1.0)) throw std::domain_error("MCConfig: lambda must be > 1");
    if (n < 2) throw std::domain_error("MCConfig: n must be >= 2");
    if (reps < 1) throw std::domain_error("MCConfig: reps must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("MCConfig: alpha must lie in (0, 1)");
    if (!(sigma0 > 0.0)) throw std::domain_error("MCConfig: sigma0 must be positive");
    if (mode == Mode::POWER && delta_grid.empty())
        throw std::domain_error("MCConfig: POWER mode needs a nonempty delta grid");
}

apd::ParamVector drifted_theta(const MCConfig& config, double delta1, double delta2) {
    const double root_n = std::sqrt(static_cast<double>(config.n));
    apd::ParamVector theta{0.5 + delta1 / root_n, config.lambda + delta2 / root_n,
                           config.mu0 + config.delta3 / root_n,
                           config.sigma0 * (1.0 + config.delta4 / root_n), config.lambda};
    theta.validate();
    return theta;
}

std::vector<epd::Computation> run_replications(const MCConfig& config, const apd::ParamVector& draw_from,
                                               uint64_t point_index) {
    config.validate();
    const apd::Sampler sampler(draw_from);
    const epd::EPDTestConfig test{config.lambda, config.estimator, config.alpha};
    const long reps = config.reps;

    std::vector<epd::Computation> results(static_cast<size_t>(reps));
    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::string error_msg;
    std::mutex error_mu;

    auto work = [&] {
        std::vector<double> sample(static_cast<size_t>(config.n));
        for (;;) {
            const long r = next.fetch_add(1);
            if (r >= reps || failed.load(std::memory_order_relaxed)) break;
            try {
                RngStream rng(config.seed, point_index, static_cast<uint64_t>(r));
                sampler.fill(rng, sample);
                results[static_cast<size_t>(r)] = epd::compute(sample, test);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!failed.exchange(true))
                    error_msg = "replication failed (seed=" + std::to_string(config.seed) +
                                ", point=" + std::to_string(point_index) + ", rep=" + std::to_string(r) +
                                "): " + e.what();
            }
        }
    };

    const int nw = worker_count(config, reps);
    if (nw <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(nw));
        for (int t = 0; t < nw; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw NonConvergence(error_msg);
    return results;
}

namespace {

MCReport report_from(const MCConfig& config, const std::vector<epd::Computation>& reps_out,
                     double delta1, double delta2, double predicted) {
    const double crit = specfun::chi2_quantile(1.0 - config.alpha, 2);
    long rejections = 0;
    for (const auto& c : reps_out)
        if (c.statistic > crit) ++rejections;
    const double rate = static_cast<double>(rejections) / static_cast<double>(reps_out.size());
    MCReport rep;
    rep.delta1 = delta1;
    rep.delta2 = delta2;
    rep.rejection_rate = rate;
    rep.mc_stderr = std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps_out.size()));
    rep.predicted_power = predicted;
    rep.reps = static_cast<long>(reps_out.size());
    rep.config = config;
    return rep;
}

}  // namespace

MCReport run_size_experiment(const MCConfig& config) {
    if (config.mode != Mode::SIZE) throw std::invalid_argument("run_size_experiment: mode must be SIZE");
    config.validate();
    const apd::ParamVector theta0 = apd::ParamVector::epd_null(config.lambda, config.mu0, config.sigma0);
    const auto reps_out = run_replications(config, theta0, 0);
    return report_from(config, reps_out, 0.0, 0.0, config.alpha);
}

std::vector<MCReport> run_power_experiment(const MCConfig& config) {
    if (config.mode != Mode::POWER) throw std::invalid_argument("run_power_experiment: mode must be POWER");
    config.validate();
    const epd::EPDTestConfig test{config.lambda, config.estimator, config.alpha};
    std::vector<MCReport> out;
    out.reserve(config.delta_grid.size());
    for (size_t g = 0; g < config.delta_grid.size(); ++g) {
        const auto [d1, d2] = config.delta_grid[g];
        const apd::ParamVector theta_n = drifted_theta(config, d1, d2);
        const auto reps_out = run_replications(config, theta_n, static_cast<uint64_t>(g));
        out.push_back(report_from(config, reps_out, d1, d2, epd::power_prediction(test, d1, d2)));
    }
    return out;
}

std::string power_csv(const std::vector<MCReport>& rows, bool with_empirical) {
    std::string s = "delta1,delta2,estimator,predicted_power,empirical_power,mc_stderr\n";
    for (const auto& r : rows) {
        s += fmt17(r.delta1);
        s += ',';
        s += fmt17(r.delta2);
        s += ',';
        s += estimator_name(r.config.estimator);
        s += ',';
        s += fmt17(r.predicted_power);
        s += ',';
        if (with_empirical) {
            s += fmt17(r.rejection_rate);
            s += ',';
            s += fmt17(r.mc_stderr);
        } else {
            s += ',';
        }
        s += '\n';
    }
    return s;
}

std::string figure1_csv(const MCConfig& config, bool empirical) {
    config.validate();
    std::vector<std::pair<double, double>> grid;
    for (int i = 0; i <= 35; ++i) grid.emplace_back(0.1 * i, 0.0);   // delta1 slice
    for (int i = 0; i <= 36; ++i) grid.emplace_back(0.0, 0.5 * i);   // delta2 slice

    std::vector<MCReport> rows;
    for (est::Method m : {est::Method::ML, est::Method::MOM}) {
        MCConfig c = config;
        c.mode = Mode::POWER;
        c.estimator = m;
        const epd::EPDTestConfig test{c.lambda, m, c.alpha};
        for (size_t g = 0; g < grid.size(); ++g) {
            const auto [d1, d2] = grid[g];
            MCReport rep;
            rep.delta1 = d1;
            rep.delta2 = d2;
            rep.predicted_power = epd::power_prediction(test, d1, d2);
            rep.reps = 0;
            rep.rejection_rate = 0.0;
            rep.mc_stderr = 0.0;
            rep.config = c;
            if (empirical) {
                const apd::ParamVector theta_n = drifted_theta(c, d1, d2);
                // Grid index keys the streams, so the two estimators see the
                // same draws at the same (delta1, delta2).
                const auto reps_out = run_replications(c, theta_n, static_cast<uint64_t>(g));
                rep = report_from(c, reps_out, d1, d2, rep.predicted_power);
            }
            rows.push_back(rep);
        }
    }
    return power_csv(rows, empirical);
}

void emit_figure1(const MCConfig& config, const std::string& out_path, bool empirical) {
    const std::string csv = figure1_csv(config, empirical);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("figure1: cannot open output file " + out_path);
    out << csv;
    if (!out.good()) throw std::runtime_error("figure1: write failed for " + out_path);
}

std::vector<double> load_observations(std::istream& in) {
    std::vector<double> data;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;  // blank
        if (line[b] == '#') continue;          // comment
        size_t e = line.find_last_not_of(" \t\r");
        const char* first = line.data() + b;
        const char* last = line.data() + e + 1;
        if (*first == '+') ++first;  // from_chars rejects an explicit plus sign
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v))
            throw ParseError("invalid observation '" + line.substr(b, e - b + 1) + "'", line_no);
        data.push_back(v);
    }
    return data;
}

std::vector<double> load_observations_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file " + path);
    return load_observations(in);
}

ustat::TestResult run_data_test(const std::string& path, const epd::EPDTestConfig& config) {
    const std::vector<double> data = load_observations_file(path);
    if (data.size() < 2) throw SampleTooSmall("data file holds fewer than 2 observations");
    return epd::run_test(data, config);
}

std::string format_test_result(const ustat::TestResult& result, double alpha) {
    std::string s;
    s += "statistic = " + fmt17(result.statistic) + "\n";
    s += "df = " + std::to_string(result.df) + "\n";
    s += "p_value = " + fmt17(result.p_value) + "\n";
    s += "mu_hat = " + fmt17(result.theta_hat.mu) + "\n";
    s += "sigma_hat = " + fmt17(result.theta_hat.sigma) + "\n";
    s += "alpha = " + fmt17(alpha) + "\n";
    s += std::string("decision = ") + (result.p_value < alpha ? "reject" : "fail-to-reject") + "\n";
    return s;
}

std::string format_report(const MCReport& report) {
    std::string s;
    s += "lambda = " + fmt17(report.config.lambda) + "\n";
    s += std::string("estimator = ") + estimator_name(report.config.estimator) + "\n";
    s += "n = " + std::to_string(report.config.n) + "\n";
    s += "reps = " + std::to_string(report.reps) + "\n";
    s += "alpha = " + fmt17(report.config.alpha) + "\n";
    s += "seed = " + std::to_string(report.config.seed) + "\n";
    s += "delta1 = " + fmt17(report.delta1) + "\n";
    s += "delta2 = " + fmt17(report.delta2) + "\n";
    s += "rejection_rate = " + fmt17(report.rejection_rate) + "\n";
    s += "mc_stderr = " + fmt17(report.mc_stderr) + "\n";
    s += "predicted_power = " + fmt17(report.predicted_power) + "\n";
    return s;
}

}  // namespace ustatgof::mc
