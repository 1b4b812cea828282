#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "ustatgof/epd_test.hpp"

namespace ustatgof::mc {

enum class Mode { SIZE, POWER, FIGURE1, TEST };

struct MCConfig {
    double lambda = 1.5;
    est::Method estimator = est::Method::ML;
    long n = 2000;
    long reps = 10000;
    double alpha = 0.05;
    uint64_t seed = 1;
    std::vector<std::pair<double, double>> delta_grid;  // (delta1, delta2) pairs
    Mode mode = Mode::SIZE;
    double mu0 = 0.0;
    double sigma0 = 1.0;
    // Optional nuisance drift mu = mu0 + delta3/sqrt(n), sigma = sigma0 *
    // (1 + delta4/sqrt(n)) for Corollary-1 style power experiments.
    double delta3 = 0.0;
    double delta4 = 0.0;
    int threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

struct MCReport {
    double delta1 = 0.0, delta2 = 0.0;
    double rejection_rate;
    double mc_stderr;  // sqrt(rate (1 - rate) / reps)
    double predicted_power;
    long reps;
    MCConfig config;
};

// The local-alternative parameter point theta_n for one grid entry; the
// {1 + o(1)} factor of the drift is set to 1.
apd::ParamVector drifted_theta(const MCConfig& config, double delta1, double delta2);

// Draws `reps` samples of size n from `draw_from` and evaluates the EPD test
// on each. Replication r of grid point g uses the stream keyed by
// (seed, g, r); workers may execute replications in any order and the output
// is independent of the schedule. Changing reps from R to R+1 leaves the
// first R entries unchanged.
std::vector<epd::Computation> run_replications(const MCConfig& config, const apd::ParamVector& draw_from,
                                               uint64_t point_index = 0);

MCReport run_size_experiment(const MCConfig& config);
std::vector<MCReport> run_power_experiment(const MCConfig& config);

// figure1/power CSV: header delta1,delta2,estimator,predicted_power,
// empirical_power,mc_stderr; the empirical columns are empty when no
// simulation was requested. Doubles carry 17 significant digits.
std::string power_csv(const std::vector<MCReport>& rows, bool with_empirical);

// Power-curve slices at lambda (default 1.5): delta1 in [0, 3.5] step 0.1
// with delta2 = 0, then delta2 in [0, 18] step 0.5 with delta1 = 0, both
// estimators. With `empirical`, each row also carries a simulated rate.
std::string figure1_csv(const MCConfig& config, bool empirical);
void emit_figure1(const MCConfig& config, const std::string& out_path, bool empirical);

// Plain-text ingestion: one decimal observation per line, `#` comments and
// blank lines skipped, locale-independent decimal point.
std::vector<double> load_observations(std::istream& in);
std::vector<double> load_observations_file(const std::string& path);

ustat::TestResult run_data_test(const std::string& path, const epd::EPDTestConfig& config);

// Stable key = value renderings used by the CLI (and by the determinism
// checks, which compare them bytewise).
std::string format_test_result(const ustat::TestResult& result, double alpha);
std::string format_report(const MCReport& report);

}  // namespace ustatgof::mc
