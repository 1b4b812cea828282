// epdgof: goodness-of-fit testing for the exponential power distribution and
// a Monte Carlo laboratory for the test's asymptotics.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ustatgof/errors.hpp"
#include "ustatgof/mc.hpp"

namespace {

using namespace ustatgof;

est::Method parse_estimator(const std::string& s) {
    if (s == "ml") return est::Method::ML;
    if (s == "mom") return est::Method::MOM;
    throw CLI::ValidationError("--estimator", "must be 'ml' or 'mom'");
}

void warn_lambda(double lambda) {
    if (lambda > 1.0 && lambda < epd::kLambdaSlowThreshold)
        std::cerr << "warning: lambda = " << lambda
                  << " is close to 1; estimator convergence degrades (results remain valid)\n";
}

std::vector<std::pair<double, double>> cross_grid(const std::vector<double>& d1,
                                                  const std::vector<double>& d2) {
    std::vector<std::pair<double, double>> grid;
    for (double a : d1)
        for (double b : d2) grid.emplace_back(a, b);
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"U-statistic goodness-of-fit tests for the exponential power distribution"};
    app.require_subcommand(1);

    std::string estimator_str = "ml";
    std::string data_path, out_path;
    mc::MCConfig cfg;
    std::vector<double> delta1_list, delta2_list;
    bool empirical = false;

    auto add_common = [&](CLI::App* sub, bool with_alpha = true) {
        sub->add_option("--lambda", cfg.lambda, "Auxiliary exponent lambda (> 1)")->capture_default_str();
        sub->add_option("--estimator", estimator_str, "Nuisance estimator: ml | mom")->capture_default_str();
        if (with_alpha) sub->add_option("--alpha", cfg.alpha, "Significance level")->capture_default_str();
        sub->add_option("--threads", cfg.threads, "Worker threads (0 = hardware)")->capture_default_str();
    };
    auto add_mc = [&](CLI::App* sub) {
        sub->add_option("--n", cfg.n, "Sample size per replication")->capture_default_str();
        sub->add_option("--reps", cfg.reps, "Replication count")->capture_default_str();
        sub->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
        sub->add_option("--mu0", cfg.mu0, "Null location")->capture_default_str();
        sub->add_option("--sigma0", cfg.sigma0, "Null scale")->capture_default_str();
    };

    CLI::App* test = app.add_subcommand("test", "Run the EPD test on a data file");
    test->add_option("--data", data_path, "Data file, one observation per line")->required();
    add_common(test);

    CLI::App* size = app.add_subcommand("size", "Empirical size under the null");
    add_common(size);
    add_mc(size);

    CLI::App* power = app.add_subcommand("power", "Empirical vs predicted power under local alternatives");
    add_common(power);
    add_mc(power);
    power->add_option("--delta1", delta1_list, "delta1 drift values (the grid is the cross product)")
        ->required()
        ->delimiter(',');
    power->add_option("--delta2", delta2_list, "delta2 drift values")->required()->delimiter(',');
    power->add_option("--delta3", cfg.delta3, "Nuisance location drift (Corollary-1 experiments)")
        ->capture_default_str();
    power->add_option("--delta4", cfg.delta4, "Nuisance scale drift")->capture_default_str();
    power->add_option("--out", out_path, "Write the CSV here instead of stdout");

    CLI::App* figure1 = app.add_subcommand("figure1", "Emit the asymptotic power-curve CSV");
    long fig_reps = 1000;  // lighter default: the empirical overlay covers 146 grid points
    figure1->add_option("--out", out_path, "Output CSV path")->required();
    add_common(figure1);
    figure1->add_option("--n", cfg.n, "Sample size for --empirical")->capture_default_str();
    figure1->add_option("--reps", fig_reps, "Replications for --empirical")->capture_default_str();
    figure1->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    figure1->add_flag("--empirical", empirical, "Also simulate each grid point");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        cfg.estimator = parse_estimator(estimator_str);
    } catch (const CLI::ParseError& e) {
        return app.exit(e), 2;
    }
    warn_lambda(cfg.lambda);

    try {
        if (test->parsed()) {
            cfg.mode = mc::Mode::TEST;
            const epd::EPDTestConfig tc{cfg.lambda, cfg.estimator, cfg.alpha};
            tc.validate();
            const ustat::TestResult r = mc::run_data_test(data_path, tc);
            std::cout << mc::format_test_result(r, cfg.alpha);
        } else if (size->parsed()) {
            cfg.mode = mc::Mode::SIZE;
            std::cout << mc::format_report(mc::run_size_experiment(cfg));
        } else if (power->parsed()) {
            cfg.mode = mc::Mode::POWER;
            cfg.delta_grid = cross_grid(delta1_list, delta2_list);
            const std::vector<mc::MCReport> rows = mc::run_power_experiment(cfg);
            const std::string csv = mc::power_csv(rows, true);
            if (out_path.empty()) {
                std::cout << csv;
            } else {
                std::ofstream out(out_path, std::ios::binary);
                if (!out) throw std::runtime_error("cannot open output file " + out_path);
                out << csv;
            }
        } else if (figure1->parsed()) {
            cfg.mode = mc::Mode::FIGURE1;
            cfg.reps = fig_reps;
            mc::emit_figure1(cfg, out_path, empirical);
        }
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const SampleTooSmall& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateSample& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NonConvergence& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const NotPositiveDefinite& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const BackendAccuracy& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
