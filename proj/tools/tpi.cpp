// Command-line tool for two-photon interferometric delay sensing: outcome
// probabilities, Fisher information, peak-information sweeps, figure and
// table data reproduction, Monte Carlo sampling, and noise-regime reports.
//
// Exit status: 0 on success, 2 on usage errors, 1 on numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tpi/commands.hpp"
#include "tpi/errors.hpp"

namespace {

using tpi::cmd::GridRange;
using tpi::cmd::RunConfig;

// Mutable mirror of RunConfig for CLI11 to write into; enum-valued fields go
// through strings and optional fields through Option counts.
struct FlagSet {
    RunConfig cfg;
    std::string protocol = "hom";
    std::string distribution = "gaussian";
    std::string correlation = "entangled";
    std::string placement = "correlated";
    std::string axis = "eps";
    std::string grid_text;
    double alpha = 0.0;
    double delta_wp = 0.0;
    double eta_both = 0.0;
    bool independent = false;
    std::string config_path; // parsed pre-CLI11; registered so it is accepted

    CLI::Option* alpha_opt = nullptr;
    CLI::Option* delta_opt = nullptr;
    CLI::Option* grid_opt = nullptr;
    CLI::Option* eta_opt = nullptr;
};

GridRange parse_grid(const std::string& text) {
    GridRange grid;
    const auto first = text.find(':');
    const auto second = text.find(':', first == std::string::npos
                                           ? std::string::npos
                                           : first + 1);
    if (first == std::string::npos || second == std::string::npos)
        throw CLI::ValidationError("--grid", "expected lo:hi:step, got '" +
                                                 text + "'");
    try {
        grid.lo = std::stod(text.substr(0, first));
        grid.hi = std::stod(text.substr(first + 1, second - first - 1));
        grid.step = std::stod(text.substr(second + 1));
    } catch (const std::exception&) {
        throw CLI::ValidationError("--grid", "expected lo:hi:step, got '" +
                                                 text + "'");
    }
    if (!(grid.step > 0.0) || !(grid.hi >= grid.lo))
        throw CLI::ValidationError("--grid",
                                   "need lo <= hi and a positive step");
    return grid;
}

tpi::ProtocolKind parse_protocol(const std::string& name) {
    if (name == "hom") return tpi::ProtocolKind::HOM;
    if (name == "mz2s") return tpi::ProtocolKind::MZ2s;
    if (name == "mz2d") return tpi::ProtocolKind::MZ2d;
    if (name == "mz1") return tpi::ProtocolKind::MZ1;
    return tpi::ProtocolKind::MZ1x2Correlated; // "mz1x2", validated by CLI11
}

tpi::ThetaDistribution parse_distribution(const std::string& name) {
    if (name == "gaussian") return tpi::ThetaDistribution::Gaussian;
    if (name == "wrapped-gaussian" || name == "wg")
        return tpi::ThetaDistribution::WrappedGaussian;
    return tpi::ThetaDistribution::VonMises; // "von-mises" / "vm"
}

// Shared physical-parameter flags.
void add_physics_flags(CLI::App* sub, FlagSet& fl) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--sigma-over-wp", fl.cfg.sigma_over_wp,
                    "Spectral width over pump frequency (default 0.01)");
    fl.alpha_opt = sub->add_option("--alpha", fl.alpha,
                                   "Pair visibility in [0, 1]");
    sub->add_option("--eta-eps-wp", fl.cfg.eta_eps_wp,
                    "Frequency-shift noise strength times pump frequency");
    sub->add_option("--eta-theta", fl.cfg.eta_theta,
                    "Phase noise strength (radians)");
    fl.eta_opt = sub->add_option(
        "--eta", fl.eta_both, "Set both noise strengths to the same value");
    sub->add_option("--distribution", fl.distribution,
                    "Phase-noise distribution")
        ->check(CLI::IsMember({"gaussian", "wrapped-gaussian", "wg",
                               "von-mises", "vm"}));
    sub->add_option("--correlation", fl.correlation,
                    "Photon-pair frequency correlation")
        ->check(CLI::IsMember({"entangled", "independent"}));
    sub->add_flag("--independent", fl.independent,
                  "Shorthand for --correlation independent");
    sub->add_option("--placement", fl.placement,
                    "Noise placement across the two photonic modes")
        ->check(CLI::IsMember({"correlated", "uncorrelated"}));
    sub->add_flag("--both-arms", fl.cfg.both_arms,
                  "Split the noise across both interferometer arms");
    sub->add_option("--f-eps", fl.cfg.f_eps,
                    "Both-arms fraction of frequency-shift noise in arm 1");
    sub->add_option("--f-theta", fl.cfg.f_theta,
                    "Both-arms fraction of phase noise in arm 1");
    sub->add_option("--config", fl.config_path,
                    "Flat key = value file mirroring the flags (flags win)");
}

void add_scan_flags(CLI::App* sub, FlagSet& fl) {
    sub->add_option("--protocol", fl.protocol, "Protocol to evaluate")
        ->check(CLI::IsMember({"hom", "mz2s", "mz2d", "mz1", "mz1x2"}));
    fl.delta_opt = sub->add_option("--delta-wp", fl.delta_wp,
                                   "Single delay times pump frequency");
    fl.grid_opt = sub->add_option("--grid", fl.grid_text,
                                  "Delay grid lo:hi:step (delta times pump)");
    sub->add_option("--output", fl.cfg.output,
                    "Write rows to this file instead of stdout");
}

// Resolve string-valued flags into the typed config.
void finalize(FlagSet& fl) {
    fl.cfg.protocol = parse_protocol(fl.protocol);
    fl.cfg.distribution = parse_distribution(fl.distribution);
    fl.cfg.correlation = (fl.independent || fl.correlation == "independent")
                             ? tpi::PhotonCorrelation::Independent
                             : tpi::PhotonCorrelation::FrequencyEntangled;
    fl.cfg.placement = fl.placement == "uncorrelated"
                           ? tpi::NoisePlacement::ModeUncorrelated
                           : tpi::NoisePlacement::ModeCorrelated;
    fl.cfg.axis = fl.axis == "theta" ? tpi::metro::NoiseAxis::Theta
                                     : tpi::metro::NoiseAxis::Eps;
    if (fl.alpha_opt && fl.alpha_opt->count()) fl.cfg.alpha = fl.alpha;
    if (fl.delta_opt && fl.delta_opt->count()) fl.cfg.delta_wp = fl.delta_wp;
    if (fl.grid_opt && fl.grid_opt->count())
        fl.cfg.grid = parse_grid(fl.grid_text);
    if (fl.eta_opt && fl.eta_opt->count()) {
        fl.cfg.eta_eps_wp = fl.eta_both;
        fl.cfg.eta_theta = fl.eta_both;
    }
}

// Load `key = value` lines from the file named by any --config flag and
// splice them, as --key=value tokens, directly after the subcommand name so
// that explicitly passed flags override them (TakeLast policy).
std::vector<std::string> splice_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot read " + path);

    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string()
                                          : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--config",
                                       "expected key = value, got '" + line +
                                           "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw CLI::ValidationError("--config",
                                       "expected key = value, got '" + line +
                                           "'");
        tokens.push_back("--" + key + "=" + value);
    }
    if (tokens.empty()) return args;

    // Insert after the subcommand name (the first non-flag token).
    std::size_t at = 0;
    while (at < args.size() && !args[at].empty() && args[at][0] == '-') ++at;
    if (at < args.size()) ++at;
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(at),
                tokens.begin(), tokens.end());
    return args;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-photon interferometric delay sensing toolkit"};
    app.require_subcommand(1);

    FlagSet prob_fl, fisher_fl, sweep_fl, figure_fl, table_fl, mc_fl,
        regimes_fl;

    CLI::App* prob = app.add_subcommand(
        "prob", "Outcome probabilities (p1 p2 pc) at a delay or over a grid");
    add_physics_flags(prob, prob_fl);
    add_scan_flags(prob, prob_fl);

    CLI::App* fisher = app.add_subcommand(
        "fisher", "Fisher information rows: delta*wp <tab> F/wp^2");
    add_physics_flags(fisher, fisher_fl);
    add_scan_flags(fisher, fisher_fl);

    CLI::App* sweep = app.add_subcommand(
        "sweep", "Peak information against one noise axis: eta <tab> F/wp^2");
    add_physics_flags(sweep, sweep_fl);
    sweep->add_option("--protocol", sweep_fl.protocol, "Protocol to evaluate")
        ->check(CLI::IsMember({"hom", "mz2s", "mz2d", "mz1", "mz1x2"}));
    sweep->add_option("--axis", sweep_fl.axis, "Noise axis to sweep")
        ->check(CLI::IsMember({"eps", "theta"}));
    sweep_fl.grid_opt = sweep->add_option(
        "--grid", sweep_fl.grid_text, "Noise grid lo:hi:step (default 0:5:0.05)");
    sweep->add_option("--output", sweep_fl.cfg.output,
                      "Write rows to this file instead of stdout");

    CLI::App* figure = app.add_subcommand(
        "figure", "Emit a figure's curves as <figure>_<curve>.dat files");
    figure->add_option("id", figure_fl.cfg.target,
                       "Figure id: 2, 3-left, 3-right, 4, 5, 6, 8, 9, 10, 11")
        ->required();
    add_physics_flags(figure, figure_fl);
    figure->add_option("--outdir", figure_fl.cfg.outdir,
                       "Directory for the data files (default .)");

    CLI::App* table = app.add_subcommand(
        "table", "Computed table values beside the reference ones");
    table->add_option("id", table_fl.cfg.target, "Table id: 2 or 3")
        ->required();
    add_physics_flags(table, table_fl);

    CLI::App* montecarlo = app.add_subcommand(
        "montecarlo", "Sample shot outcomes; optionally an estimator study");
    add_physics_flags(montecarlo, mc_fl);
    montecarlo
        ->add_option("--protocol", mc_fl.protocol, "Protocol to sample")
        ->check(CLI::IsMember({"hom", "mz2s", "mz2d", "mz1", "mz1x2"}));
    mc_fl.delta_opt = montecarlo->add_option(
        "--delta-wp", mc_fl.delta_wp, "True delay times pump frequency");
    montecarlo->add_option("--shots", mc_fl.cfg.shots,
                           "Shots per trial (default 1000)")
        ->check(CLI::PositiveNumber);
    montecarlo->add_option("--seed", mc_fl.cfg.seed,
                           "Sampler seed (default 20260816)");
    montecarlo->add_option("--trials", mc_fl.cfg.trials,
                           "Number of estimator-study trials (default 0)")
        ->check(CLI::NonNegativeNumber);
    montecarlo->add_option("--threads", mc_fl.cfg.threads,
                           "Worker count (default: TPI_WORKERS or cores)");

    CLI::App* regimes = app.add_subcommand(
        "regimes", "Noise-regime boundaries and best-protocol classification");
    add_physics_flags(regimes, regimes_fl);

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = splice_config(std::move(args));
        // CLI11 parses back to front.
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(prob)) {
            finalize(prob_fl);
            prob_fl.cfg.command = "prob";
            tpi::cmd::run_prob(prob_fl.cfg, std::cout);
        } else if (app.got_subcommand(fisher)) {
            finalize(fisher_fl);
            fisher_fl.cfg.command = "fisher";
            tpi::cmd::run_fisher(fisher_fl.cfg, std::cout);
        } else if (app.got_subcommand(sweep)) {
            finalize(sweep_fl);
            sweep_fl.cfg.command = "sweep";
            tpi::cmd::run_sweep(sweep_fl.cfg, std::cout);
        } else if (app.got_subcommand(figure)) {
            finalize(figure_fl);
            figure_fl.cfg.command = "figure";
            const auto files = tpi::cmd::run_figure(figure_fl.cfg);
            std::cout << "wrote " << files.size() << " files to "
                      << figure_fl.cfg.outdir << '\n';
        } else if (app.got_subcommand(table)) {
            finalize(table_fl);
            table_fl.cfg.command = "table";
            tpi::cmd::run_table(table_fl.cfg, std::cout);
        } else if (app.got_subcommand(montecarlo)) {
            finalize(mc_fl);
            mc_fl.cfg.command = "montecarlo";
            tpi::cmd::run_montecarlo(mc_fl.cfg, std::cout);
        } else if (app.got_subcommand(regimes)) {
            finalize(regimes_fl);
            regimes_fl.cfg.command = "regimes";
            tpi::cmd::run_regimes(regimes_fl.cfg, std::cout);
        }
    } catch (const tpi::UnknownFigure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const tpi::UnknownTable& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
