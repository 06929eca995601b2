// scimask_cli: bound evaluation, mask-model sweeps and Monte Carlo recovery
// experiments for snapshot compressive imaging with binary masks.
//
// Exit codes: 0 success, 1 I/O or internal failure, 2 invalid configuration,
// 3 theorem not applicable to the parameters, 64 unknown subcommand.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scimask.hpp"
#include "scimask/io.hpp"

namespace {

using nlohmann::json;
using namespace scimask;
using scimask::io::format_double;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInapplicable = 3;
constexpr int kExitUsage = 64;

const std::vector<std::string> kCommands = {"bound",        "pstar", "theta1",  "lambda",
                                            "sweep-p",      "sweep-markov", "trial", "verify",
                                            "concentration", "fig2"};

struct CommonOpts {
    std::string out_dir;
    bool deterministic = false;
    unsigned threads = 1;
};

/// Writes result files into the output directory. Outside deterministic mode
/// CSVs start with a timestamp comment line and JSON reports carry a
/// "generated_at" key.
class OutputSink {
public:
    explicit OutputSink(const CommonOpts& opts) : opts_(opts) {}

    bool enabled() const { return !opts_.out_dir.empty(); }

    void json_file(const std::string& name, json j) const
    {
        if (!enabled()) {
            return;
        }
        if (!opts_.deterministic && j.is_object()) {
            j["generated_at"] = timestamp();
        }
        std::ofstream out(path(name), std::ios::binary);
        out << j.dump(2) << '\n';
        check(out, name);
    }

    void csv_file(const std::string& name, const std::function<void(std::ostream&)>& body) const
    {
        if (!enabled()) {
            return;
        }
        std::ofstream out(path(name), std::ios::binary);
        if (!opts_.deterministic) {
            out << "# generated " << timestamp() << '\n';
        }
        body(out);
        check(out, name);
    }

private:
    std::string path(const std::string& name) const
    {
        std::filesystem::create_directories(opts_.out_dir);
        return (std::filesystem::path(opts_.out_dir) / name).string();
    }

    static void check(const std::ofstream& out, const std::string& name)
    {
        if (!out) {
            throw std::runtime_error("failed writing " + name);
        }
    }

    static std::string timestamp()
    {
        const std::time_t now = std::time(nullptr);
        std::tm utc{};
        gmtime_r(&now, &utc);
        std::ostringstream s;
        s << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
        return s.str();
    }

    const CommonOpts& opts_;
};

std::vector<double> parse_grid(const std::string& text)
{
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        std::istringstream in(text);
        double lo = 0, hi = 0, step = 0;
        char c1 = 0, c2 = 0;
        if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0) ||
            hi < lo) {
            throw DomainError("grid \"" + text + "\" is not lo:hi:step");
        }
        const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
        // Interpolate rather than accumulate so the endpoints are exact.
        for (std::size_t k = 0; k < count; ++k) {
            grid.push_back(count == 1 ? lo
                                      : lo + (hi - lo) * static_cast<double>(k) /
                                                 static_cast<double>(count - 1));
        }
        return grid;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        grid.push_back(std::stod(item, &used));
        if (used != item.size()) {
            throw DomainError("bad grid value \"" + item + "\"");
        }
    }
    if (grid.empty()) {
        throw DomainError("empty grid");
    }
    return grid;
}

std::vector<std::size_t> parse_size_list(const std::string& text)
{
    std::vector<std::size_t> out;
    for (double v : parse_grid(text)) {
        if (v < 1.0 || v != std::floor(v)) {
            throw DomainError("expected positive integers in \"" + text + "\"");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

struct ParamOpts {
    std::size_t n = 4096;
    std::size_t B = 2;
    double r = 3.0;
    double delta = 0.0;
    double rho = 1.0;
    double eps = 0.2;

    void add(CLI::App* app, bool with_rate_delta)
    {
        app->add_option("--n", n, "pixels per frame")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 30));
        app->add_option("--B", B, "number of frames")->check(CLI::Range(std::size_t{1}, std::size_t{4096}));
        if (with_rate_delta) {
            app->add_option("--r", r, "code rate r")->check(CLI::Range(0.0, 1e6));
            app->add_option("--delta", delta, "code distortion delta")->check(CLI::Range(0.0, 1e300));
        }
        app->add_option("--rho", rho, "l-infinity budget (|x| <= rho/2)")->check(CLI::PositiveNumber);
        app->add_option("--eps", eps, "free parameter epsilon")->check(CLI::PositiveNumber);
    }

    BoundParams params() const { return {n, B, r, delta, rho, eps}; }
};

struct MaskOpts {
    std::string model = "iid";
    double p = 0.5;
    double q0 = 0.5;
    double q1 = 0.5;

    void add(CLI::App* app)
    {
        app->add_option("--model", model, "mask model")
            ->check(CLI::IsMember({"iid", "signed", "inframe", "outframe"}));
        app->add_option("--p", p, "P(D = 1) for i.i.d. models")->check(CLI::Range(0.0, 1.0));
        app->add_option("--q0", q0, "P(1 | 0) for Markov models")->check(CLI::Range(0.0, 1.0));
        app->add_option("--q1", q1, "P(0 | 1) for Markov models")->check(CLI::Range(0.0, 1.0));
    }

    MaskSpec spec() const
    {
        if (model == "iid" || model == "signed") {
            BernoulliMaskSpec s{p, model == "iid" ? Alphabet::Binary01 : Alphabet::SignedPM1};
            s.validate();
            return s;
        }
        MarkovMaskSpec s{q0, q1, model == "inframe" ? Orientation::InFrame : Orientation::OutOfFrame};
        s.validate();
        return s;
    }
};

struct ClassOpts {
    std::size_t n = 256;
    std::size_t B = 2;
    double rho = 1.0;
    std::size_t anchors = 64;
    std::optional<std::uint64_t> anchor_seed;
    double radius = 0.0;
    std::string codebook_file;
    double eps = 0.2;
    std::size_t trials = 100;

    void add(CLI::App* app)
    {
        app->add_option("--n", n, "pixels per frame")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 24));
        app->add_option("--B", B, "number of frames")->check(CLI::Range(std::size_t{1}, std::size_t{256}));
        app->add_option("--rho", rho, "l-infinity budget")->check(CLI::PositiveNumber);
        app->add_option("--anchors", anchors, "number of random anchors (codewords)")
            ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
        app->add_option("--anchor-seed", anchor_seed, "seed for anchors (defaults to --seed)");
        app->add_option("--class-radius", radius, "l2 perturbation radius of the signal class")
            ->check(CLI::Range(0.0, 1e300));
        app->add_option("--codebook", codebook_file, "codebook JSON used as the anchor set");
        app->add_option("--eps", eps, "free parameter epsilon")->check(CLI::PositiveNumber);
        app->add_option("--trials", trials, "number of trials")
            ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 24));
    }

    SignalClass signal_class(std::uint64_t seed) const
    {
        SignalClass cls;
        cls.perturbation_radius = radius;
        if (!codebook_file.empty()) {
            cls.anchors = io::codebook_from_json(io::read_json_file(codebook_file)).codewords();
        } else {
            cls.anchors = random_anchors(anchors, B, n, rho, anchor_seed.value_or(seed));
        }
        cls.validate();
        return cls;
    }

    TrialConfig config(const MaskSpec& spec, std::uint64_t seed, unsigned threads) const
    {
        TrialConfig cfg;
        cfg.signal_class = signal_class(seed);
        cfg.bound_params = bound_params_for(build_anchor_codebook(cfg.signal_class), eps);
        cfg.mask_spec = spec;
        cfg.num_trials = trials;
        cfg.master_seed = seed;
        cfg.threads = threads;
        return cfg;
    }
};

/// Options given on the command line, in declaration order, for config-echo.json.
json echo_options(const CLI::App* sub)
{
    json opts = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->count() == 0 || opt->get_lnames().empty()) {
            continue;
        }
        const std::string& name = opt->get_lnames().front();
        if (name == "help" || name == "config") {
            continue;
        }
        if (opt->get_expected_max() == 0 || opt->get_type_size_max() == 0) {
            opts[name] = true;
            continue;
        }
        std::string joined;
        for (const auto& r : opt->results()) {
            joined += (joined.empty() ? "" : ",") + r;
        }
        opts[name] = joined;
    }
    return opts;
}

/// Expands `--config FILE` (a config-echo.json) into command-line arguments.
/// Arguments given explicitly after it take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args)
{
    std::vector<std::string> rest;
    std::optional<std::string> file;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            file = args[++i];
        } else {
            rest.push_back(args[i]);
        }
    }
    if (!file) {
        return args;
    }
    const json cfg = io::read_json_file(*file);
    std::vector<std::string> out{cfg.at("command").get<std::string>()};
    for (const auto& [key, value] : cfg.at("options").items()) {
        out.push_back("--" + key);
        if (!value.is_boolean()) {
            out.push_back(value.get<std::string>());
        }
    }
    std::size_t start = 0;
    if (!rest.empty() && rest.front() == out.front()) {
        start = 1;
    }
    out.insert(out.end(), rest.begin() + static_cast<std::ptrdiff_t>(start), rest.end());
    return out;
}

void print_usage(std::ostream& out)
{
    out << "usage: scimask_cli <command> [options]\n\ncommands:\n"
           "  bound          evaluate a distortion bound (thm1, cor1, thm2, thm3, cor2)\n"
           "  pstar          minimizing mask probability of the Theorem 1 bound\n"
           "  theta1         Markov contraction coefficient\n"
           "  lambda         extreme eigenvalues of the correlation matrix\n"
           "  sweep-p        Monte Carlo sweep over the Bernoulli probability\n"
           "  sweep-markov   Monte Carlo sweep over Markov mask parameters\n"
           "  trial          run seeded recovery trials\n"
           "  verify         check bound satisfaction against the probability guarantee\n"
           "  concentration  empirical tails against the concentration bounds\n"
           "  fig2           theta1 curves as CSV\n\n"
           "Run `scimask_cli <command> --help` for options.\n";
}

json report_summary_trials(const std::vector<TrialResult>& trials)
{
    double mean = 0.0;
    double worst = 0.0;
    for (const auto& t : trials) {
        mean += t.empirical_distortion;
        worst = std::max(worst, t.empirical_distortion);
    }
    mean /= static_cast<double>(trials.size());
    return {{"num_trials", trials.size()},
            {"mean_empirical_distortion", mean},
            {"max_empirical_distortion", worst},
            {"satisfaction_rate", io::number(satisfaction_rate(trials))}};
}

int run(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) {
        print_usage(std::cerr);
        return kExitUsage;
    }
    args = expand_config(args);
    const std::string& command = args.front();
    if (command == "--help" || command == "-h") {
        print_usage(std::cout);
        return kExitOk;
    }
    if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
        std::cerr << "unknown subcommand \"" << command << "\"\n";
        print_usage(std::cerr);
        return kExitUsage;
    }

    CLI::App app{"snapshot compressive imaging mask theory toolkit", "scimask_cli"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    CommonOpts common;
    std::optional<std::uint64_t> seed;
    auto add_common = [&](CLI::App* sub, bool randomized) {
        sub->add_option("--out", common.out_dir, "output directory");
        sub->add_flag("--deterministic", common.deterministic, "omit timestamps from outputs");
        if (randomized) {
            sub->add_option("--seed", seed, "master seed")->required();
            sub->add_option("--threads", common.threads, "worker threads")
                ->check(CLI::Range(1u, 256u));
        }
    };

    // bound
    auto* bound_cmd = app.add_subcommand("bound", "evaluate a distortion bound");
    ParamOpts bound_params;
    bound_params.add(bound_cmd, true);
    std::string theorem = "thm1";
    double bound_p = 0.5;
    std::optional<double> bound_q0, bound_q1, bound_alpha;
    std::string cor2_mode = "proof";
    std::string p_grid;
    bound_cmd->add_option("--theorem", theorem)
        ->check(CLI::IsMember({"thm1", "cor1", "thm2", "thm3", "cor2"}));
    bound_cmd->add_option("--p", bound_p, "mask probability")->check(CLI::Range(0.0, 1.0));
    bound_cmd->add_option("--q0", bound_q0)->check(CLI::Range(0.0, 1.0));
    bound_cmd->add_option("--q1", bound_q1)->check(CLI::Range(0.0, 1.0));
    bound_cmd->add_option("--alpha", bound_alpha)->check(CLI::Range(0.0, 1.0));
    bound_cmd->add_option("--mode", cor2_mode, "cor2 variant")->check(CLI::IsMember({"proof", "paper"}));
    bound_cmd->add_option("--p-grid", p_grid, "also write sweep.csv over p (lo:hi:step or list)");
    add_common(bound_cmd, false);

    // pstar
    auto* pstar_cmd = app.add_subcommand("pstar", "minimizer of the Theorem 1 bound");
    ParamOpts pstar_params;
    pstar_params.add(pstar_cmd, true);
    std::string pstar_mode = "bound";
    pstar_cmd->add_option("--mode", pstar_mode)->check(CLI::IsMember({"bound", "paper"}));
    add_common(pstar_cmd, false);

    // theta1
    auto* theta_cmd = app.add_subcommand("theta1", "contraction coefficient");
    double theta_q0 = 0.5, theta_q1 = 0.5;
    std::size_t theta_B = 2;
    bool theta_brute = false;
    theta_cmd->add_option("--q0", theta_q0)->required()->check(CLI::Range(0.0, 1.0));
    theta_cmd->add_option("--q1", theta_q1)->required()->check(CLI::Range(0.0, 1.0));
    theta_cmd->add_option("--B", theta_B)->required()->check(CLI::Range(std::size_t{1}, std::size_t{100000}));
    theta_cmd->add_flag("--bruteforce", theta_brute, "also enumerate outcomes (B <= 20)");
    add_common(theta_cmd, false);

    // lambda
    auto* lambda_cmd = app.add_subcommand("lambda", "extreme eigenvalues of Lambda");
    double lambda_alpha = 0.0;
    std::size_t lambda_B = 2;
    lambda_cmd->add_option("--alpha", lambda_alpha)->required()->check(CLI::Range(0.0, 0.999999));
    lambda_cmd->add_option("--B", lambda_B)->required()->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
    add_common(lambda_cmd, false);

    // sweep-p
    auto* sweep_p_cmd = app.add_subcommand("sweep-p", "Monte Carlo sweep over p");
    ClassOpts sweep_p_class;
    sweep_p_class.add(sweep_p_cmd);
    std::string sweep_p_grid = "0.05:0.95:0.05";
    std::string sweep_p_alphabet = "binary01";
    sweep_p_cmd->add_option("--grid", sweep_p_grid, "p grid (lo:hi:step or list)");
    sweep_p_cmd->add_option("--alphabet", sweep_p_alphabet)->check(CLI::IsMember({"binary01", "signed"}));
    add_common(sweep_p_cmd, true);

    // sweep-markov
    auto* sweep_m_cmd = app.add_subcommand("sweep-markov", "Monte Carlo sweep over Markov masks");
    ClassOpts sweep_m_class;
    sweep_m_class.add(sweep_m_cmd);
    std::string orientation = "inframe";
    std::string q0_list, q1_list, alpha_list;
    double sweep_m_p = 0.4;
    sweep_m_cmd->add_option("--orientation", orientation)->check(CLI::IsMember({"inframe", "outframe"}));
    sweep_m_cmd->add_option("--q0-list", q0_list, "q0 values (crossed with --q1-list)");
    sweep_m_cmd->add_option("--q1-list", q1_list, "q1 values");
    sweep_m_cmd->add_option("--alpha-list", alpha_list, "alpha values at stationary --p");
    sweep_m_cmd->add_option("--p", sweep_m_p, "stationary p for --alpha-list")->check(CLI::Range(0.0, 1.0));
    add_common(sweep_m_cmd, true);

    // trial / verify
    auto* trial_cmd = app.add_subcommand("trial", "run seeded recovery trials");
    ClassOpts trial_class;
    MaskOpts trial_mask;
    trial_class.add(trial_cmd);
    trial_mask.add(trial_cmd);
    add_common(trial_cmd, true);

    auto* verify_cmd = app.add_subcommand("verify", "bound satisfaction vs probability guarantee");
    ClassOpts verify_class;
    MaskOpts verify_mask;
    verify_class.add(verify_cmd);
    verify_mask.add(verify_cmd);
    add_common(verify_cmd, true);

    // concentration
    auto* conc_cmd = app.add_subcommand("concentration", "empirical tails vs bounds");
    MaskOpts conc_mask;
    conc_mask.add(conc_cmd);
    std::size_t conc_n = 1024, conc_B = 4, conc_samples = 10000;
    double conc_rho = 1.0;
    std::string t_grid = "0.05:0.5:0.05";
    conc_cmd->add_option("--n", conc_n)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 24));
    conc_cmd->add_option("--B", conc_B)->check(CLI::Range(std::size_t{1}, std::size_t{256}));
    conc_cmd->add_option("--rho", conc_rho)->check(CLI::PositiveNumber);
    conc_cmd->add_option("--t-grid", t_grid, "deviation thresholds (lo:hi:step or list)");
    conc_cmd->add_option("--samples", conc_samples)->check(CLI::Range(std::size_t{10000}, std::size_t{1} << 26));
    add_common(conc_cmd, true);

    // fig2
    auto* fig2_cmd = app.add_subcommand("fig2", "theta1 as a function of q1");
    std::string fig2_q0 = "0.2,0.5";
    std::string fig2_B = "2,8";
    std::string fig2_q1 = "0:1:0.01";
    fig2_cmd->add_option("--q0-list", fig2_q0);
    fig2_cmd->add_option("--B-list", fig2_B);
    fig2_cmd->add_option("--q1-grid", fig2_q1);
    add_common(fig2_cmd, false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    CLI::App* sub = app.get_subcommands().front();
    const OutputSink sink(common);
    sink.json_file("config-echo.json", {{"command", sub->get_name()}, {"options", echo_options(sub)}});

    if (sub == bound_cmd) {
        const BoundParams params = bound_params.params();
        auto evaluate = [&](double p) -> BoundReport {
            if (theorem == "thm1") return thm1_bound(p, params);
            if (theorem == "cor1") return cor1_bound(p, params);
            if (theorem == "thm2") {
                if (!bound_q0 || !bound_q1) {
                    throw DomainError("thm2 needs --q0 and --q1");
                }
                return thm2_bound({*bound_q0, *bound_q1, Orientation::InFrame}, params);
            }
            double a = 0.0;
            if (bound_alpha) {
                a = *bound_alpha;
            } else if (bound_q0 && bound_q1) {
                const MarkovMaskSpec m{*bound_q0, *bound_q1, Orientation::OutOfFrame};
                a = alpha(m);
                p = stationary_p(m);
                if (a < 0.0) {
                    throw InapplicableError("Theorem 3 needs q0, q1 <= 1/2");
                }
            }
            if (theorem == "thm3") return thm3_bound(p, a, params);
            return cor2_bound(p, a, params,
                              cor2_mode == "paper" ? Cor2Mode::PaperLiteral : Cor2Mode::ProofDerived);
        };
        const BoundReport report = evaluate(bound_p);
        const json j = io::to_json(report);
        std::cout << j.dump(2) << '\n';
        sink.json_file("report.json", j);
        if (!p_grid.empty()) {
            const auto grid = parse_grid(p_grid);
            std::vector<BoundReport> reports;
            for (double p : grid) {
                reports.push_back(evaluate(p));
            }
            sink.csv_file("sweep.csv", [&](std::ostream& out) {
                io::write_bound_sweep_csv(out, grid, reports);
            });
        }
        return kExitOk;
    }

    if (sub == pstar_cmd) {
        const auto ps = thm1_pstar(pstar_params.params(),
                                   pstar_mode == "paper" ? PStarMode::PaperLiteral
                                                         : PStarMode::BoundConsistent);
        std::cout << "pstar " << format_double(ps.value) << '\n';
        if (ps.degenerate) {
            std::cout << "degenerate: δ=0\n";
        }
        sink.json_file("report.json", {{"pstar", ps.value},
                                       {"degenerate", ps.degenerate},
                                       {"mode", pstar_mode},
                                       {"params", io::to_json(pstar_params.params())}});
        return kExitOk;
    }

    if (sub == theta_cmd) {
        const double theta = theta1_closed(theta_q0, theta_q1, theta_B);
        std::cout << "theta1 " << format_double(theta) << '\n';
        json j{{"q0", theta_q0}, {"q1", theta_q1}, {"B", theta_B}, {"theta1", theta}};
        if (theta_brute) {
            const auto bf = theta1_bruteforce(theta_q0, theta_q1, theta_B);
            std::cout << "tv_at_extremes " << format_double(bf.tv_at_extremes) << '\n'
                      << "sup_over_all_pairs " << format_double(bf.sup_over_all_pairs) << '\n';
            j["tv_at_extremes"] = bf.tv_at_extremes;
            j["sup_over_all_pairs"] = bf.sup_over_all_pairs;
        }
        sink.json_file("report.json", j);
        return kExitOk;
    }

    if (sub == lambda_cmd) {
        const auto ext = lambda_extremes(lambda_matrix(lambda_alpha, lambda_B));
        const auto [low, high] = gershgorin_bounds(lambda_alpha);
        std::cout << "lambda_min " << format_double(ext.lambda_min) << '\n'
                  << "lambda_max " << format_double(ext.lambda_max) << '\n'
                  << "gershgorin_low " << format_double(low) << '\n'
                  << "gershgorin_high " << format_double(high) << '\n';
        sink.json_file("report.json", {{"alpha", lambda_alpha},
                                       {"B", lambda_B},
                                       {"lambda_min", ext.lambda_min},
                                       {"lambda_max", ext.lambda_max},
                                       {"gershgorin_low", low},
                                       {"gershgorin_high", high}});
        return kExitOk;
    }

    if (sub == sweep_p_cmd) {
        const auto grid = parse_grid(sweep_p_grid);
        const auto alphabet = io::alphabet_from_string(sweep_p_alphabet);
        const TrialConfig cfg = sweep_p_class.config(BernoulliMaskSpec{0.5, alphabet}, *seed, common.threads);
        const SweepResult r = sweep_p(cfg, grid);
        sink.csv_file("sweep.csv", [&](std::ostream& out) { io::write_sweep_p_csv(out, r); });
        const json summary = io::sweep_summary(r);
        sink.json_file("report.json", summary);
        std::cout << summary.dump(2) << '\n';
        return kExitOk;
    }

    if (sub == sweep_m_cmd) {
        const Orientation orient = orientation == "inframe" ? Orientation::InFrame : Orientation::OutOfFrame;
        std::vector<MarkovMaskSpec> grid;
        if (!alpha_list.empty()) {
            for (double a : parse_grid(alpha_list)) {
                grid.push_back(markov_from_stationary(sweep_m_p, a, orient));
            }
        } else {
            if (q0_list.empty() || q1_list.empty()) {
                throw DomainError("sweep-markov needs --alpha-list or both --q0-list and --q1-list");
            }
            for (double q0 : parse_grid(q0_list)) {
                for (double q1 : parse_grid(q1_list)) {
                    grid.push_back({q0, q1, orient});
                }
            }
        }
        const TrialConfig cfg = sweep_m_class.config(grid.front(), *seed, common.threads);
        const SweepResult r = sweep_markov(cfg, grid);
        sink.csv_file("sweep.csv", [&](std::ostream& out) { io::write_sweep_markov_csv(out, r); });
        const json summary = io::sweep_summary(r);
        sink.json_file("report.json", summary);
        std::cout << summary.dump(2) << '\n';
        return kExitOk;
    }

    if (sub == trial_cmd) {
        const TrialConfig cfg = trial_class.config(trial_mask.spec(), *seed, common.threads);
        const Experiment exp(cfg);
        const auto trials = exp.run_all();
        sink.csv_file("trials.csv", [&](std::ostream& out) { io::write_trials_csv(out, trials); });
        json report = report_summary_trials(trials);
        report["bound"] = io::to_json(*exp.bound());
        report["mask"] = io::to_json(cfg.mask_spec);
        sink.json_file("report.json", report);
        std::cout << report.dump(2) << '\n';
        return kExitOk;
    }

    if (sub == verify_cmd) {
        const TrialConfig cfg = verify_class.config(verify_mask.spec(), *seed, common.threads);
        const VerifyResult v = verify_bound_probability(cfg);
        sink.csv_file("trials.csv", [&](std::ostream& out) { io::write_trials_csv(out, v.trials); });
        const json report{{"satisfaction_rate", v.satisfaction_rate},
                          {"prob_lower_raw", io::number(v.prob_lower_raw)},
                          {"prob_lower_clamped", v.prob_lower_clamped},
                          {"slack", v.slack},
                          {"vacuous", v.vacuous},
                          {"pass", v.pass},
                          {"bound", io::to_json(v.bound)},
                          {"mask", io::to_json(cfg.mask_spec)}};
        sink.json_file("report.json", report);
        std::cout << report.dump(2) << '\n';
        return kExitOk;
    }

    if (sub == conc_cmd) {
        const auto table = concentration_check(conc_mask.spec(), conc_n, conc_B, conc_rho,
                                               parse_grid(t_grid), conc_samples, *seed, common.threads);
        sink.csv_file("concentration.csv", [&](std::ostream& out) { io::write_concentration_csv(out, table); });
        const json report{{"tail", table.tail},
                          {"mean", table.mean},
                          {"theta1", table.theta1},
                          {"lipschitz", table.lipschitz},
                          {"num_samples", table.num_samples},
                          {"pass", table.pass}};
        sink.json_file("report.json", report);
        io::write_concentration_csv(std::cout, table);
        return kExitOk;
    }

    if (sub == fig2_cmd) {
        const auto rows = io::fig2_rows(parse_grid(fig2_q0), parse_size_list(fig2_B), parse_grid(fig2_q1));
        sink.csv_file("fig2.csv", [&](std::ostream& out) { io::write_fig2_csv(out, rows); });
        if (!sink.enabled()) {
            io::write_fig2_csv(std::cout, rows);
        }
        return kExitOk;
    }
    return kExitUsage;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const scimask::InapplicableError& e) {
        std::cerr << "inapplicable: " << e.what() << '\n';
        return kExitInapplicable;
    } catch (const scimask::DomainError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitConfig;
    } catch (const scimask::ShapeError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
