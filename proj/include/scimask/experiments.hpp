#ifndef SCIMASK_EXPERIMENTS_HPP
#define SCIMASK_EXPERIMENTS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "codebook.hpp"
#include "core.hpp"
#include "errors.hpp"
#include "maskgen.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "theory.hpp"

namespace scimask {

struct TrialConfig {
    BoundParams bound_params;
    MaskSpec mask_spec = BernoulliMaskSpec{};
    SignalClass signal_class;
    std::size_t num_trials = 100;
    std::uint64_t master_seed = 0;
    unsigned threads = 1;
};

/// Bound parameters matching an anchor codebook: r and delta are taken from
/// the code, n and B from its codewords.
inline BoundParams bound_params_for(const Codebook& cb, double epsilon)
{
    BoundParams params;
    params.n = cb.num_pixels();
    params.B = cb.num_frames();
    params.rate_r = cb.rate();
    params.delta = cb.certified_delta();
    params.rho = cb[0].rho();
    params.epsilon = epsilon;
    return params;
}

/// The theorem that covers a mask model: Thm1 (i.i.d. {0,1}), Cor1 (i.i.d.
/// +/-1), Thm2 (in-frame Markov) or Thm3 (out-of-frame Markov).
inline BoundReport bound_for(const MaskSpec& spec, const BoundParams& params)
{
    if (const auto* bern = std::get_if<BernoulliMaskSpec>(&spec)) {
        bern->validate();
        return bern->alphabet == Alphabet::Binary01 ? thm1_bound(bern->p, params)
                                                    : cor1_bound(bern->p, params);
    }
    const auto& markov = std::get<MarkovMaskSpec>(spec);
    if (markov.orientation == Orientation::InFrame) {
        return thm2_bound(markov, params);
    }
    const double a = alpha(markov);
    if (a < 0.0) {
        throw InapplicableError("thm3_bound: requires q0, q1 <= 1/2 (alpha >= 0)");
    }
    if (!(markov.q0 > 0.0 && markov.q1 > 0.0)) {
        throw DomainError("thm3_bound: stationary law is degenerate (q0 or q1 is zero)");
    }
    return thm3_bound(stationary_p(markov), a, params);
}

/// One noiseless encode/decode on explicit masks.
struct Recovery {
    std::size_t csp_index = 0;
    std::size_t compress_index = 0;
    double csp_objective = 0.0;
    double compress_objective = 0.0;   ///< ||y - H x~||^2 with x~ = compress(x)
    double empirical_distortion = 0.0;
};

inline Recovery recover(const SignalCube& x, const MaskCube& masks, const Codebook& cb)
{
    const Measurement y = encode(x, masks);
    const CspResult csp = csp_decode(y, masks, cb);
    const Compressed tilde = compress(cb, x);
    Recovery r;
    r.csp_index = csp.index;
    r.compress_index = tilde.index;
    r.csp_objective = csp.objective;
    r.compress_objective = measurement_residual(y, masks, tilde.reconstruction);
    r.empirical_distortion = normalized_distortion(x, csp.xhat);
    return r;
}

struct TrialResult {
    std::size_t trial_index = 0;
    std::uint64_t substream_seed = 0;
    double empirical_distortion = 0.0;
    double bound_value = std::numeric_limits<double>::quiet_NaN();
    bool satisfied = false;
    double csp_objective = 0.0;
    double compress_objective = 0.0;
    std::size_t csp_index = 0;
};

/// Validated trial plan: the codebook built from the signal class and the
/// bound of the theorem that matches the mask model.
class Experiment {
public:
    /// With require_bound = false an inapplicable theorem leaves bound() empty
    /// and trials still run (satisfied is then false).
    explicit Experiment(TrialConfig cfg, bool require_bound = true)
        : cfg_(std::move(cfg)), codebook_(build_anchor_codebook(cfg_.signal_class))
    {
        const auto& params = cfg_.bound_params;
        params.validate();
        if (params.n != codebook_.num_pixels() || params.B != codebook_.num_frames()) {
            throw ShapeError("TrialConfig: n, B differ from the signal class");
        }
        if (params.rho != cfg_.signal_class.rho()) {
            throw DomainError("TrialConfig: rho differs from the signal class");
        }
        const double capacity =
            std::exp2(static_cast<double>(params.B) * params.rate_r) * (1.0 + 1e-12);
        if (static_cast<double>(codebook_.size()) > capacity) {
            throw DomainError("TrialConfig: codebook exceeds 2^(B r) for the bound's rate");
        }
        if (params.delta < codebook_.certified_delta()) {
            throw DomainError("TrialConfig: bound delta is below the codebook's certified delta");
        }
        if (cfg_.num_trials == 0) {
            throw DomainError("TrialConfig: num_trials must be positive");
        }
        std::visit([](const auto& s) { s.validate(); }, cfg_.mask_spec);
        try {
            bound_ = bound_for(cfg_.mask_spec, params);
        } catch (const InapplicableError&) {
            if (require_bound) {
                throw;
            }
        }
    }

    const TrialConfig& config() const noexcept { return cfg_; }
    const Codebook& codebook() const noexcept { return codebook_; }
    const std::optional<BoundReport>& bound() const noexcept { return bound_; }

    /// Deterministic in (config, trial_index).
    TrialResult run_trial(std::size_t trial_index) const
    {
        const std::uint64_t seed = substream_seed(cfg_.master_seed, trial_index);
        const SignalCube x = draw_class_member(cfg_.signal_class, substream_seed(seed, 0));
        const MaskCube masks = generate_masks(cfg_.mask_spec, x.num_frames(), x.num_pixels(),
                                              substream_seed(seed, 1));
        const Recovery rec = recover(x, masks, codebook_);

        TrialResult t;
        t.trial_index = trial_index;
        t.substream_seed = seed;
        t.empirical_distortion = rec.empirical_distortion;
        t.csp_objective = rec.csp_objective;
        t.compress_objective = rec.compress_objective;
        t.csp_index = rec.csp_index;
        if (bound_) {
            t.bound_value = bound_->distortion_bound;
            t.satisfied = t.empirical_distortion <= t.bound_value;
        }
        return t;
    }

    std::vector<TrialResult> run_all() const
    {
        std::vector<TrialResult> out(cfg_.num_trials);
        parallel_for(cfg_.num_trials, cfg_.threads,
                     [&](std::size_t i) { out[i] = run_trial(i); });
        return out;
    }

private:
    TrialConfig cfg_;
    Codebook codebook_;
    std::optional<BoundReport> bound_;
};

inline TrialResult run_trial(const TrialConfig& cfg, std::size_t trial_index)
{
    return Experiment(cfg).run_trial(trial_index);
}

inline double satisfaction_rate(const std::vector<TrialResult>& trials)
{
    if (trials.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const auto hits = std::count_if(trials.begin(), trials.end(),
                                    [](const TrialResult& t) { return t.satisfied; });
    return static_cast<double>(hits) / static_cast<double>(trials.size());
}

/// 3 * sqrt(q (1 - q) / trials).
inline double binomial_slack(double q, std::size_t trials)
{
    const double c = std::clamp(q, 0.0, 1.0);
    return 3.0 * std::sqrt(c * (1.0 - c) / static_cast<double>(trials));
}

struct VerifyResult {
    double satisfaction_rate = 0.0;
    double prob_lower_raw = 0.0;
    double prob_lower_clamped = 0.0;
    double slack = 0.0;
    bool pass = false;
    bool vacuous = false;
    BoundReport bound;
    std::vector<TrialResult> trials;
};

/// Runs every trial and checks the empirical bound-satisfaction rate against
/// the theorem's probability guarantee with a 3-SE binomial slack.
inline VerifyResult verify_bound_probability(const TrialConfig& cfg)
{
    if (cfg.num_trials < 100) {
        throw DomainError("verify_bound_probability: needs at least 100 trials");
    }
    const Experiment exp(cfg);
    VerifyResult v;
    v.bound = *exp.bound();
    v.trials = exp.run_all();
    v.satisfaction_rate = satisfaction_rate(v.trials);
    v.prob_lower_raw = v.bound.prob_lower_raw;
    v.prob_lower_clamped = v.bound.prob_lower_clamped();
    v.slack = binomial_slack(v.prob_lower_clamped, cfg.num_trials);
    v.vacuous = v.prob_lower_clamped == 0.0;
    v.pass = v.vacuous || v.satisfaction_rate >= v.prob_lower_clamped - v.slack;
    return v;
}

struct SweepPoint {
    double param = 0.0;
    std::optional<MarkovMaskSpec> markov;
    double mean_empirical = 0.0;
    double bound = std::numeric_limits<double>::quiet_NaN();
    double prob_lower_raw = std::numeric_limits<double>::quiet_NaN();
    double prob_lower_clamped = 0.0;
    double satisfaction_rate = std::numeric_limits<double>::quiet_NaN();
    bool applicable = true;
    bool vacuous = false;
    std::optional<double> theta1;
    std::optional<double> lambda_min;
    std::optional<double> lambda_max;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    double empirical_argmin = std::numeric_limits<double>::quiet_NaN();
    double bound_argmin = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> pstar_theory;
    bool argmin_consistent = true;   ///< bound_argmin within one grid step of pstar_theory

    std::vector<double> grid() const
    {
        std::vector<double> g;
        for (const auto& pt : points) {
            g.push_back(pt.param);
        }
        return g;
    }
    std::vector<double> bound_curve() const
    {
        std::vector<double> g;
        for (const auto& pt : points) {
            g.push_back(pt.bound);
        }
        return g;
    }
};

namespace detail {

inline SweepPoint run_sweep_point(const TrialConfig& cfg, double param)
{
    const Experiment exp(cfg, false);
    const auto trials = exp.run_all();
    SweepPoint pt;
    pt.param = param;
    double sum = 0.0;
    for (const auto& t : trials) {
        sum += t.empirical_distortion;
    }
    pt.mean_empirical = sum / static_cast<double>(trials.size());
    if (const auto& b = exp.bound()) {
        pt.bound = b->distortion_bound;
        pt.prob_lower_raw = b->prob_lower_raw;
        pt.prob_lower_clamped = b->prob_lower_clamped();
        pt.vacuous = pt.prob_lower_clamped == 0.0;
        pt.satisfaction_rate = satisfaction_rate(trials);
        pt.theta1 = b->theta1;
        pt.lambda_min = b->lambda_min;
        pt.lambda_max = b->lambda_max;
    } else {
        pt.applicable = false;
    }
    return pt;
}

inline void fill_argmins(SweepResult& r)
{
    double best_bound = std::numeric_limits<double>::infinity();
    double best_emp = std::numeric_limits<double>::infinity();
    for (const auto& pt : r.points) {
        if (pt.applicable && pt.bound < best_bound) {
            best_bound = pt.bound;
            r.bound_argmin = pt.param;
        }
        if (pt.mean_empirical < best_emp) {
            best_emp = pt.mean_empirical;
            r.empirical_argmin = pt.param;
        }
    }
}

} // namespace detail

/// Sweeps the Bernoulli probability p with the same signal draws at every
/// grid point. The mask alphabet comes from cfg.mask_spec when it is a
/// BernoulliMaskSpec, Binary01 otherwise.
inline SweepResult sweep_p(const TrialConfig& cfg, const std::vector<double>& p_grid)
{
    if (p_grid.empty()) {
        throw DomainError("sweep_p: empty grid");
    }
    for (double p : p_grid) {
        if (!(p > 0.0 && p < 1.0)) {
            throw DomainError("sweep_p: grid values must lie in (0, 1)");
        }
    }
    Alphabet alphabet = Alphabet::Binary01;
    if (const auto* bern = std::get_if<BernoulliMaskSpec>(&cfg.mask_spec)) {
        alphabet = bern->alphabet;
    }

    SweepResult r;
    for (double p : p_grid) {
        TrialConfig point_cfg = cfg;
        point_cfg.mask_spec = BernoulliMaskSpec{p, alphabet};
        r.points.push_back(detail::run_sweep_point(point_cfg, p));
    }
    detail::fill_argmins(r);

    if (alphabet == Alphabet::Binary01) {
        r.pstar_theory = thm1_pstar(cfg.bound_params).value;
        std::vector<double> sorted = p_grid;
        std::sort(sorted.begin(), sorted.end());
        double step = 0.0;
        for (std::size_t i = 1; i < sorted.size(); ++i) {
            step = std::max(step, sorted[i] - sorted[i - 1]);
        }
        r.argmin_consistent = sorted.size() == 1 ||
                              std::abs(r.bound_argmin - *r.pstar_theory) <= step * (1.0 + 1e-9);
    }
    return r;
}

/// Sweeps Markov mask parameters. Points carry theta1 (in-frame) or the
/// extreme eigenvalues of Lambda (out-of-frame). A point where Theorem 3 does
/// not apply still runs its trials but has applicable = false and no bound.
inline SweepResult sweep_markov(const TrialConfig& cfg, const std::vector<MarkovMaskSpec>& grid)
{
    if (grid.empty()) {
        throw DomainError("sweep_markov: empty grid");
    }
    SweepResult r;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid[k].validate();
        TrialConfig point_cfg = cfg;
        point_cfg.mask_spec = grid[k];
        auto pt = detail::run_sweep_point(point_cfg, static_cast<double>(k));
        pt.markov = grid[k];
        if (grid[k].orientation == Orientation::InFrame) {
            pt.theta1 = theta1_closed(grid[k].q0, grid[k].q1, cfg.bound_params.B);
        }
        r.points.push_back(pt);
    }
    detail::fill_argmins(r);
    return r;
}

struct ConcentrationRow {
    double t = 0.0;
    double empirical = 0.0;
    double theoretical = 0.0;
    double slack = 0.0;
    bool pass = false;
};

struct ConcentrationTable {
    std::string tail;   ///< "hoeffding" or "markov"
    double mean = 0.0;
    double theta1 = 0.0;
    double lipschitz = 0.0;
    std::size_t num_samples = 0;
    std::vector<ConcentrationRow> rows;
    bool pass = true;
};

/// Monte Carlo tail of |(1/n) sum_j U_j - E| against the matching bound, for a
/// fixed pair (x, c) drawn uniformly from the l-infinity ball.
/// Independent pixels (i.i.d. and out-of-frame models) use the two-sided
/// Hoeffding tail 2 exp(-2 n t^2 / (B^2 rho^2)^2); in-frame Markov masks use
/// the chain bound with sum deviation n t and c = 2 B rho^2.
inline ConcentrationTable concentration_check(const MaskSpec& model, std::size_t n, std::size_t B,
                                              double rho, const std::vector<double>& t_grid,
                                              std::size_t num_samples, std::uint64_t seed,
                                              unsigned threads = 1)
{
    if (num_samples < 10000) {
        throw DomainError("concentration_check: needs at least 10^4 samples");
    }
    if (n == 0 || B == 0 || !(rho > 0.0)) {
        throw DomainError("concentration_check: n, B and rho must be positive");
    }
    for (double t : t_grid) {
        if (!(t > 0.0)) {
            throw DomainError("concentration_check: t values must be positive");
        }
    }
    std::visit([](const auto& s) { s.validate(); }, model);

    // mu_bj = x_bj - c_bj with x, c uniform in [-rho/2, rho/2].
    std::vector<double> mu(B * n);
    {
        SplitMix64 gen(substream_seed(seed, 0));
        for (double& m : mu) {
            const double x = (gen.uniform() - 0.5) * rho;
            const double c = (gen.uniform() - 0.5) * rho;
            m = x - c;
        }
    }

    ConcentrationTable table;
    table.num_samples = num_samples;
    UjModel uj_model = UjModel::Iid01;
    double p = 0.5;
    std::optional<double> alpha_value;
    bool markov_tail = false;
    if (const auto* bern = std::get_if<BernoulliMaskSpec>(&model)) {
        p = bern->p;
        uj_model = bern->alphabet == Alphabet::Binary01 ? UjModel::Iid01 : UjModel::SignedPM1;
    } else {
        const auto& markov = std::get<MarkovMaskSpec>(model);
        p = stationary_p(markov);
        if (markov.orientation == Orientation::InFrame) {
            // Frames are independent, so each pixel's column has i.i.d. Bern(p) entries.
            markov_tail = true;
            table.theta1 = theta1_closed(markov.q0, markov.q1, B);
            if (!(table.theta1 < 1.0)) {
                throw DomainError("concentration_check: theta1 = 1 gives no concentration");
            }
        } else {
            uj_model = UjModel::OutFrameMarkov;
            alpha_value = alpha(markov);
        }
    }
    table.tail = markov_tail ? "markov" : "hoeffding";
    table.lipschitz = lipschitz_constant(B, rho);

    std::vector<double> column(B);
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t b = 0; b < B; ++b) {
            column[b] = mu[b * n + j];
        }
        mean += expected_Uj(uj_model, p, alpha_value, column);
    }
    mean /= static_cast<double>(n);
    table.mean = mean;

    std::vector<double> deviation(num_samples);
    parallel_for(num_samples, threads, [&](std::size_t s) {
        const MaskCube masks = generate_masks(model, B, n, substream_seed(seed, s + 1));
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double v = 0.0;
            for (std::size_t b = 0; b < B; ++b) {
                v += masks.at(b, j) * mu[b * n + j];
            }
            total += v * v;
        }
        deviation[s] = std::abs(total / static_cast<double>(n) - mean);
    });

    const double range = uj_upper_bound(B, rho);
    const double nd = static_cast<double>(n);
    for (double t : t_grid) {
        ConcentrationRow row;
        row.t = t;
        const auto hits = std::count_if(deviation.begin(), deviation.end(),
                                        [t](double d) { return d >= t; });
        row.empirical = static_cast<double>(hits) / static_cast<double>(num_samples);
        row.theoretical = markov_tail
                              ? markov_concentration_tail(n, table.lipschitz, table.theta1, nd * t)
                              : 2.0 * hoeffding_tail(n, B, t * static_cast<double>(B) / range);
        row.slack = binomial_slack(row.theoretical, num_samples);
        row.pass = row.empirical <= row.theoretical + row.slack;
        table.pass = table.pass && row.pass;
        table.rows.push_back(row);
    }
    return table;
}

} // namespace scimask

#endif // SCIMASK_EXPERIMENTS_HPP
