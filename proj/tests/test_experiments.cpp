#include <gtest/gtest.h>

#include "scimask.hpp"

using namespace scimask;

namespace {

TrialConfig small_config(double radius, MaskSpec spec, std::size_t trials = 40, std::size_t n = 64)
{
    TrialConfig cfg;
    cfg.signal_class.anchors = random_anchors(8, 2, n, 1.0, 77);
    cfg.signal_class.perturbation_radius = radius;
    cfg.bound_params = bound_params_for(build_anchor_codebook(cfg.signal_class), 0.2);
    cfg.mask_spec = spec;
    cfg.num_trials = trials;
    cfg.master_seed = 1234;
    return cfg;
}

}  // namespace

TEST(Trial, ExactCodewordCertificate)
{
    for (MaskSpec spec : {MaskSpec{BernoulliMaskSpec{0.3, Alphabet::Binary01}},
                          MaskSpec{BernoulliMaskSpec{0.6, Alphabet::SignedPM1}},
                          MaskSpec{MarkovMaskSpec{0.2, 0.3, Orientation::InFrame}},
                          MaskSpec{MarkovMaskSpec{0.2, 0.3, Orientation::OutOfFrame}}}) {
        const auto cfg = small_config(0.0, spec, 10);
        const Experiment exp(cfg);
        for (std::size_t i = 0; i < 10; ++i) {
            const auto t = exp.run_trial(i);
            EXPECT_EQ(t.csp_objective, 0.0);
            EXPECT_EQ(t.empirical_distortion, 0.0);
            EXPECT_TRUE(t.satisfied);
        }
    }
}

TEST(Trial, IdentitySensingRecoversNearestCodeword)
{
    SignalClass cls;
    cls.anchors = random_anchors(8, 1, 32, 1.0, 3);
    cls.perturbation_radius = 0.4;
    const auto cb = build_anchor_codebook(cls);
    const MaskCube ones(1, 32, Alphabet::Binary01, std::vector<std::int8_t>(32, 1));
    for (std::uint64_t s = 0; s < 30; ++s) {
        const auto x = draw_class_member(cls, s);
        const auto r = recover(x, ones, cb);
        EXPECT_EQ(r.csp_index, r.compress_index);
        EXPECT_LE(r.empirical_distortion, cb.certified_delta() / 32 + 1e-15);
    }
}

TEST(Trial, TinyInstanceMatchesHandEnumeration)
{
    TrialConfig cfg;
    cfg.signal_class.anchors = random_anchors(4, 2, 8, 1.0, 5);
    cfg.signal_class.perturbation_radius = 0.5;
    cfg.bound_params = bound_params_for(build_anchor_codebook(cfg.signal_class), 0.2);
    cfg.mask_spec = BernoulliMaskSpec{0.5, Alphabet::Binary01};
    cfg.num_trials = 20;
    cfg.master_seed = 99;
    const Experiment exp(cfg);
    for (std::size_t i = 0; i < cfg.num_trials; ++i) {
        const auto t = exp.run_trial(i);
        // Documented seeding: trial seed s, signal from (s, 0), masks from (s, 1).
        const auto x = draw_class_member(cfg.signal_class, substream_seed(t.substream_seed, 0));
        const auto d = generate_masks(cfg.mask_spec, 2, 8, substream_seed(t.substream_seed, 1));
        EXPECT_EQ(t.substream_seed, substream_seed(cfg.master_seed, i));
        double y[8] = {};
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t j = 0; j < 8; ++j) y[j] += d.at(b, j) * x.at(b, j);
        std::size_t best = 0;
        double best_obj = INFINITY;
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& c = cfg.signal_class.anchors[k];
            double obj = 0;
            for (std::size_t j = 0; j < 8; ++j) {
                const double r = y[j] - d.at(0, j) * c.at(0, j) - d.at(1, j) * c.at(1, j);
                obj += r * r;
            }
            if (obj < best_obj) {
                best_obj = obj;
                best = k;
            }
        }
        EXPECT_EQ(t.csp_index, best);
        EXPECT_NEAR(t.csp_objective, best_obj, 1e-14);
        double dist = 0;
        for (std::size_t k = 0; k < 16; ++k) {
            const double e = x.values()[k] - cfg.signal_class.anchors[best].values()[k];
            dist += e * e;
        }
        EXPECT_NEAR(t.empirical_distortion, dist / 16, 1e-15);
        EXPECT_LE(t.csp_objective, t.compress_objective);
    }
}

TEST(Trial, DeterministicAcrossThreadCounts)
{
    auto cfg = small_config(1.0, MarkovMaskSpec{0.3, 0.2, Orientation::OutOfFrame}, 64);
    cfg.threads = 1;
    const auto a = Experiment(cfg).run_all();
    cfg.threads = 8;
    const auto b = Experiment(cfg).run_all();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].substream_seed, b[i].substream_seed);
        EXPECT_EQ(a[i].empirical_distortion, b[i].empirical_distortion);
        EXPECT_EQ(a[i].csp_objective, b[i].csp_objective);
        EXPECT_EQ(a[i].csp_index, b[i].csp_index);
    }
    EXPECT_EQ(run_trial(cfg, 17).empirical_distortion, a[17].empirical_distortion);
}

TEST(Trial, ConfigValidation)
{
    auto cfg = small_config(0.5, BernoulliMaskSpec{0.5, Alphabet::Binary01});
    auto bad = cfg;
    bad.bound_params.delta = 0.1;   // certified delta is 0.25
    EXPECT_THROW(Experiment{bad}, DomainError);
    bad = cfg;
    bad.bound_params.rate_r = 1.0;   // 8 codewords > 2^(2*1)
    EXPECT_THROW(Experiment{bad}, DomainError);
    bad = cfg;
    bad.bound_params.n = 65;
    EXPECT_THROW(Experiment{bad}, ShapeError);
    bad = cfg;
    bad.mask_spec = BernoulliMaskSpec{0.0, Alphabet::Binary01};
    EXPECT_THROW(Experiment{bad}, DomainError);
    bad = cfg;
    bad.mask_spec = MarkovMaskSpec{0.7, 0.6, Orientation::OutOfFrame};   // alpha < 0
    EXPECT_THROW(Experiment{bad}, InapplicableError);
    EXPECT_NO_THROW(Experiment(bad, false));
    EXPECT_FALSE(Experiment(bad, false).bound().has_value());
}

TEST(Trial, BoundMatchesTheoremForModel)
{
    const auto cfg = small_config(0.5, MarkovMaskSpec{0.2, 0.3, Orientation::InFrame});
    const Experiment exp(cfg);
    EXPECT_EQ(exp.bound()->theorem, TheoremTag::Thm2);
    EXPECT_EQ(exp.bound()->distortion_bound,
              thm2_bound({0.2, 0.3, Orientation::InFrame}, cfg.bound_params).distortion_bound);
    const auto out = small_config(0.5, MarkovMaskSpec{0.2, 0.3, Orientation::OutOfFrame});
    EXPECT_EQ(Experiment(out).bound()->theorem, TheoremTag::Thm3);
    const auto sgn = small_config(0.5, BernoulliMaskSpec{0.3, Alphabet::SignedPM1});
    EXPECT_EQ(Experiment(sgn).bound()->theorem, TheoremTag::Cor1);
}

TEST(Verify, VacuousGuaranteePassesWithFlag)
{
    const auto cfg = small_config(0.5, BernoulliMaskSpec{0.5, Alphabet::Binary01}, 100);
    const auto v = verify_bound_probability(cfg);
    EXPECT_EQ(v.prob_lower_clamped, 0.0);
    EXPECT_LT(v.prob_lower_raw, 0.0);
    EXPECT_TRUE(v.vacuous);
    EXPECT_TRUE(v.pass);
    EXPECT_EQ(v.trials.size(), 100u);
    auto few = cfg;
    few.num_trials = 99;
    EXPECT_THROW(verify_bound_probability(few), DomainError);
}

TEST(Verify, NonVacuousSmallInstance)
{
    auto cfg = small_config(0.5, BernoulliMaskSpec{0.5, Alphabet::Binary01}, 100, 8192);
    cfg.signal_class.anchors = random_anchors(4, 2, 8192, 1.0, 1);
    cfg.bound_params = bound_params_for(build_anchor_codebook(cfg.signal_class), 0.2);
    const auto v = verify_bound_probability(cfg);
    EXPECT_GT(v.prob_lower_clamped, 0.99);
    EXPECT_FALSE(v.vacuous);
    EXPECT_TRUE(v.pass);
    EXPECT_NEAR(v.slack, binomial_slack(v.prob_lower_clamped, 100), 0.0);
}

TEST(Sweep, SinglePointEqualsVerifyPath)
{
    const auto cfg = small_config(0.8, BernoulliMaskSpec{0.5, Alphabet::Binary01}, 100);
    const auto r = sweep_p(cfg, {0.5});
    const auto v = verify_bound_probability(cfg);
    ASSERT_EQ(r.points.size(), 1u);
    double mean = 0;
    for (const auto& t : v.trials) mean += t.empirical_distortion;
    EXPECT_DOUBLE_EQ(r.points[0].mean_empirical, mean / 100);
    EXPECT_EQ(r.points[0].satisfaction_rate, v.satisfaction_rate);
    EXPECT_EQ(r.points[0].bound, v.bound.distortion_bound);
    EXPECT_EQ(r.points[0].prob_lower_raw, v.prob_lower_raw);
}

TEST(Sweep, BoundCurveMatchesTheoryPointwise)
{
    auto cfg = small_config(0.8, BernoulliMaskSpec{0.5, Alphabet::Binary01}, 5);
    cfg.bound_params.delta = 50.0;   // p* ~ 0.31
    std::vector<double> grid;
    for (int k = 1; k < 20; ++k) grid.push_back(k / 20.0);
    const auto r = sweep_p(cfg, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR(r.points[i].bound, thm1_bound(grid[i], cfg.bound_params).distortion_bound, 1e-15);
    }
    EXPECT_LT(r.bound_argmin, 0.5);
    EXPECT_TRUE(r.argmin_consistent);
    ASSERT_TRUE(r.pstar_theory);
    EXPECT_EQ(*r.pstar_theory, thm1_pstar(cfg.bound_params).value);
    EXPECT_THROW(sweep_p(cfg, {0.0, 0.5}), DomainError);
    EXPECT_THROW(sweep_p(cfg, {}), DomainError);
}

TEST(Sweep, MarkovLines)
{
    const auto cfg = small_config(0.8, MarkovMaskSpec{0.2, 0.8, Orientation::InFrame}, 5);
    std::vector<MarkovMaskSpec> line;
    for (int k = 1; k < 10; ++k) line.push_back({k / 10.0, 1.0 - k / 10.0, Orientation::InFrame});
    const auto r = sweep_markov(cfg, line);
    for (const auto& pt : r.points) {
        ASSERT_TRUE(pt.theta1);
        EXPECT_EQ(*pt.theta1, 0.0);
    }

    const std::vector<MarkovMaskSpec> out = {{0.4, 0.6, Orientation::OutOfFrame},
                                             {0.2, 0.3, Orientation::OutOfFrame},
                                             {0.7, 0.6, Orientation::OutOfFrame}};
    const auto ro = sweep_markov(cfg, out);
    EXPECT_NEAR(ro.points[0].bound, thm1_bound(0.4, cfg.bound_params).distortion_bound, 1e-15);
    ASSERT_TRUE(ro.points[1].lambda_min);
    EXPECT_GT(*ro.points[1].lambda_min, 0.0);
    EXPECT_FALSE(ro.points[2].applicable);
    EXPECT_TRUE(std::isnan(ro.points[2].bound));
}

TEST(Concentration, BoundedVariableAndTails)
{
    const std::vector<double> t_grid = {0.02, 0.05, 0.1, 0.3, 5.0};
    const auto iid = concentration_check(BernoulliMaskSpec{0.4, Alphabet::Binary01}, 256, 2, 1.0,
                                         t_grid, 10000, 3, 4);
    EXPECT_EQ(iid.tail, "hoeffding");
    EXPECT_TRUE(iid.pass);
    EXPECT_EQ(iid.rows.back().empirical, 0.0);   // t > B^2 rho^2
    const auto mk = concentration_check(MarkovMaskSpec{0.3, 0.5, Orientation::InFrame}, 256, 2, 1.0,
                                        t_grid, 10000, 4, 4);
    EXPECT_EQ(mk.tail, "markov");
    EXPECT_NEAR(mk.theta1, theta1_closed(0.3, 0.5, 2), 0.0);
    EXPECT_TRUE(mk.pass);
    EXPECT_EQ(mk.lipschitz, 4.0);
    EXPECT_THROW(concentration_check(BernoulliMaskSpec{}, 16, 2, 1.0, t_grid, 9999, 1), DomainError);

    const auto again = concentration_check(MarkovMaskSpec{0.3, 0.5, Orientation::InFrame}, 256, 2, 1.0,
                                           t_grid, 10000, 4, 1);
    for (std::size_t i = 0; i < t_grid.size(); ++i) EXPECT_EQ(again.rows[i].empirical, mk.rows[i].empirical);
}
