#ifndef SCIMASK_IO_HPP
#define SCIMASK_IO_HPP

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "codebook.hpp"
#include "core.hpp"
#include "experiments.hpp"
#include "maskgen.hpp"
#include "theory.hpp"

namespace scimask::io {

using nlohmann::json;

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// JSON has no inf/nan; they are written as strings.
inline json number(double v)
{
    if (std::isfinite(v)) {
        return v;
    }
    return format_double(v);
}

inline double read_number(const json& j)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw DomainError("expected a number, got \"" + s + "\"");
    }
    return j.get<double>();
}

inline json to_json(const SignalCube& x)
{
    json frames = json::array();
    for (std::size_t b = 0; b < x.num_frames(); ++b) {
        const auto f = x.frame(b);
        frames.push_back(std::vector<double>(f.begin(), f.end()));
    }
    json j{{"B", x.num_frames()}, {"n", x.num_pixels()}, {"rho", x.rho()}, {"frames", frames}};
    if (x.shape()) {
        j["n1"] = x.shape()->rows;
        j["n2"] = x.shape()->cols;
    }
    return j;
}

inline SignalCube signal_from_json(const json& j)
{
    const auto frames = j.at("frames").get<std::vector<std::vector<double>>>();
    std::optional<FrameShape> shape;
    if (j.contains("n1") && j.contains("n2")) {
        shape = FrameShape{j.at("n1").get<std::size_t>(), j.at("n2").get<std::size_t>()};
    }
    auto x = SignalCube::from_frames(frames, j.at("rho").get<double>(), shape);
    if (x.num_frames() != j.at("B").get<std::size_t>() ||
        x.num_pixels() != j.at("n").get<std::size_t>()) {
        throw ShapeError("SignalCube JSON: B or n disagrees with frames");
    }
    return x;
}

inline json to_json(const MaskCube& m)
{
    json frames = json::array();
    for (std::size_t b = 0; b < m.num_frames(); ++b) {
        const auto f = m.frame(b);
        std::vector<int> row(f.begin(), f.end());
        frames.push_back(row);
    }
    return {{"B", m.num_frames()},
            {"n", m.num_pixels()},
            {"alphabet", to_string(m.alphabet())},
            {"frames", frames}};
}

inline Alphabet alphabet_from_string(const std::string& s)
{
    if (s == "binary01") return Alphabet::Binary01;
    if (s == "signed") return Alphabet::SignedPM1;
    throw DomainError("unknown alphabet \"" + s + "\"");
}

inline MaskCube mask_from_json(const json& j)
{
    const auto frames = j.at("frames").get<std::vector<std::vector<int>>>();
    const auto B = j.at("B").get<std::size_t>();
    const auto n = j.at("n").get<std::size_t>();
    if (frames.size() != B) {
        throw ShapeError("MaskCube JSON: B disagrees with frames");
    }
    std::vector<std::int8_t> values;
    values.reserve(B * n);
    for (const auto& f : frames) {
        if (f.size() != n) {
            throw ShapeError("MaskCube JSON: n disagrees with a frame");
        }
        for (int v : f) {
            values.push_back(static_cast<std::int8_t>(v));
        }
    }
    return MaskCube(B, n, alphabet_from_string(j.value("alphabet", "binary01")), std::move(values));
}

inline json to_json(const Measurement& m)
{
    return {{"n", m.size()}, {"y", m.y}};
}

inline Measurement measurement_from_json(const json& j)
{
    Measurement m{j.at("y").get<std::vector<double>>(), false};
    if (m.size() != j.at("n").get<std::size_t>()) {
        throw ShapeError("Measurement JSON: n disagrees with y");
    }
    return m;
}

inline json to_json(const Codebook& cb)
{
    json words = json::array();
    for (const auto& c : cb.codewords()) {
        std::vector<double> v(c.values().begin(), c.values().end());
        words.push_back(v);
    }
    return {{"B", cb.num_frames()}, {"n", cb.num_pixels()}, {"rho", cb[0].rho()},
            {"rate_r", cb.rate()},  {"delta", cb.certified_delta()}, {"codewords", words}};
}

/// Codewords are flat vectors of length nB (frame-major). rho defaults to
/// twice the largest magnitude when absent.
inline Codebook codebook_from_json(const json& j)
{
    const auto B = j.at("B").get<std::size_t>();
    const auto n = j.at("n").get<std::size_t>();
    const auto words = j.at("codewords").get<std::vector<std::vector<double>>>();
    double rho = 0.0;
    if (j.contains("rho")) {
        rho = j.at("rho").get<double>();
    } else {
        for (const auto& w : words) {
            for (double v : w) {
                rho = std::max(rho, 2.0 * std::abs(v));
            }
        }
        if (rho == 0.0) {
            rho = 1.0;
        }
    }
    std::vector<SignalCube> cws;
    cws.reserve(words.size());
    for (const auto& w : words) {
        cws.emplace_back(B, n, rho, w);
    }
    return Codebook(std::move(cws), j.at("rate_r").get<double>(), j.at("delta").get<double>());
}

inline json to_json(const MaskSpec& spec)
{
    if (const auto* bern = std::get_if<BernoulliMaskSpec>(&spec)) {
        return {{"model", "iid"}, {"p", bern->p}, {"alphabet", to_string(bern->alphabet)}};
    }
    const auto& m = std::get<MarkovMaskSpec>(spec);
    return {{"model", m.orientation == Orientation::InFrame ? "inframe" : "outframe"},
            {"q0", m.q0},
            {"q1", m.q1},
            {"alphabet", "binary01"}};
}

inline MaskSpec mask_spec_from_json(const json& j)
{
    const auto model = j.at("model").get<std::string>();
    const auto alphabet = alphabet_from_string(j.value("alphabet", "binary01"));
    if (model == "iid") {
        BernoulliMaskSpec s{j.at("p").get<double>(), alphabet};
        s.validate();
        return s;
    }
    if (model != "inframe" && model != "outframe") {
        throw DomainError("unknown mask model \"" + model + "\"");
    }
    if (alphabet != Alphabet::Binary01) {
        throw DomainError("Markov masks are binary01 only");
    }
    MarkovMaskSpec s{j.at("q0").get<double>(), j.at("q1").get<double>(),
                     model == "inframe" ? Orientation::InFrame : Orientation::OutOfFrame};
    s.validate();
    return s;
}

inline json to_json(const BoundParams& p)
{
    return {{"n", p.n},         {"B", p.B},     {"rate_r", p.rate_r},
            {"delta", p.delta}, {"rho", p.rho}, {"epsilon", p.epsilon}};
}

inline json to_json(const BoundReport& r)
{
    json j{{"theorem", to_string(r.theorem)},
           {"params", to_json(r.params)},
           {"p", r.p},
           {"distortion_bound", number(r.distortion_bound)},
           {"infinite", r.infinite},
           {"prob_lower_raw", number(r.prob_lower_raw)},
           {"prob_lower_clamped", r.prob_lower_clamped()}};
    if (r.theta1) j["theta1"] = *r.theta1;
    if (r.alpha) j["alpha"] = *r.alpha;
    if (r.lambda_min) j["lambda_min"] = *r.lambda_min;
    if (r.lambda_max) j["lambda_max"] = *r.lambda_max;
    if (!r.advisories.empty()) j["advisories"] = r.advisories;
    return j;
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return json::parse(in);
}

// CSV, LF line endings.

inline void write_bound_sweep_csv(std::ostream& out, const std::vector<double>& params,
                                  const std::vector<BoundReport>& reports)
{
    out << "param,distortion_bound,prob_lower_raw,prob_lower_clamped\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        out << format_double(params[i]) << ',' << format_double(reports[i].distortion_bound)
            << ',' << format_double(reports[i].prob_lower_raw) << ','
            << format_double(reports[i].prob_lower_clamped()) << '\n';
    }
}

inline void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& trials)
{
    out << "trial,seed,empirical_distortion,bound,satisfied,objective\n";
    for (const auto& t : trials) {
        out << t.trial_index << ',' << t.substream_seed << ','
            << format_double(t.empirical_distortion) << ',' << format_double(t.bound_value) << ','
            << (t.satisfied ? 1 : 0) << ',' << format_double(t.csp_objective) << '\n';
    }
}

inline std::string optional_cell(const std::optional<double>& v)
{
    return v ? format_double(*v) : "";
}

inline void write_sweep_p_csv(std::ostream& out, const SweepResult& r)
{
    out << "param,mean_empirical,bound,satisfaction_rate,prob_lower_raw,prob_lower_clamped\n";
    for (const auto& pt : r.points) {
        out << format_double(pt.param) << ',' << format_double(pt.mean_empirical) << ','
            << format_double(pt.bound) << ',' << format_double(pt.satisfaction_rate) << ','
            << format_double(pt.prob_lower_raw) << ',' << format_double(pt.prob_lower_clamped)
            << '\n';
    }
}

inline void write_sweep_markov_csv(std::ostream& out, const SweepResult& r)
{
    out << "param,q0,q1,alpha,stationary_p,theta1,lambda_min,lambda_max,applicable,"
           "mean_empirical,bound,satisfaction_rate,prob_lower_raw,prob_lower_clamped\n";
    for (const auto& pt : r.points) {
        const auto& m = *pt.markov;
        out << format_double(pt.param) << ',' << format_double(m.q0) << ','
            << format_double(m.q1) << ',' << format_double(1.0 - m.q0 - m.q1) << ','
            << format_double(m.q0 / (m.q0 + m.q1)) << ',' << optional_cell(pt.theta1) << ','
            << optional_cell(pt.lambda_min) << ',' << optional_cell(pt.lambda_max) << ','
            << (pt.applicable ? 1 : 0) << ',' << format_double(pt.mean_empirical) << ','
            << format_double(pt.bound) << ',' << format_double(pt.satisfaction_rate) << ','
            << format_double(pt.prob_lower_raw) << ',' << format_double(pt.prob_lower_clamped)
            << '\n';
    }
}

inline json sweep_summary(const SweepResult& r)
{
    return {{"argmin_bound", number(r.bound_argmin)},
            {"argmin_empirical", number(r.empirical_argmin)},
            {"pstar_theory", r.pstar_theory ? json(*r.pstar_theory) : json(nullptr)},
            {"argmin_consistent", r.argmin_consistent}};
}

struct Fig2Row {
    double q0;
    std::size_t B;
    double q1;
    double theta1;
};

/// theta1 as a function of q1, one curve per (q0, B).
inline std::vector<Fig2Row> fig2_rows(const std::vector<double>& q0_list,
                                      const std::vector<std::size_t>& B_list,
                                      const std::vector<double>& q1_grid)
{
    if (q0_list.empty() || B_list.empty() || q1_grid.empty()) {
        throw DomainError("fig2: grids must be nonempty");
    }
    std::vector<Fig2Row> rows;
    for (double q0 : q0_list) {
        for (std::size_t B : B_list) {
            for (double q1 : q1_grid) {
                rows.push_back({q0, B, q1, theta1_closed(q0, q1, B)});
            }
        }
    }
    return rows;
}

inline void write_fig2_csv(std::ostream& out, const std::vector<Fig2Row>& rows)
{
    out << "q0,B,q1,theta1\n";
    for (const auto& r : rows) {
        out << format_double(r.q0) << ',' << r.B << ',' << format_double(r.q1) << ','
            << format_double(r.theta1) << '\n';
    }
}

inline void write_concentration_csv(std::ostream& out, const ConcentrationTable& t)
{
    out << "t,empirical,theoretical,slack,pass\n";
    for (const auto& r : t.rows) {
        out << format_double(r.t) << ',' << format_double(r.empirical) << ','
            << format_double(r.theoretical) << ',' << format_double(r.slack) << ','
            << (r.pass ? 1 : 0) << '\n';
    }
}

} // namespace scimask::io

#endif // SCIMASK_IO_HPP
