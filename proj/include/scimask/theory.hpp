#ifndef SCIMASK_THEORY_HPP
#define SCIMASK_THEORY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "maskgen.hpp"

namespace scimask {

/// Parameters shared by every distortion bound.
struct BoundParams {
    std::size_t n = 1;      ///< pixels per frame
    std::size_t B = 1;      ///< frames
    double rate_r = 0.0;    ///< code rate, |C| <= 2^(B r)
    double delta = 0.0;     ///< code distortion
    double rho = 1.0;       ///< l-infinity budget, |x| <= rho/2
    double epsilon = 0.1;   ///< free parameter of the concentration step

    void validate() const
    {
        if (n == 0 || B == 0) {
            throw DomainError("BoundParams: n and B must be positive");
        }
        if (!(rate_r >= 0.0) || !std::isfinite(rate_r)) {
            throw DomainError("BoundParams: rate must be finite and nonnegative");
        }
        if (!(delta >= 0.0) || !std::isfinite(delta)) {
            throw DomainError("BoundParams: delta must be finite and nonnegative");
        }
        if (!(rho > 0.0) || !std::isfinite(rho)) {
            throw DomainError("BoundParams: rho must be positive");
        }
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
            throw DomainError("BoundParams: epsilon must be positive");
        }
    }
};

enum class TheoremTag { Thm1, Cor1, Thm2, Thm3, Cor2PaperLiteral, Cor2ProofDerived };

inline const char* to_string(TheoremTag t) noexcept
{
    switch (t) {
    case TheoremTag::Thm1: return "thm1";
    case TheoremTag::Cor1: return "cor1";
    case TheoremTag::Thm2: return "thm2";
    case TheoremTag::Thm3: return "thm3";
    case TheoremTag::Cor2PaperLiteral: return "cor2-paper";
    case TheoremTag::Cor2ProofDerived: return "cor2-proof";
    }
    return "unknown";
}

/// Distortion upper bound on (1/nB)||x - xhat||^2 and the probability with
/// which it holds. The raw probability may be negative (vacuous guarantee).
struct BoundReport {
    TheoremTag theorem = TheoremTag::Thm1;
    BoundParams params;
    double p = 0.5;
    double distortion_bound = 0.0;
    bool infinite = false;
    double prob_lower_raw = 0.0;
    std::optional<double> theta1;
    std::optional<double> alpha;
    std::optional<double> lambda_min;
    std::optional<double> lambda_max;
    std::vector<std::string> advisories;

    double prob_lower_clamped() const noexcept
    {
        if (std::isnan(prob_lower_raw)) {
            return 0.0;
        }
        return std::clamp(prob_lower_raw, 0.0, 1.0);
    }
};

namespace detail {

// 1 - exp(log_factor - exponent), accurate near 1.
inline double one_minus_scaled_exp(double log_factor, double exponent)
{
    return -std::expm1(log_factor - exponent);
}

inline void check_p(double p)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("mask probability p must lie in [0, 1]");
    }
}

inline BoundReport start_report(TheoremTag tag, const BoundParams& params, double p)
{
    params.validate();
    check_p(p);
    BoundReport r;
    r.theorem = tag;
    r.params = params;
    r.p = p;
    if (params.epsilon >= 16.0 / 3.0) {
        r.advisories.emplace_back("epsilon >= 16/3, outside the range assumed by the proof");
    }
    return r;
}

inline void mark_infinite(BoundReport& r)
{
    r.infinite = true;
    r.distortion_bound = std::numeric_limits<double>::infinity();
}

inline double nb(const BoundParams& params)
{
    return static_cast<double>(params.n) * static_cast<double>(params.B);
}

// 1 - 2^(Br+1) exp(-n eps^2 / (2 B^2)).
inline double iid_probability(const BoundParams& params)
{
    const double b = static_cast<double>(params.B);
    const double log_factor = (b * params.rate_r + 1.0) * std::log(2.0);
    const double exponent = static_cast<double>(params.n) * params.epsilon * params.epsilon /
                            (2.0 * b * b);
    return one_minus_scaled_exp(log_factor, exponent);
}

} // namespace detail

/// Theorem 1 (i.i.d. Bern(p) masks):
/// (1 + Bp/(1-p)) delta/(nB) + rho^2 eps/(p - p^2), with probability at least
/// 1 - 2^(Br+1) exp(-n eps^2/(2B^2)).
inline BoundReport thm1_bound(double p, const BoundParams& params)
{
    auto r = detail::start_report(TheoremTag::Thm1, params, p);
    r.prob_lower_raw = detail::iid_probability(params);
    if (p == 0.0 || p == 1.0) {
        detail::mark_infinite(r);
        return r;
    }
    const double b = static_cast<double>(params.B);
    r.distortion_bound = (1.0 + b * p / (1.0 - p)) * params.delta / detail::nb(params) +
                         params.rho * params.rho * params.epsilon / (p * (1.0 - p));
    return r;
}

enum class PStarMode {
    /// Root of the derivative of thm1_bound: (delta/n) p^2 + 2 eps rho^2 p - eps rho^2.
    BoundConsistent,
    /// The printed stationarity condition, with delta*B/n as the quadratic coefficient.
    PaperLiteral,
};

struct PStar {
    double value = 0.5;
    bool degenerate = false;   ///< delta = 0: the minimizer is exactly 1/2
};

/// Minimizer of the Theorem 1 bound over p. Always in (0, 1/2) when delta > 0.
inline PStar thm1_pstar(const BoundParams& params, PStarMode mode = PStarMode::BoundConsistent)
{
    params.validate();
    double a = params.delta / static_cast<double>(params.n);
    if (mode == PStarMode::PaperLiteral) {
        a *= static_cast<double>(params.B);
    }
    const double b = params.epsilon * params.rho * params.rho;
    // (-b + sqrt(b^2 + a b)) / a, rewritten to stay finite as a -> 0.
    return {b / (b + std::sqrt(b * b + a * b)), params.delta == 0.0};
}

/// Corollary 1 (i.i.d. +/-1 masks with P(+1) = p):
/// [4s(1-B) + B]/(4s) delta/(nB) + rho^2 eps/(4s), s = p - p^2.
inline BoundReport cor1_bound(double p, const BoundParams& params)
{
    auto r = detail::start_report(TheoremTag::Cor1, params, p);
    r.prob_lower_raw = detail::iid_probability(params);
    if (p == 0.0 || p == 1.0) {
        detail::mark_infinite(r);
        return r;
    }
    // Depends on p only through p(1-p); folding onto [0, 1/2] makes the
    // p <-> 1-p symmetry exact whenever 1-p is representable.
    const double m = p <= 0.5 ? p : 1.0 - p;
    const double four_s = 4.0 * m * (1.0 - m);
    const double b = static_cast<double>(params.B);
    r.distortion_bound = (four_s * (1.0 - b) + b) / four_s * params.delta / detail::nb(params) +
                         params.rho * params.rho * params.epsilon / four_s;
    return r;
}

namespace detail {

inline double log_choose(std::size_t n, std::size_t k)
{
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

// k * log(x) with 0 * log(0) = 0.
inline double log_pow(double x, std::size_t k)
{
    return k == 0 ? 0.0 : static_cast<double>(k) * std::log(x);
}

} // namespace detail

/// Contraction coefficient of the frame-vector chain: TV distance between the
/// next-state laws given all-zeros and given all-ones,
/// (1/2) sum_k C(B,k) |(1-q0)^k q0^(B-k) - q1^k (1-q1)^(B-k)|.
inline double theta1_closed(double q0, double q1, std::size_t B)
{
    if (!(q0 >= 0.0 && q0 <= 1.0) || !(q1 >= 0.0 && q1 <= 1.0)) {
        throw DomainError("theta1_closed: q0 and q1 must lie in [0, 1]");
    }
    if (B == 0) {
        throw DomainError("theta1_closed: B must be positive");
    }
    if (q0 == 1.0 - q1 || 1.0 - q0 == q1) {
        return 0.0;   // identical conditionals
    }
    double sum = 0.0;
    for (std::size_t k = 0; k <= B; ++k) {
        const double lc = detail::log_choose(B, k);
        const double from_zeros = std::exp(lc + detail::log_pow(1.0 - q0, k) +
                                           detail::log_pow(q0, B - k));
        const double from_ones = std::exp(lc + detail::log_pow(q1, k) +
                                          detail::log_pow(1.0 - q1, B - k));
        sum += std::abs(from_zeros - from_ones);
    }
    return std::min(1.0, 0.5 * sum);
}

struct Theta1BruteForce {
    double tv_at_extremes = 0.0;
    double sup_over_all_pairs = 0.0;
};

/// Enumerates outcomes instead of using the binomial grouping.
/// tv_at_extremes conditions on (0_B, 1_B) and sums over all 2^B outcomes.
/// sup_over_all_pairs ranges over every conditioning pair; coordinates where
/// the pair agrees contribute identical factors and drop out of the TV, so a
/// pair is characterized by m differing coordinates of which j are flipped
/// (1 -> 0 rather than 0 -> 1), and each (m, j) class is enumerated over 2^m
/// outcomes.
inline Theta1BruteForce theta1_bruteforce(double q0, double q1, std::size_t B)
{
    if (!(q0 >= 0.0 && q0 <= 1.0) || !(q1 >= 0.0 && q1 <= 1.0)) {
        throw DomainError("theta1_bruteforce: q0 and q1 must lie in [0, 1]");
    }
    if (B == 0 || B > 20) {
        throw DomainError("theta1_bruteforce: B must lie in [1, 20]");
    }
    // P(next = 1 | current = s)
    const double one_given[2] = {q0, 1.0 - q1};

    // TV between prod_i K(.|a_i) and prod_i K(.|b_i) over m coordinates where
    // a_i = 0, b_i = 1 for i < m - j and a_i = 1, b_i = 0 otherwise.
    auto tv_class = [&](std::size_t m, std::size_t j) {
        double total = 0.0;
        const std::uint64_t outcomes = std::uint64_t{1} << m;
        for (std::uint64_t o = 0; o < outcomes; ++o) {
            double pa = 1.0;
            double pb = 1.0;
            for (std::size_t i = 0; i < m; ++i) {
                const int a = i < m - j ? 0 : 1;
                const bool bit = (o >> i) & 1U;
                pa *= bit ? one_given[a] : 1.0 - one_given[a];
                pb *= bit ? one_given[1 - a] : 1.0 - one_given[1 - a];
            }
            total += std::abs(pa - pb);
        }
        return 0.5 * total;
    };

    Theta1BruteForce out;
    out.tv_at_extremes = tv_class(B, 0);
    for (std::size_t m = 1; m <= B; ++m) {
        for (std::size_t j = 0; j <= m; ++j) {
            out.sup_over_all_pairs = std::max(out.sup_over_all_pairs, tv_class(m, j));
        }
    }
    return out;
}

/// Theorem 2 (in-frame Markov masks). Same distortion form as Theorem 1 at
/// p = q0/(q0+q1); probability at least
/// 1 - (2^(Br) + 1) exp(-(n eps^2/32)(1 - theta1)^2).
inline BoundReport thm2_bound(const MarkovMaskSpec& spec, const BoundParams& params)
{
    spec.validate();
    if (!(spec.q0 > 0.0 && spec.q1 > 0.0)) {
        throw DomainError("thm2_bound: stationary law is degenerate (q0 or q1 is zero)");
    }
    const double p = stationary_p(spec);
    auto r = thm1_bound(p, params);
    r.theorem = TheoremTag::Thm2;
    const double theta = theta1_closed(spec.q0, spec.q1, params.B);
    r.theta1 = theta;
    r.alpha = alpha(spec);
    const double br = static_cast<double>(params.B) * params.rate_r;
    const double log_factor = br * std::log(2.0) + std::log1p(std::exp2(-br));
    const double exponent = static_cast<double>(params.n) * params.epsilon * params.epsilon /
                            32.0 * (1.0 - theta) * (1.0 - theta);
    r.prob_lower_raw = detail::one_minus_scaled_exp(log_factor, exponent);
    return r;
}

/// M_n = 1 + theta + ... + theta^(n-1) = (1 - theta^n)/(1 - theta).
inline double Mn_factor(double theta1, std::size_t n)
{
    if (!(theta1 >= 0.0 && theta1 < 1.0)) {
        throw DomainError("Mn_factor: theta1 must lie in [0, 1)");
    }
    if (n == 0) {
        throw DomainError("Mn_factor: n must be positive");
    }
    return (1.0 - std::pow(theta1, static_cast<double>(n))) / (1.0 - theta1);
}

/// Uniform upper bound M_n <= 1/(1 - theta).
inline double Mn_upper(double theta1)
{
    if (!(theta1 >= 0.0 && theta1 < 1.0)) {
        throw DomainError("Mn_upper: theta1 must lie in [0, 1)");
    }
    return 1.0 / (1.0 - theta1);
}

/// Lambda_ik = alpha^|i-k|, B x B, row-major.
struct CorrelationMatrix {
    double alpha = 0.0;
    std::size_t B = 1;
    std::vector<double> entries;

    double at(std::size_t i, std::size_t k) const { return entries[i * B + k]; }
};

inline CorrelationMatrix lambda_matrix(double alpha_value, std::size_t B)
{
    if (!(alpha_value >= 0.0 && alpha_value < 1.0)) {
        throw DomainError("lambda_matrix: alpha must lie in [0, 1)");
    }
    if (B == 0) {
        throw DomainError("lambda_matrix: B must be positive");
    }
    CorrelationMatrix m{alpha_value, B, std::vector<double>(B * B)};
    for (std::size_t i = 0; i < B; ++i) {
        for (std::size_t k = 0; k < B; ++k) {
            const std::size_t d = i > k ? i - k : k - i;
            m.entries[i * B + k] = d == 0 ? 1.0 : std::pow(alpha_value, static_cast<double>(d));
        }
    }
    return m;
}

struct JacobiResult {
    std::vector<double> eigenvalues;   ///< ascending
    unsigned sweeps = 0;
    double off_norm = 0.0;
};

/// Cyclic Jacobi eigenvalues of a dense symmetric matrix (row-major, dim x dim).
/// Converged when the off-diagonal Frobenius norm is <= tol.
inline JacobiResult jacobi_eigenvalues(std::vector<double> a, std::size_t dim,
                                       double tol = 1e-13, unsigned max_sweeps = 100)
{
    if (a.size() != dim * dim) {
        throw ShapeError("jacobi_eigenvalues: matrix is not dim x dim");
    }
    auto at = [&](std::size_t i, std::size_t k) -> double& { return a[i * dim + k]; };
    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t k = 0; k < dim; ++k) {
                if (i != k) {
                    s += at(i, k) * at(i, k);
                }
            }
        }
        return std::sqrt(s);
    };

    JacobiResult out;
    out.off_norm = off_norm();
    while (out.off_norm > tol) {
        if (out.sweeps == max_sweeps) {
            throw ConvergenceError("jacobi_eigenvalues: no convergence after " +
                                   std::to_string(max_sweeps) + " sweeps");
        }
        for (std::size_t p = 0; p + 1 < dim; ++p) {
            for (std::size_t q = p + 1; q < dim; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double tau = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < dim; ++k) {
                    const double akp = at(k, p);
                    const double akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < dim; ++k) {
                    const double apk = at(p, k);
                    const double aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
        ++out.sweeps;
        out.off_norm = off_norm();
    }
    out.eigenvalues.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        out.eigenvalues[i] = at(i, i);
    }
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
    return out;
}

struct EigenExtremes {
    double lambda_min = 1.0;
    double lambda_max = 1.0;
};

inline EigenExtremes lambda_extremes(const CorrelationMatrix& m)
{
    const auto r = jacobi_eigenvalues(m.entries, m.B);
    return {r.eigenvalues.front(), r.eigenvalues.back()};
}

/// Gershgorin enclosure of the spectrum of Lambda(alpha) for any B:
/// [(1 - 3 alpha)/(1 - alpha), (1 + alpha)/(1 - alpha)].
inline std::pair<double, double> gershgorin_bounds(double alpha_value)
{
    if (!(alpha_value >= 0.0 && alpha_value < 1.0)) {
        throw DomainError("gershgorin_bounds: alpha must lie in [0, 1)");
    }
    return {(1.0 - 3.0 * alpha_value) / (1.0 - alpha_value),
            (1.0 + alpha_value) / (1.0 - alpha_value)};
}

/// Theorem 3 (out-of-frame Markov masks):
/// [lmax(1-p) + pB]/[lmin(1-p)] delta/(nB) + rho^2 eps/(lmin p(1-p)).
inline BoundReport thm3_bound(double p, double alpha_value, const BoundParams& params)
{
    auto r = detail::start_report(TheoremTag::Thm3, params, p);
    const auto ext = lambda_extremes(lambda_matrix(alpha_value, params.B));
    r.alpha = alpha_value;
    r.lambda_min = ext.lambda_min;
    r.lambda_max = ext.lambda_max;
    if (!(ext.lambda_min > 0.0)) {
        throw InapplicableError("thm3_bound: lambda_min(Lambda) <= 0");
    }
    r.prob_lower_raw = detail::iid_probability(params);
    if (p == 0.0 || p == 1.0) {
        detail::mark_infinite(r);
        return r;
    }
    const double b = static_cast<double>(params.B);
    r.distortion_bound =
        (ext.lambda_max * (1.0 - p) + p * b) / (ext.lambda_min * (1.0 - p)) * params.delta /
            detail::nb(params) +
        params.rho * params.rho * params.epsilon / (ext.lambda_min * p * (1.0 - p));
    return r;
}

enum class Cor2Mode {
    /// The corollary exactly as printed, including the rho^2 (1 - eps) term.
    PaperLiteral,
    /// Theorem 3 with the Gershgorin bounds substituted for the eigenvalues.
    ProofDerived,
};

/// Corollary 2, valid for alpha < 1/3.
inline BoundReport cor2_bound(double p, double alpha_value, const BoundParams& params,
                              Cor2Mode mode = Cor2Mode::ProofDerived)
{
    auto r = detail::start_report(mode == Cor2Mode::PaperLiteral ? TheoremTag::Cor2PaperLiteral
                                                                 : TheoremTag::Cor2ProofDerived,
                                  params, p);
    if (!(alpha_value >= 0.0)) {
        throw DomainError("cor2_bound: alpha must be nonnegative");
    }
    if (!(alpha_value < 1.0 / 3.0)) {
        throw InapplicableError("cor2_bound: requires alpha < 1/3");
    }
    const auto [low, high] = gershgorin_bounds(alpha_value);
    r.alpha = alpha_value;
    r.lambda_min = low;
    r.lambda_max = high;
    r.prob_lower_raw = detail::iid_probability(params);
    if (p == 0.0 || p == 1.0) {
        detail::mark_infinite(r);
        return r;
    }
    const double a = alpha_value;
    const double b = static_cast<double>(params.B);
    const double rho2 = params.rho * params.rho;
    const double scale = params.delta / detail::nb(params);
    if (mode == Cor2Mode::PaperLiteral) {
        r.distortion_bound =
            ((1.0 + a) * (1.0 - p) + p * b) / ((1.0 - 3.0 * a) * (1.0 - p)) * scale +
            rho2 * (1.0 - params.epsilon) / ((1.0 - 3.0 * a) * p * (1.0 - p));
    } else {
        r.distortion_bound =
            ((1.0 + a) * (1.0 - p) + p * b * (1.0 - a)) / ((1.0 - 3.0 * a) * (1.0 - p)) * scale +
            rho2 * params.epsilon * (1.0 - a) / ((1.0 - 3.0 * a) * p * (1.0 - p));
    }
    return r;
}

enum class UjModel { Iid01, SignedPM1, OutFrameMarkov };

/// E[(sum_i D_i mu_i)^2] for one pixel, mu_i = x_i - c_i.
///   Iid01:          p^2 (sum mu)^2 + (p - p^2) ||mu||^2
///   SignedPM1:      (2p - 1)^2 (sum mu)^2 + 4(p - p^2) ||mu||^2
///   OutFrameMarkov: p^2 (sum mu)^2 + p(1 - p) mu^T Lambda mu
inline double expected_Uj(UjModel model, double p, std::optional<double> alpha_value,
                          std::span<const double> mu)
{
    detail::check_p(p);
    double sum = 0.0;
    double sq = 0.0;
    for (double m : mu) {
        sum += m;
        sq += m * m;
    }
    const double s = p * (1.0 - p);
    switch (model) {
    case UjModel::Iid01:
        return p * p * sum * sum + s * sq;
    case UjModel::SignedPM1:
        return (2.0 * p - 1.0) * (2.0 * p - 1.0) * sum * sum + 4.0 * s * sq;
    case UjModel::OutFrameMarkov: {
        if (!alpha_value) {
            throw DomainError("expected_Uj: OutFrameMarkov requires alpha");
        }
        const double a = *alpha_value;
        if (!(a > -1.0 && a < 1.0)) {
            throw DomainError("expected_Uj: alpha must lie in (-1, 1)");
        }
        // mu^T Lambda mu via the recursion w_i = mu_i + a w_{i-1}.
        double quad = sq;
        double w = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) {
            if (i > 0) {
                quad += 2.0 * a * mu[i] * w;
            }
            w = mu[i] + a * w;
        }
        return p * p * sum * sum + s * quad;
    }
    }
    return 0.0;
}

/// U_j <= B^2 rho^2 for binary masks and |x|, |c| <= rho/2.
inline double uj_upper_bound(std::size_t B, double rho)
{
    const double b = static_cast<double>(B);
    return b * b * rho * rho;
}

/// One-sided Hoeffding tail exp(-2 n eps_half^2 / B^2) for a deviation of
/// B rho^2 eps_half in the mean of n variables bounded by B^2 rho^2.
inline double hoeffding_tail(std::size_t n, std::size_t B, double eps_half)
{
    if (n == 0 || B == 0 || !(eps_half > 0.0)) {
        throw DomainError("hoeffding_tail: arguments must be positive");
    }
    const double b = static_cast<double>(B);
    return std::exp(-2.0 * static_cast<double>(n) * eps_half * eps_half / (b * b));
}

/// Hamming-Lipschitz constant of phi(d) = (sum_i d_i mu_i)^2: 2 B rho^2.
inline double lipschitz_constant(std::size_t B, double rho)
{
    return 2.0 * static_cast<double>(B) * rho * rho;
}

/// Markov-chain concentration tail for a sum of n chain steps deviating by t:
/// 2 exp(-t^2 / (2 n c^2 M_n^2)) with M_n <= 1/(1 - theta1).
inline double markov_concentration_tail(std::size_t n, double c_lipschitz, double theta1, double t)
{
    if (n == 0 || !(c_lipschitz > 0.0) || !(t > 0.0)) {
        throw DomainError("markov_concentration_tail: arguments must be positive");
    }
    const double mn = Mn_upper(theta1);
    return 2.0 * std::exp(-t * t / (2.0 * static_cast<double>(n) * c_lipschitz * c_lipschitz *
                                    mn * mn));
}

} // namespace scimask

#endif // SCIMASK_THEORY_HPP
