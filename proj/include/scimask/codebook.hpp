#ifndef SCIMASK_CODEBOOK_HPP
#define SCIMASK_CODEBOOK_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace scimask {

/// Signal class Q realized as anchors plus an l2 perturbation ball of radius
/// perturbation_radius. Members stay inside the l-infinity budget of the anchors.
struct SignalClass {
    std::vector<SignalCube> anchors;
    double perturbation_radius = 0.0;

    void validate() const
    {
        if (anchors.empty()) {
            throw DomainError("SignalClass: anchor list is empty");
        }
        if (!(perturbation_radius >= 0.0) || !std::isfinite(perturbation_radius)) {
            throw DomainError("SignalClass: perturbation radius must be finite and nonnegative");
        }
        for (const auto& a : anchors) {
            if (!a.same_shape(anchors.front()) || a.rho() != anchors.front().rho()) {
                throw ShapeError("SignalClass: anchors differ in shape or rho");
            }
        }
    }

    std::size_t num_frames() const { return anchors.front().num_frames(); }
    std::size_t num_pixels() const { return anchors.front().num_pixels(); }
    double rho() const { return anchors.front().rho(); }
};

/// Explicit codebook of a rate-r, distortion-delta compression code.
/// Holds at most 2^(B r) codewords.
class Codebook {
public:
    Codebook(std::vector<SignalCube> codewords, double rate_r, double certified_delta)
        : codewords_(std::move(codewords)), rate_(rate_r), delta_(certified_delta)
    {
        if (codewords_.empty()) {
            throw DomainError("Codebook: no codewords");
        }
        if (!(rate_ >= 0.0) || !std::isfinite(rate_)) {
            throw DomainError("Codebook: rate must be finite and nonnegative");
        }
        if (!(delta_ >= 0.0) || !std::isfinite(delta_)) {
            throw DomainError("Codebook: delta must be finite and nonnegative");
        }
        for (const auto& c : codewords_) {
            if (!c.same_shape(codewords_.front()) || c.rho() != codewords_.front().rho()) {
                throw ShapeError("Codebook: codewords differ in shape or rho");
            }
        }
        // B*r is an integer for codes built here; the slack absorbs rounding of r itself.
        const double capacity = std::exp2(static_cast<double>(num_frames()) * rate_);
        if (static_cast<double>(codewords_.size()) > capacity * (1.0 + 1e-12)) {
            throw DomainError("Codebook: " + std::to_string(codewords_.size()) +
                              " codewords exceed 2^(B r)");
        }
    }

    std::size_t size() const noexcept { return codewords_.size(); }
    const SignalCube& operator[](std::size_t i) const { return codewords_[i]; }
    const std::vector<SignalCube>& codewords() const noexcept { return codewords_; }
    double rate() const noexcept { return rate_; }
    double certified_delta() const noexcept { return delta_; }
    std::size_t num_frames() const { return codewords_.front().num_frames(); }
    std::size_t num_pixels() const { return codewords_.front().num_pixels(); }

private:
    std::vector<SignalCube> codewords_;
    double rate_;
    double delta_;
};

/// Nearest-anchor code: codewords are the anchors, r = ceil(log2 K)/B and
/// delta = radius^2.
inline Codebook build_anchor_codebook(const SignalClass& cls)
{
    cls.validate();
    const auto k = static_cast<std::uint64_t>(cls.anchors.size());
    const double bits = static_cast<double>(std::bit_width(k - 1));
    const double rate = bits / static_cast<double>(cls.num_frames());
    return Codebook(cls.anchors, rate, cls.perturbation_radius * cls.perturbation_radius);
}

struct Compressed {
    std::size_t index = 0;
    SignalCube reconstruction;
    double squared_error = 0.0;
};

/// Nearest codeword in l2; ties go to the lowest index.
inline Compressed compress(const Codebook& cb, const SignalCube& x)
{
    if (!x.same_shape(cb[0])) {
        throw ShapeError("compress: signal and codebook dimensions differ");
    }
    std::size_t best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cb.size(); ++i) {
        const double e = squared_distance(x.values(), cb[i].values());
        if (e < best_err) {
            best_err = e;
            best = i;
        }
    }
    return {best, cb[best], best_err};
}

/// ||y - sum_b D_b c_b||_2^2.
inline double measurement_residual(const Measurement& y, const MaskCube& masks, const SignalCube& c)
{
    if (!masks.matches(c) || y.size() != c.num_pixels()) {
        throw ShapeError("measurement_residual: dimension mismatch");
    }
    const std::size_t n = c.num_pixels();
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double r = y.y[j];
        for (std::size_t b = 0; b < c.num_frames(); ++b) {
            r -= masks.at(b, j) * c.at(b, j);
        }
        total += r * r;
    }
    return total;
}

struct CspResult {
    std::size_t index = 0;
    SignalCube xhat;
    double objective = 0.0;
};

/// Compressible signal pursuit: exhaustive argmin over the codebook of the
/// measurement residual. Ties go to the lowest index.
inline CspResult csp_decode(const Measurement& y, const MaskCube& masks, const Codebook& cb)
{
    if (cb.size() == 0) {
        throw DomainError("csp_decode: empty codebook");
    }
    if (!masks.matches(cb[0]) || y.size() != cb.num_pixels()) {
        throw ShapeError("csp_decode: measurement, masks and codebook dimensions differ");
    }
    std::size_t best = 0;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cb.size(); ++i) {
        const double obj = measurement_residual(y, masks, cb[i]);
        if (obj < best_obj) {
            best_obj = obj;
            best = i;
        }
    }
    return {best, cb[best], best_obj};
}

/// max over samples of ||x - compress(x)||^2; a lower bound on the code's delta.
inline double measure_empirical_delta(const Codebook& cb, const std::vector<SignalCube>& samples)
{
    if (samples.empty()) {
        throw DomainError("measure_empirical_delta: no samples");
    }
    double worst = 0.0;
    for (const auto& x : samples) {
        worst = std::max(worst, compress(cb, x).squared_error);
    }
    return worst;
}

/// Draws anchor + e with ||e||_2 = radius in a uniformly random direction,
/// shrinking e only as far as needed to stay within |x| <= rho/2.
inline SignalCube draw_class_member(const SignalClass& cls, std::uint64_t seed)
{
    cls.validate();
    SplitMix64 gen(seed);
    const auto& anchor = cls.anchors[gen.below(cls.anchors.size())];
    if (cls.perturbation_radius == 0.0) {
        return anchor;
    }
    const auto a = anchor.values();
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> e(a.size());
    double norm2 = 0.0;
    while (norm2 == 0.0) {
        for (double& v : e) {
            v = gauss(gen);
            norm2 += v * v;
        }
    }
    const double half = anchor.rho() / 2.0;
    const double to_radius = cls.perturbation_radius / std::sqrt(norm2);
    double shrink = 1.0;
    for (std::size_t k = 0; k < e.size(); ++k) {
        e[k] *= to_radius;
        if (e[k] > 0.0) {
            shrink = std::min(shrink, (half - a[k]) / e[k]);
        } else if (e[k] < 0.0) {
            shrink = std::min(shrink, (-half - a[k]) / e[k]);
        }
    }
    std::vector<double> x(a.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = std::clamp(a[k] + shrink * e[k], -half, half);
    }
    return SignalCube(anchor.num_frames(), anchor.num_pixels(), anchor.rho(), std::move(x),
                      anchor.shape());
}

/// K anchors with entries uniform in [-rho/4, rho/4].
inline std::vector<SignalCube> random_anchors(std::size_t count, std::size_t num_frames,
                                              std::size_t num_pixels, double rho,
                                              std::uint64_t seed)
{
    std::vector<SignalCube> anchors;
    anchors.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        SplitMix64 gen(substream_seed(seed, k));
        std::vector<double> v(num_frames * num_pixels);
        for (double& e : v) {
            e = (gen.uniform() - 0.5) * rho / 2.0;
        }
        anchors.emplace_back(num_frames, num_pixels, rho, std::move(v));
    }
    return anchors;
}

} // namespace scimask

#endif // SCIMASK_CODEBOOK_HPP
