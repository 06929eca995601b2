#ifndef SCIMASK_CORE_HPP
#define SCIMASK_CORE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace scimask {

/// Pre-vectorization shape of one frame; n = rows * cols.
struct FrameShape {
    std::size_t rows = 0;
    std::size_t cols = 0;

    friend bool operator==(const FrameShape&, const FrameShape&) = default;
};

/// Ground-truth cube x stored as B frames of n reals (frame-major, frame b
/// occupies [b*n, (b+1)*n)). Every entry satisfies |x_bj| <= rho/2.
class SignalCube {
public:
    SignalCube(std::size_t num_frames, std::size_t num_pixels, double rho,
               std::vector<double> values, std::optional<FrameShape> shape = std::nullopt)
        : frames_(num_frames), pixels_(num_pixels), rho_(rho), values_(std::move(values)),
          shape_(shape)
    {
        if (frames_ == 0 || pixels_ == 0) {
            throw ShapeError("SignalCube: B and n must be positive");
        }
        if (!(rho_ > 0.0) || !std::isfinite(rho_)) {
            throw DomainError("SignalCube: rho must be positive and finite");
        }
        if (values_.size() != frames_ * pixels_) {
            throw ShapeError("SignalCube: expected " + std::to_string(frames_ * pixels_) +
                             " values, got " + std::to_string(values_.size()));
        }
        if (shape_ && shape_->rows * shape_->cols != pixels_) {
            throw ShapeError("SignalCube: n1*n2 does not equal n");
        }
        const double half = rho_ / 2.0;
        for (double v : values_) {
            if (!(std::abs(v) <= half)) {
                throw DomainError("SignalCube: entry exceeds the l-infinity budget rho/2");
            }
        }
    }

    static SignalCube from_frames(const std::vector<std::vector<double>>& frames, double rho,
                                  std::optional<FrameShape> shape = std::nullopt)
    {
        if (frames.empty()) {
            throw ShapeError("SignalCube: no frames");
        }
        const std::size_t n = frames.front().size();
        std::vector<double> values;
        values.reserve(frames.size() * n);
        for (const auto& f : frames) {
            if (f.size() != n) {
                throw ShapeError("SignalCube: frames have different lengths");
            }
            values.insert(values.end(), f.begin(), f.end());
        }
        return SignalCube(frames.size(), n, rho, std::move(values), shape);
    }

    static SignalCube zeros(std::size_t num_frames, std::size_t num_pixels, double rho)
    {
        return SignalCube(num_frames, num_pixels, rho,
                          std::vector<double>(num_frames * num_pixels, 0.0));
    }

    std::size_t num_frames() const noexcept { return frames_; }
    std::size_t num_pixels() const noexcept { return pixels_; }
    std::size_t size() const noexcept { return values_.size(); }
    double rho() const noexcept { return rho_; }
    const std::optional<FrameShape>& shape() const noexcept { return shape_; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> frame(std::size_t b) const
    {
        return std::span<const double>(values_).subspan(b * pixels_, pixels_);
    }
    double at(std::size_t b, std::size_t j) const { return values_[b * pixels_ + j]; }

    bool same_shape(const SignalCube& other) const noexcept
    {
        return frames_ == other.frames_ && pixels_ == other.pixels_;
    }

private:
    std::size_t frames_;
    std::size_t pixels_;
    double rho_;
    std::vector<double> values_;
    std::optional<FrameShape> shape_;
};

enum class Alphabet { Binary01, SignedPM1 };

inline const char* to_string(Alphabet a) noexcept
{
    return a == Alphabet::Binary01 ? "binary01" : "signed";
}

// Generator record carried by a MaskCube.
struct IidBernoulli { double p; };
struct IidSigned { double p; };
struct InFrameMarkov { double q0; double q1; };
struct OutFrameMarkov { double q0; double q1; };
struct ExplicitMask {};

using MaskProvenance =
    std::variant<ExplicitMask, IidBernoulli, IidSigned, InFrameMarkov, OutFrameMarkov>;

/// Mask values D_bj, the diagonals of D_1..D_B, stored frame-major like
/// SignalCube.
class MaskCube {
public:
    MaskCube(std::size_t num_frames, std::size_t num_pixels, Alphabet alphabet,
             std::vector<std::int8_t> values, MaskProvenance provenance = ExplicitMask{})
        : frames_(num_frames), pixels_(num_pixels), alphabet_(alphabet),
          values_(std::move(values)), provenance_(provenance)
    {
        if (frames_ == 0 || pixels_ == 0) {
            throw ShapeError("MaskCube: B and n must be positive");
        }
        if (values_.size() != frames_ * pixels_) {
            throw ShapeError("MaskCube: expected " + std::to_string(frames_ * pixels_) +
                             " values, got " + std::to_string(values_.size()));
        }
        for (std::int8_t v : values_) {
            const bool ok = alphabet_ == Alphabet::Binary01 ? (v == 0 || v == 1)
                                                            : (v == -1 || v == 1);
            if (!ok) {
                throw DomainError(std::string("MaskCube: value outside alphabet ") +
                                  to_string(alphabet_));
            }
        }
    }

    std::size_t num_frames() const noexcept { return frames_; }
    std::size_t num_pixels() const noexcept { return pixels_; }
    Alphabet alphabet() const noexcept { return alphabet_; }
    const MaskProvenance& provenance() const noexcept { return provenance_; }

    std::span<const std::int8_t> values() const noexcept { return values_; }
    std::span<const std::int8_t> frame(std::size_t b) const
    {
        return std::span<const std::int8_t>(values_).subspan(b * pixels_, pixels_);
    }
    int at(std::size_t b, std::size_t j) const { return values_[b * pixels_ + j]; }

    bool matches(const SignalCube& x) const noexcept
    {
        return frames_ == x.num_frames() && pixels_ == x.num_pixels();
    }

private:
    std::size_t frames_;
    std::size_t pixels_;
    Alphabet alphabet_;
    std::vector<std::int8_t> values_;
    MaskProvenance provenance_;
};

/// Single measurement frame y, vectorized.
struct Measurement {
    std::vector<double> y;
    bool noise_applied = false;

    std::size_t size() const noexcept { return y.size(); }
};

/// i.i.d. zero-mean Gaussian noise with standard deviation sigma; 0 is noiseless.
struct NoiseSpec {
    double sigma = 0.0;
};

/// y_j = sum_b D_bj x_bj + z_j.
inline Measurement encode(const SignalCube& x, const MaskCube& masks, NoiseSpec noise = {},
                          std::uint64_t seed = 0)
{
    if (!masks.matches(x)) {
        throw ShapeError("encode: mask cube and signal cube dimensions differ");
    }
    if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) {
        throw DomainError("encode: noise sigma must be finite and nonnegative");
    }
    const std::size_t n = x.num_pixels();
    Measurement m{std::vector<double>(n, 0.0), noise.sigma > 0.0};
    for (std::size_t b = 0; b < x.num_frames(); ++b) {
        const auto xf = x.frame(b);
        const auto df = masks.frame(b);
        for (std::size_t j = 0; j < n; ++j) {
            m.y[j] += df[j] * xf[j];
        }
    }
    if (m.noise_applied) {
        SplitMix64 gen(seed);
        std::normal_distribution<double> gauss(0.0, noise.sigma);
        for (double& v : m.y) {
            v += gauss(gen);
        }
    }
    return m;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw ShapeError("squared_distance: length mismatch");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

/// (1/(nB)) * ||x - xhat||_2^2.
inline double normalized_distortion(const SignalCube& x, const SignalCube& xhat)
{
    if (!x.same_shape(xhat)) {
        throw ShapeError("normalized_distortion: dimension mismatch");
    }
    return squared_distance(x.values(), xhat.values()) / static_cast<double>(x.size());
}

/// Column-major vectorization of a frame given as rows (grid[r][c]).
inline std::vector<double> flatten_frame(const std::vector<std::vector<double>>& grid)
{
    if (grid.empty() || grid.front().empty()) {
        throw ShapeError("flatten_frame: grid must be at least 1x1");
    }
    const std::size_t rows = grid.size();
    const std::size_t cols = grid.front().size();
    std::vector<double> out(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (grid[r].size() != cols) {
            throw ShapeError("flatten_frame: ragged grid");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            out[c * rows + r] = grid[r][c];
        }
    }
    return out;
}

inline std::vector<std::vector<double>> unflatten_frame(std::span<const double> v, FrameShape shape)
{
    if (shape.rows == 0 || shape.cols == 0) {
        throw ShapeError("unflatten_frame: shape must be at least 1x1");
    }
    if (v.size() != shape.rows * shape.cols) {
        throw ShapeError("unflatten_frame: vector length does not equal n1*n2");
    }
    std::vector<std::vector<double>> grid(shape.rows, std::vector<double>(shape.cols));
    for (std::size_t c = 0; c < shape.cols; ++c) {
        for (std::size_t r = 0; r < shape.rows; ++r) {
            grid[r][c] = v[c * shape.rows + r];
        }
    }
    return grid;
}

} // namespace scimask

#endif // SCIMASK_CORE_HPP
