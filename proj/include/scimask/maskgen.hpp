#ifndef SCIMASK_MASKGEN_HPP
#define SCIMASK_MASKGEN_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <variant>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace scimask {

enum class Orientation { InFrame, OutOfFrame };

/// Binary first-order Markov chain: q0 = P(1 | 0), q1 = P(0 | 1).
struct MarkovMaskSpec {
    double q0 = 0.5;
    double q1 = 0.5;
    Orientation orientation = Orientation::InFrame;

    void validate() const
    {
        if (!(q0 >= 0.0 && q0 <= 1.0) || !(q1 >= 0.0 && q1 <= 1.0)) {
            throw DomainError("MarkovMaskSpec: q0 and q1 must lie in [0, 1]");
        }
        if (!(q0 + q1 > 0.0)) {
            throw DomainError("MarkovMaskSpec: q0 + q1 must be positive");
        }
    }
};

struct BernoulliMaskSpec {
    double p = 0.5;
    Alphabet alphabet = Alphabet::Binary01;

    void validate() const
    {
        if (!(p > 0.0 && p < 1.0)) {
            throw DomainError("BernoulliMaskSpec: p must lie strictly inside (0, 1)");
        }
    }
};

using MaskSpec = std::variant<BernoulliMaskSpec, MarkovMaskSpec>;

/// Stationary probability of a one: q0 / (q0 + q1).
inline double stationary_p(const MarkovMaskSpec& spec)
{
    spec.validate();
    return spec.q0 / (spec.q0 + spec.q1);
}

/// Second eigenvalue of the transition kernel: 1 - q0 - q1.
inline double alpha(const MarkovMaskSpec& spec)
{
    spec.validate();
    return 1.0 - spec.q0 - spec.q1;
}

/// Chain with stationary probability p and memory alpha.
inline MarkovMaskSpec markov_from_stationary(double p, double alpha_value, Orientation orientation)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("markov_from_stationary: p must lie in (0, 1)");
    }
    if (!(alpha_value < 1.0)) {
        throw DomainError("markov_from_stationary: alpha must be below 1");
    }
    MarkovMaskSpec spec{p * (1.0 - alpha_value), (1.0 - p) * (1.0 - alpha_value), orientation};
    spec.validate();
    return spec;
}

/// Rows are the current state, columns the next state.
inline std::array<std::array<double, 2>, 2> transition_matrix(const MarkovMaskSpec& spec)
{
    spec.validate();
    return {{{1.0 - spec.q0, spec.q0}, {spec.q1, 1.0 - spec.q1}}};
}

/// P(D_{i+k} = 1 | D_i = 1) = p + (1 - p) alpha^k.
inline double kstep_transition(const MarkovMaskSpec& spec, unsigned k)
{
    const double p = stationary_p(spec);
    if (k == 0) {
        return 1.0;
    }
    return p + (1.0 - p) * std::pow(alpha(spec), static_cast<double>(k));
}

namespace detail {

inline std::int8_t markov_step(SplitMix64& gen, std::int8_t current, const MarkovMaskSpec& spec)
{
    if (current == 0) {
        return gen.bernoulli(spec.q0) ? 1 : 0;
    }
    return gen.bernoulli(spec.q1) ? 0 : 1;
}

} // namespace detail

/// i.i.d. masks. Frame b draws from substream (seed, b).
inline MaskCube gen_iid(const BernoulliMaskSpec& spec, std::size_t num_frames,
                        std::size_t num_pixels, std::uint64_t seed)
{
    spec.validate();
    std::vector<std::int8_t> values(num_frames * num_pixels);
    const std::int8_t off = spec.alphabet == Alphabet::Binary01 ? 0 : -1;
    for (std::size_t b = 0; b < num_frames; ++b) {
        SplitMix64 gen(substream_seed(seed, b));
        for (std::size_t j = 0; j < num_pixels; ++j) {
            values[b * num_pixels + j] = gen.bernoulli(spec.p) ? 1 : off;
        }
    }
    MaskProvenance prov = spec.alphabet == Alphabet::Binary01
                              ? MaskProvenance{IidBernoulli{spec.p}}
                              : MaskProvenance{IidSigned{spec.p}};
    return MaskCube(num_frames, num_pixels, spec.alphabet, std::move(values), prov);
}

/// Independent frames, each a stationary chain along the pixel index.
/// Frame b draws from substream (seed, b).
inline MaskCube gen_inframe_markov(const MarkovMaskSpec& spec, std::size_t num_frames,
                                   std::size_t num_pixels, std::uint64_t seed)
{
    if (spec.orientation != Orientation::InFrame) {
        throw DomainError("gen_inframe_markov: spec orientation must be InFrame");
    }
    const double p = stationary_p(spec);
    std::vector<std::int8_t> values(num_frames * num_pixels);
    for (std::size_t b = 0; b < num_frames; ++b) {
        SplitMix64 gen(substream_seed(seed, b));
        std::int8_t* row = values.data() + b * num_pixels;
        row[0] = gen.bernoulli(p) ? 1 : 0;
        for (std::size_t j = 1; j < num_pixels; ++j) {
            row[j] = detail::markov_step(gen, row[j - 1], spec);
        }
    }
    return MaskCube(num_frames, num_pixels, Alphabet::Binary01, std::move(values),
                    InFrameMarkov{spec.q0, spec.q1});
}

/// Independent pixels, each a stationary chain along the frame index.
/// Pixel j draws from substream (seed, j).
inline MaskCube gen_outframe_markov(const MarkovMaskSpec& spec, std::size_t num_frames,
                                    std::size_t num_pixels, std::uint64_t seed)
{
    if (spec.orientation != Orientation::OutOfFrame) {
        throw DomainError("gen_outframe_markov: spec orientation must be OutOfFrame");
    }
    const double p = stationary_p(spec);
    std::vector<std::int8_t> values(num_frames * num_pixels);
    for (std::size_t j = 0; j < num_pixels; ++j) {
        SplitMix64 gen(substream_seed(seed, j));
        std::int8_t prev = gen.bernoulli(p) ? 1 : 0;
        values[j] = prev;
        for (std::size_t b = 1; b < num_frames; ++b) {
            prev = detail::markov_step(gen, prev, spec);
            values[b * num_pixels + j] = prev;
        }
    }
    return MaskCube(num_frames, num_pixels, Alphabet::Binary01, std::move(values),
                    OutFrameMarkov{spec.q0, spec.q1});
}

/// Dispatches on the spec kind and orientation.
inline MaskCube generate_masks(const MaskSpec& spec, std::size_t num_frames,
                               std::size_t num_pixels, std::uint64_t seed)
{
    if (const auto* bern = std::get_if<BernoulliMaskSpec>(&spec)) {
        return gen_iid(*bern, num_frames, num_pixels, seed);
    }
    const auto& markov = std::get<MarkovMaskSpec>(spec);
    return markov.orientation == Orientation::InFrame
               ? gen_inframe_markov(markov, num_frames, num_pixels, seed)
               : gen_outframe_markov(markov, num_frames, num_pixels, seed);
}

} // namespace scimask

#endif // SCIMASK_MASKGEN_HPP
