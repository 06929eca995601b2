// Minimal end-to-end run: build a small signal class, draw a member, encode it
// with i.i.d. masks, recover it with the codebook decoder and compare the
// observed distortion with the Theorem 1 bound.

#include <iostream>

#include "scimask.hpp"

int main()
{
    using namespace scimask;

    constexpr std::size_t n = 2048;
    constexpr std::size_t B = 2;
    constexpr double rho = 1.0;

    SignalClass cls;
    cls.anchors = random_anchors(16, B, n, rho, 7);
    cls.perturbation_radius = 1.0;
    const Codebook cb = build_anchor_codebook(cls);

    const SignalCube x = draw_class_member(cls, 11);
    const MaskCube masks = gen_iid({0.5, Alphabet::Binary01}, B, n, 13);
    const Measurement y = encode(x, masks);
    const CspResult rec = csp_decode(y, masks, cb);

    const BoundParams params{n, B, cb.rate(), cb.certified_delta(), rho, 0.2};
    const BoundReport bound = thm1_bound(0.5, params);
    const auto pstar = thm1_pstar(params);

    std::cout << "codebook size       " << cb.size() << '\n'
              << "decoded index       " << rec.index << '\n'
              << "empirical distortion " << normalized_distortion(x, rec.xhat) << '\n'
              << "thm1 bound (p=0.5)   " << bound.distortion_bound << '\n'
              << "success probability >= " << bound.prob_lower_clamped() << '\n'
              << "minimizing p*        " << pstar.value << '\n';
    return 0;
}
