#include <cstdio>

#include "funnelgate/transform.hpp"

// Maps a few eps values through each squash choice and shows that the image
// stays strictly inside a shrinking funnel.

int main() {
    using namespace funnelgate;
    const FunnelBounds funnel(BoundCurve::constant(0.01), BoundCurve::exp_offset(0.9, 0.1, -0.1),
                              1.475);

    std::printf("%10s %12s %12s %12s\n", "eps", "rational", "tanh_half", "arctan");
    for (double eps : {-10.0, -2.0, 0.0, 2.0, 10.0}) {
        std::printf("%10.2f", eps);
        for (TransformKind kind :
             {TransformKind::Rational, TransformKind::TanhHalf, TransformKind::Arctan}) {
            const TransformSpec spec{kind, funnel};
            std::printf(" %12.6f", phi(spec, eps, 5.0));
        }
        std::printf("\n");
    }
    std::printf("funnel at t=5: (%.6f, %.6f)\n", funnel.g_lo(5.0), funnel.g_hi(5.0));
    return 0;
}
