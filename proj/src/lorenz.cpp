#include "shield/lorenz.hpp"

#include "shield/errors.hpp"
#include "shield/rng.hpp"

namespace shield {

Mat lorenz_dataset(int count, int L, double dl, uint64_t seed, const LorenzParams& p) {
    if (count < 1) throw InvalidCount("lorenz dataset count must be >= 1, got " + std::to_string(count));
    if (L < 1) throw InvalidCount("lorenz dataset segment count must be >= 1, got " + std::to_string(L));
    if (!(dl > 0.0)) throw ValidationError("lorenz dataset step must be positive");

    Mat out(count, 3 * (L + 1));
    Rng rng(seed);
    for (int m = 0; m < count; ++m) {
        Eigen::Vector3d z;
        for (int i = 0; i < 3; ++i) z[i] = rng.uniform(-2.0, 2.0);
        out.block<1, 3>(m, 0) = z.transpose();
        for (int l = 0; l < L; ++l) {
            z += dl * lorenz_field(z, p);
            out.block<1, 3>(m, 3 * (l + 1)) = z.transpose();
        }
    }
    return out;
}

} // namespace shield
