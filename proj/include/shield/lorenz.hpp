#pragma once

#include <cstdint>

#include "shield/types.hpp"

namespace shield {

struct LorenzParams {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
};

inline Eigen::Vector3d lorenz_field(const Eigen::Vector3d& z, const LorenzParams& p) {
    return {p.sigma * (z[1] - z[0]),
            z[0] * (p.rho - z[2]) - z[1],
            z[0] * z[1] - p.beta * z[2]};
}

inline Eigen::Matrix3d lorenz_jacobian(const Eigen::Vector3d& z, const LorenzParams& p) {
    Eigen::Matrix3d J;
    J << -p.sigma, p.sigma, 0.0,
         p.rho - z[2], -1.0, -z[0],
         z[1], z[0], -p.beta;
    return J;
}

// Forward-Euler trajectories from initial conditions uniform on [-2,2]^3.
// Each row is one flattened trajectory (z^0 ... z^L, xyz-interleaved),
// bitwise reproducible from the seed. Throws InvalidCount if count < 1.
Mat lorenz_dataset(int count, int L, double dl, uint64_t seed,
                   const LorenzParams& p = {});

} // namespace shield
