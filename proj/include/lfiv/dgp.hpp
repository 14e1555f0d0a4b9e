#ifndef LFIV_DGP_HPP
#define LFIV_DGP_HPP

// Simulation design:
//   W ~ N(0, I_3),  U, eps_Z, eps_X ~ N(0, 1) independent,
//   Z = W1 + 2 W2 + W3 + U + eps_Z,
//   X = -2 W1 + W2 - W3 - 2 U + eps_X,
//   Y = beta0 X + 0.25 Z^2 + U.

#include <Eigen/Dense>

#include <cstdint>
#include <random>

#include "lfiv/data.hpp"

namespace lfiv {

struct DGPConfig {
    Index n = 200;
    double beta0 = 1.0;
    std::uint64_t seed = 0;
};

inline double dgp_phi(double z) { return 0.25 * z * z; }

/// Latent draws of one sample, kept so tests can pin them.
struct DGPDraws {
    MatrixXd w;  // n x 3
    VectorXd u, eps_z, eps_x;
};

inline Dataset assemble(const DGPDraws& draws, double beta0) {
    const Index n = draws.u.size();
    Dataset d;
    d.w = draws.w;
    d.z.resize(n, 1);
    d.x.resize(n, 1);
    d.y.resize(n);
    for (Index i = 0; i < n; ++i) {
        const double w1 = draws.w(i, 0), w2 = draws.w(i, 1), w3 = draws.w(i, 2);
        const double u = draws.u(i);
        const double z = w1 + 2.0 * w2 + w3 + (u + draws.eps_z(i));
        const double x = -2.0 * w1 + w2 - w3 + (-2.0 * u + draws.eps_x(i));
        d.z(i, 0) = z;
        d.x(i, 0) = x;
        d.y(i) = beta0 * x + dgp_phi(z) + u;
    }
    return d;
}

/// Draws in row order (W1, W2, W3, U, eps_Z, eps_X) from a 64-bit Mersenne Twister.
inline DGPDraws draw_latent(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DGPDraws dr;
    dr.w.resize(n, 3);
    dr.u.resize(n);
    dr.eps_z.resize(n);
    dr.eps_x.resize(n);
    for (Index i = 0; i < n; ++i) {
        for (Index k = 0; k < 3; ++k) dr.w(i, k) = normal(rng);
        dr.u(i) = normal(rng);
        dr.eps_z(i) = normal(rng);
        dr.eps_x(i) = normal(rng);
    }
    return dr;
}

inline Dataset generate(const DGPConfig& cfg) {
    if (cfg.n < 2) throw ConfigError("simulation needs n >= 2");
    return assemble(draw_latent(cfg.n, cfg.seed), cfg.beta0);
}

} // namespace lfiv

#endif
