#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "evc/family.hpp"
#include "evc/rng.hpp"

namespace evc {

// Immutable sampler for a mixture of density models (d=2, closed-form g, h).
// f, g, h are the theta-mixtures of the basis functions; envelope bounds the
// density of Z for rejection sampling.
struct SamplerState {
    BasisFamily family;
    Theta theta;
    std::function<double(double)> f, g, h;
    double envelope = 0.0;
    std::uint64_t seed = 0;
};

// Validates the family (all elements SpectralDensity with closed-form g, h),
// requires feasible theta, cross-checks the two algebraic forms of G_Z on a
// grid, and computes the rejection envelope:
//   1.05 * (grid max of the Z-density + L * step / 2) over 1e4 points,
// where L = 100 dominates the density's Lipschitz constant (crude bound from
// sup f <= a*b, sup |f'| <= 3*pi*a*b/2, A >= 1/2).
SamplerState make_sampler(const BasisFamily& fam, const Theta& theta,
                          std::uint64_t seed = 0);

// G_Z(z) = z (1 - g(1-z)) / A(z) and its density.
double gz_cdf(const SamplerState& st, double z);
double gz_pdf(const SamplerState& st, double z);

// Mixture Pickands function and the acceptance probability
// p(z) = z (1-z) A''(z) / (A(z) G_Z'(z)) of the V = U1 branch.
double sampler_A(const SamplerState& st, double z);
double p_of_z(const SamplerState& st, double z);

// One draw of Z by rejection against the uniform envelope. Consumes pairs
// (z, u) from the stream until u * envelope <= gz_pdf(z).
double sample_Z(const SamplerState& st, Rng& rng);

// One pair from C(., theta): Z, then V = U1 with probability p(Z) else U1*U2
// (three further uniforms, in the order p-coin, U1, U2), then
// X1 = V^{Z/A(Z)}, X2 = V^{(1-Z)/A(Z)}.
Eigen::Vector2d sample_pair(const SamplerState& st, Rng& rng);

// n pairs; row i is computed from substream derive_key(seed, i) only, so the
// result is independent of evaluation order.
Eigen::MatrixXd sample_n(const BasisFamily& fam, const Theta& theta, int n,
                         std::uint64_t seed);

}  // namespace evc
