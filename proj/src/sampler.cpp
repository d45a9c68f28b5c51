#include "evc/sampler.hpp"

#include <cmath>
#include <variant>

#include "evc/common.hpp"

namespace evc {
namespace {

constexpr int kEnvelopeGrid = 10000;
constexpr double kLipschitz = 100.0;

double mix_A(const SamplerState& st, double z) {
    return z - st.g(1.0 - z) + (1.0 - z) * st.h(1.0 - z);
}

double pdf_unchecked(const SamplerState& st, double z) {
    const double a = mix_A(st, z);
    const double gz = st.g(1.0 - z);
    const double hz = st.h(1.0 - z);
    const double num = 1.0 - gz + z * (1.0 - z) * st.f(1.0 - z);
    return num / a - z * (1.0 - gz) * (1.0 - hz) / (a * a);
}

}  // namespace

SamplerState make_sampler(const BasisFamily& fam, const Theta& theta,
                          std::uint64_t seed) {
    if (fam.d != 2) throw UnsupportedModel("sampler: d=2 only");
    if (theta.values.size() != fam.p() - 1)
        throw DimensionMismatch("sampler: theta length must be p-1");
    if (!theta.feasible()) throw InvalidTheta("sampler: infeasible theta");
    // copied by value so the closures outlive the caller's family object
    std::vector<std::function<double(double)>> fs, gs, hs;
    for (const auto& m : fam.basis) {
        const auto* sd = std::get_if<SpectralDensity>(&m.impl);
        if (!sd || !sd->g || !sd->h)
            throw UnsupportedModel("sampler: density models with closed-form g,h only");
        fs.push_back(sd->f);
        gs.push_back(sd->g);
        hs.push_back(sd->h);
    }

    Eigen::VectorXd wts(fam.p());
    wts.head(fam.p() - 1) = theta.values;
    wts[fam.p() - 1] = 1.0 - theta.values.sum();
    auto mix = [wts](std::vector<std::function<double(double)>> comps) {
        return [comps = std::move(comps), wts](double x) {
            double acc = 0.0;
            for (int i = 0; i < static_cast<int>(comps.size()); ++i)
                if (wts[i] != 0.0) acc += wts[i] * comps[i](x);
            return acc;
        };
    };

    SamplerState st;
    st.family = fam;
    st.theta = theta;
    st.f = mix(std::move(fs));
    st.g = mix(std::move(gs));
    st.h = mix(std::move(hs));
    st.seed = seed;

    // G_Z has two equivalent closed forms; they must agree or (f,g,h) is inconsistent.
    for (int i = 0; i <= 100; ++i) {
        const double z = static_cast<double>(i) / 100;
        const double a = mix_A(st, z);
        const double direct = z * (1.0 - st.g(1.0 - z)) / a;
        const double via_deriv = z + z * (1.0 - z) * (1.0 - st.h(1.0 - z)) / a;
        if (std::abs(direct - via_deriv) > 1e-10)
            throw Error("sampler: G_Z forms disagree, inconsistent g/h");
    }

    const double step = 1.0 / kEnvelopeGrid;
    double peak = 0.0;
    for (int i = 1; i < kEnvelopeGrid; ++i)
        peak = std::max(peak, pdf_unchecked(st, i * step));
    st.envelope = 1.05 * (peak + kLipschitz * step / 2.0);
    return st;
}

double sampler_A(const SamplerState& st, double z) {
    if (!(z >= 0.0 && z <= 1.0)) throw OutOfRange("sampler_A: z outside [0,1]");
    return mix_A(st, z);
}

double gz_cdf(const SamplerState& st, double z) {
    if (!(z >= 0.0 && z <= 1.0)) throw OutOfRange("gz_cdf: z outside [0,1]");
    if (z == 0.0) return 0.0;
    return z * (1.0 - st.g(1.0 - z)) / mix_A(st, z);
}

double gz_pdf(const SamplerState& st, double z) {
    if (!(z > 0.0 && z < 1.0)) throw OutOfRange("gz_pdf: z outside (0,1)");
    return pdf_unchecked(st, z);
}

double p_of_z(const SamplerState& st, double z) {
    if (!(z > 0.0 && z < 1.0)) throw OutOfRange("p_of_z: z outside (0,1)");
    const double a = mix_A(st, z);
    return z * (1.0 - z) * st.f(1.0 - z) / (a * pdf_unchecked(st, z));
}

double sample_Z(const SamplerState& st, Rng& rng) {
    for (;;) {
        const double z = rng.u01();
        const double u = rng.u01();
        const double d = pdf_unchecked(st, z);
        if (d > st.envelope) throw EnvelopeViolation("sample_Z: density exceeds envelope");
        if (u * st.envelope <= d) return z;
    }
}

Eigen::Vector2d sample_pair(const SamplerState& st, Rng& rng) {
    const double z = sample_Z(st, rng);
    double p = p_of_z(st, z);
    if (p < -1e-12 || p > 1.0 + 1e-12)
        throw InvalidP("sample_pair: p(Z) outside [0,1] beyond tolerance");
    p = std::min(1.0, std::max(0.0, p));
    const double coin = rng.u01();
    const double u1 = rng.u01();
    const double u2 = rng.u01();
    const double v = coin <= p ? u1 : u1 * u2;
    const double a = mix_A(st, z);
    return {std::pow(v, z / a), std::pow(v, (1.0 - z) / a)};
}

Eigen::MatrixXd sample_n(const BasisFamily& fam, const Theta& theta, int n,
                         std::uint64_t seed) {
    if (n < 1) throw DomainError("sample_n: n >= 1 required");
    const SamplerState st = make_sampler(fam, theta, seed);
    Eigen::MatrixXd out(n, 2);
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_key(seed, static_cast<std::uint64_t>(i)));
        out.row(i) = sample_pair(st, rng).transpose();
    }
    return out;
}

}  // namespace evc
