#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "evc/common.hpp"
#include "evc/family.hpp"
#include "evc/sampler.hpp"
#include "evc/stats.hpp"
#include "evc/trig.hpp"

using namespace evc;

namespace {
BasisFamily fam() { return make_basis_family(trig_basis()); }
}  // namespace

TEST_CASE("construction validates the model") {
    CHECK_THROWS_AS(make_sampler(fam(), Theta{Eigen::Vector3d(0.1, 0.1, 0.1)}),
                    DimensionMismatch);
    CHECK_THROWS_AS(make_sampler(fam(), Theta{Eigen::Vector2d(0.7, 0.7)}),
                    InvalidTheta);
    CHECK_THROWS_AS(make_sampler(fam(), Theta{Eigen::Vector2d(-0.1, 0.5)}),
                    InvalidTheta);
    const BasisFamily atoms = make_basis_family(nonidentifiable_atomic_basis());
    CHECK_THROWS_AS(make_sampler(atoms, Theta{Eigen::Vector3d(0.2, 0.2, 0.2)}),
                    UnsupportedModel);
}

TEST_CASE("Z distribution internals") {
    const SamplerState st = make_sampler(fam(), Theta{Eigen::Vector2d(0.0, 0.0)});
    CHECK(st.envelope > 1.8);
    CHECK(st.envelope < 2.4);

    CHECK(gz_cdf(st, 0.0) == 0.0);
    CHECK(gz_cdf(st, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gz_cdf(st, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gz_pdf(st, 0.5) == doctest::Approx(2.152133715128514).epsilon(1e-12));
    CHECK(p_of_z(st, 0.5) == doctest::Approx(0.5353448566088349).epsilon(1e-12));

    // cdf is monotone, pdf nonnegative and below the envelope
    double prev = 0.0;
    for (int k = 1; k < 100; ++k) {
        const double z = k / 100.0;
        const double c = gz_cdf(st, z);
        CHECK(c >= prev);
        prev = c;
        const double p = gz_pdf(st, z);
        CHECK(p >= 0.0);
        CHECK(p <= st.envelope);
        const double acc = p_of_z(st, z);
        CHECK(acc >= 0.0);
        CHECK(acc <= 1.0);
    }

    // density vs central differences of the cdf
    for (int k = 1; k <= 9; ++k) {
        const double z = k / 10.0;
        const double hs = 1e-5;
        const double fd = (gz_cdf(st, z + hs) - gz_cdf(st, z - hs)) / (2 * hs);
        CHECK(gz_pdf(st, z) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("envelopes stay tight across the parameter set") {
    for (auto th : {Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1.0, 0.0),
                    Eigen::Vector2d(0.1, 0.1), Eigen::Vector2d(0.05, 0.9)}) {
        const SamplerState st = make_sampler(fam(), Theta{th});
        CHECK(st.envelope > 1.8);
        CHECK(st.envelope < 2.5);
    }
}

TEST_CASE("sampling is deterministic per substream") {
    const BasisFamily f = fam();
    const Theta th{Eigen::Vector2d(0.3, 0.2)};
    const Eigen::MatrixXd a = sample_n(f, th, 10, 99);
    const Eigen::MatrixXd b = sample_n(f, th, 10, 99);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd c = sample_n(f, th, 10, 100);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
    // row i depends only on derive_key(seed, i), not on n
    const Eigen::MatrixXd d = sample_n(f, th, 8, 99);
    CHECK((a.topRows(8) - d).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(sample_n(f, th, 0, 99), DomainError);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(a(i, j) > 0.0);
            CHECK(a(i, j) < 1.0);
        }
}

TEST_CASE("margins and joint law at moderate n") {
    const BasisFamily f = fam();
    const Theta th{Eigen::Vector2d(0.3, 0.2)};
    const int n = 20000;
    const Eigen::MatrixXd x = sample_n(f, th, n, 2024);
    auto unif = [](double v) { return v; };
    const double crit = ks_critical(0.01, n);
    CHECK(ks_statistic(x.col(0), unif) < crit);
    CHECK(ks_statistic(x.col(1), unif) < crit);

    // empirical copula near the model at a few interior points
    for (double u1 : {0.3, 0.5, 0.7})
        for (double u2 : {0.3, 0.5, 0.7}) {
            int count = 0;
            for (int i = 0; i < n; ++i)
                if (x(i, 0) <= u1 && x(i, 1) <= u2) ++count;
            const double emp = static_cast<double>(count) / n;
            const double mod = copula_eval(f, th, Eigen::Vector2d(u1, u2));
            CHECK(std::abs(emp - mod) < 0.015);
        }
}

TEST_CASE("Z draws follow G_Z") {
    const SamplerState st = make_sampler(fam(), Theta{Eigen::Vector2d(0.5, 0.5)}, 7);
    Rng rng(derive_key(7, 1234));
    const int n = 20000;
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = sample_Z(st, rng);
    const double ks = ks_statistic(z, [&](double v) { return gz_cdf(st, v); });
    CHECK(ks < ks_critical(0.01, n));
}
