#include "evc/trig.hpp"

#include <cmath>
#include <numbers>

#include "evc/common.hpp"

namespace evc {
namespace {

constexpr double kPi = std::numbers::pi;

struct Piecewise {
    double a, b, brk;
    double w1, w2;  // angular frequencies of the two pieces
};

Piecewise make_piecewise(double a, double b, double brk) {
    return {a, b, brk, 2.0 * kPi / brk, kPi / (2.0 * (1.0 - brk))};
}

double f1(const Piecewise& p, double t) {
    if (t <= p.brk) return 0.5 * p.a * (1.0 - std::cos(p.w1 * t));
    return p.a * p.b * (1.0 - std::cos(p.w2 * (t - p.brk)));
}

double h1(const Piecewise& p, double z) {
    if (z <= p.brk) return 0.5 * p.a * (z - std::sin(p.w1 * z) / p.w1);
    const double s = z - p.brk;
    return 0.5 * p.a * p.brk + p.a * p.b * (s - std::sin(p.w2 * s) / p.w2);
}

double g1(const Piecewise& p, double z) {
    if (z <= p.brk)
        return 0.5 * p.a *
               (0.5 * z * z - z * std::sin(p.w1 * z) / p.w1 -
                (std::cos(p.w1 * z) - 1.0) / (p.w1 * p.w1));
    const double s = z - p.brk;
    return 0.25 * p.a * p.brk * p.brk +
           p.a * p.b *
               (0.5 * (z * z - p.brk * p.brk) - z * std::sin(p.w2 * s) / p.w2 -
                (std::cos(p.w2 * s) - 1.0) / (p.w2 * p.w2));
}

// g1(1) as a function of b alone, with a eliminated through h1(1) = 2.
double g1_total(double brk, double b) {
    const double a = 2.0 / (0.5 * brk + b * (1.0 - brk) * (1.0 - 2.0 / kPi));
    return g1(make_piecewise(a, b, brk), 1.0);
}

TrigConstants solve_constants(double brk) {
    if (!(brk > 0.0 && brk < 1.0))
        throw DomainError("trig_constants: breakpoint outside (0,1)");
    double lo = 0.0, hi = 1.0;
    while (g1_total(brk, hi) < 1.0) {
        hi *= 2.0;
        if (hi > 1e12) throw DomainError("trig_constants: no normalizing b");
    }
    // g1(1) is increasing in b on the bracket; plain bisection suffices.
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (g1_total(brk, mid) < 1.0 ? lo : hi) = mid;
    }
    const double b = 0.5 * (lo + hi);
    const double a = 2.0 / (0.5 * brk + b * (1.0 - brk) * (1.0 - 2.0 / kPi));
    return {a, b, kPi};
}

const Piecewise& default_piecewise() {
    static const Piecewise p = [] {
        const TrigConstants c = trig_constants();
        return make_piecewise(c.a, c.b, kTrigBreakpoint);
    }();
    return p;
}

void check_unit(double z, const char* who) {
    if (!(z >= 0.0 && z <= 1.0)) throw OutOfRange(std::string(who) + ": argument outside [0,1]");
}

double density(const Piecewise& p, int i, double t) {
    switch (i) {
        case 1: return f1(p, t);
        case 2: return f1(p, 1.0 - t);
        case 3: return kPi * std::sin(kPi * t);
    }
    throw OutOfRange("trig basis: index outside 1..3");
}

double anti_h(const Piecewise& p, int i, double z) {
    switch (i) {
        case 1: return h1(p, z);
        case 2: return 2.0 - h1(p, 1.0 - z);
        case 3: return 1.0 - std::cos(kPi * z);
    }
    throw OutOfRange("trig basis: index outside 1..3");
}

double anti_g(const Piecewise& p, int i, double z) {
    switch (i) {
        case 1: return g1(p, z);
        case 2: return 1.0 - h1(p, 1.0 - z) + g1(p, 1.0 - z);
        case 3: return std::sin(kPi * z) / kPi - z * std::cos(kPi * z);
    }
    throw OutOfRange("trig basis: index outside 1..3");
}

PickandsModel density_model(const Piecewise& p, int i) {
    SpectralDensity sd;
    sd.f = [p, i](double t) { return density(p, i, t); };
    sd.g = [p, i](double z) { return anti_g(p, i, z); };
    sd.h = [p, i](double z) { return anti_h(p, i, z); };
    if (i == 1) sd.breakpoints = {p.brk};
    if (i == 2) sd.breakpoints = {1.0 - p.brk};
    return {sd, 2};
}

}  // namespace

TrigConstants trig_constants() {
    const double c = kPi;
    const double b = kPi * kPi / (8.0 - 6.0 * kPi + 2.0 * kPi * kPi);
    const double a =
        (12.0 * kPi * kPi - 36.0 * kPi + 48.0) / (3.0 * kPi * kPi - 8.0 * kPi + 8.0);
    return {a, b, c};
}

TrigConstants trig_constants(double breakpoint) { return solve_constants(breakpoint); }

double trig_density(int i, double t) {
    check_unit(t, "trig_density");
    return density(default_piecewise(), i, t);
}

double trig_g(int i, double z) {
    check_unit(z, "trig_g");
    return anti_g(default_piecewise(), i, z);
}

double trig_h(int i, double z) {
    check_unit(z, "trig_h");
    return anti_h(default_piecewise(), i, z);
}

double trig_A(int i, double z) {
    check_unit(z, "trig_A");
    const Piecewise& p = default_piecewise();
    return z - anti_g(p, i, 1.0 - z) + (1.0 - z) * anti_h(p, i, 1.0 - z);
}

std::vector<PickandsModel> trig_basis() { return trig_basis(kTrigBreakpoint); }

std::vector<PickandsModel> trig_basis(double breakpoint) {
    const TrigConstants c = breakpoint == kTrigBreakpoint ? trig_constants()
                                                          : trig_constants(breakpoint);
    const Piecewise p = make_piecewise(c.a, c.b, breakpoint);
    return {density_model(p, 1), density_model(p, 2), density_model(p, 3)};
}

std::vector<PickandsModel> nonidentifiable_atomic_basis() {
    const double th = 1.0 / 3.0, tt = 2.0 / 3.0;
    std::vector<PickandsModel> out;
    out.push_back({Atoms{{{0.0, 1.0}, {1.0, 1.0}}}, 2});
    out.push_back({Atoms{{{th, 1.0}, {tt, 1.0}}}, 2});
    out.push_back({Atoms{{{0.0, 0.5}, {tt, 1.5}}}, 2});
    out.push_back({Atoms{{{th, 1.5}, {1.0, 0.5}}}, 2});
    return out;
}

}  // namespace evc
