#pragma once

#include <vector>

#include "evc/pickands.hpp"

namespace evc {

// Normalization constants of the trigonometric basis. With these, each f_i
// has unit first moments in both coordinates (g_i(1) = 1, h_i(1) = 2).
struct TrigConstants {
    double a;  // amplitude of f1 (and f2)
    double b;  // relative amplitude of f1's second piece
    double c;  // amplitude of f3
};

inline constexpr double kTrigBreakpoint = 2.0 / 3.0;

// Closed forms: c = pi, b = pi^2/(8 - 6 pi + 2 pi^2),
// a = (12 pi^2 - 36 pi + 48)/(3 pi^2 - 8 pi + 8).
TrigConstants trig_constants();

// Same family with the piecewise breakpoint of f1 moved to `breakpoint`.
// a is eliminated via h1(1) = 2 and b is then root-found from g1(1) = 1
// (bisection, tolerance 1e-12). Recovers trig_constants() at 2/3.
TrigConstants trig_constants(double breakpoint);

// f_i, g_i(z) = int_0^z t f_i, h_i(z) = int_0^z f_i, and the induced
// Pickands function A_i, all at the default breakpoint. i is 1-based.
double trig_density(int i, double t);
double trig_g(int i, double z);
double trig_h(int i, double z);
double trig_A(int i, double z);

// The three basis elements as density models with closed-form g and h.
std::vector<PickandsModel> trig_basis();
std::vector<PickandsModel> trig_basis(double breakpoint);

// Four atomic spectral measures whose Pickands functions are linearly
// dependent: A1/4 + 3 A2/4 = (A3 + A4)/2. Exercises the rank check of the
// projection estimator; not a usable basis.
std::vector<PickandsModel> nonidentifiable_atomic_basis();

}  // namespace evc
