#include "evc/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "evc/common.hpp"

namespace evc {
namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa,
             double b, double fb, double m, double fm, double whole,
             double eps, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, lm, flm);
    const double right = simpson(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
        return left + right + delta / 15.0;
    return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1) +
           adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1);
}

double piece(const std::function<double(double)>& f, double a, double b,
             double eps) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = simpson(f, a, fa, b, fb, m, fm);
    return adapt(f, a, fa, b, fb, m, fm, whole, eps, 48);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, const std::vector<double>& breakpoints) {
    if (!(b >= a)) throw OutOfRange("integrate: empty interval");
    std::vector<double> cuts;
    cuts.push_back(a);
    for (double c : breakpoints)
        if (c > a && c < b) cuts.push_back(c);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double total = 0.0;
    const double span = b - a;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double frac = (cuts[i + 1] - cuts[i]) / span;
        total += piece(f, cuts[i], cuts[i + 1], abs_tol * std::max(frac, 1e-3));
    }
    return total;
}

}  // namespace evc
