#pragma once

#include <functional>
#include <vector>

namespace evc {

// Adaptive Simpson with an absolute tolerance. Interior breakpoints are
// honored exactly: the integrand is integrated piecewise between them, which
// matters because the spectral densities are only piecewise smooth and the
// max(.,.) kernel of the tail dependence integral has a kink.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, const std::vector<double>& breakpoints = {});

}  // namespace evc
