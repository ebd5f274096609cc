#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <cstddef>
#include <span>

namespace revphase::quad {

/// 16-point Gauss–Legendre on each of `panels` equal sub-panels of [a, b].
template <class F>
double gauss_panels(F&& f, double a, double b, std::size_t panels) {
  using Rule = boost::math::quadrature::gauss<double, 16>;
  const double h = (b - a) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    sum += Rule::integrate(f, lo, p + 1 == panels ? b : lo + h);
  }
  return sum;
}

/// Same rule over consecutive intervals of a sorted breakpoint list, each
/// split into `split` equal panels.
template <class F>
double gauss_breakpoints(F&& f, std::span<const double> breaks, std::size_t split) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) sum += gauss_panels(f, breaks[i], breaks[i + 1], split);
  }
  return sum;
}

}  // namespace revphase::quad
