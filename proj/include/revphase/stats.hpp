#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace revphase {

struct TestReport {
  std::string test;
  double statistic = 0.0;
  double p_value = 1.0;
  double significance = 0.01;
  bool reject = false;
  std::size_t n = 0;
  /// Secondary statistics (component p-values, advisory tests).
  nlohmann::json details = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Isotropy of complex samples: F test of Var(Re) = Var(Im) and Fisher-z
/// test of Corr(Re, Im) = 0, Bonferroni-combined (p = min(1, 2 min(p_F, p_z))).
/// Zero variance in either part gives p = 0. Throws DomainError for n < 30.
TestReport circularity_test(std::span<const std::complex<double>> samples, double significance = 0.01);

struct PhaseSample {
  double f = 0.0;
  std::vector<double> phases;  // [0, 2 pi)
};

/// Maps any angle to [0, 2 pi).
double wrap_phase(double theta);
std::vector<double> phases_of(std::span<const std::complex<double>> z);

/// KS of phase / 2 pi against U[0, 1] (decision) plus the Rayleigh
/// mean-resultant test (details only). Throws DomainError for n < 30.
TestReport phase_uniformity_test(const PhaseSample& sample, double significance = 0.01);

/// sup |F_n(u) - u| for samples in [0, 1]. Sorts a copy.
double ks_uniform_statistic(std::span<const double> u);
/// Asymptotic Kolmogorov tail with Stephens' small-sample correction.
double kolmogorov_pvalue(double d, std::size_t n);
/// Rayleigh test p-value for n angles with mean resultant length rbar.
double rayleigh_pvalue(double rbar, std::size_t n);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares of log y on log x. Throws DomainError for non-positive
/// data or fewer than 3 points.
SlopeFit convergence_slope(std::span<const double> xs, std::span<const double> ys);

/// Bootstrap standard error of `stat` over `resamples` resamples with
/// replacement (indices drawn from derived seeds of `seed`).
double bootstrap_se(std::size_t n, const std::function<double(std::span<const std::size_t>)>& stat,
                    std::size_t resamples, std::uint64_t seed);

}  // namespace revphase
