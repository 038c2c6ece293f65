#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "sgp/common.hpp"

namespace sgp {

enum class DistFamily { normal, lognormal };

inline std::string family_name(DistFamily f) {
  return f == DistFamily::normal ? "normal" : "lognormal";
}

inline DistFamily family_from_name(const std::string& s) {
  if (s == "normal") return DistFamily::normal;
  if (s == "lognormal") return DistFamily::lognormal;
  throw InvalidArgumentError("unknown distribution family: " + s);
}

// Degenerate-sample floors: keeps NLL finite when all samples coincide.
// Log-normal sigma lives in log space, normal sigma in sample units (checks).
inline constexpr double kSigmaFloorLog = 0.05;
inline constexpr double kSigmaFloorLinear = 0.5;

inline double default_sigma_floor(DistFamily family) {
  return family == DistFamily::lognormal ? kSigmaFloorLog : kSigmaFloorLinear;
}

// One fitted or predicted 1-D distribution. For the log-normal family (mu,
// sigma) parameterize the underlying normal of ln t.
struct DistParams {
  DistFamily family = DistFamily::lognormal;
  double mu = 0.0;
  double sigma = 1.0;

  void validate() const {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || !(sigma > 0.0))
      throw InvalidArgumentError("DistParams: mu/sigma must be finite with sigma > 0");
  }
};

inline double standard_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

inline double cdf(const DistParams& params, double t) {
  params.validate();
  if (!std::isfinite(t)) throw InvalidArgumentError("cdf: t must be finite");
  if (params.family == DistFamily::normal)
    return standard_normal_cdf((t - params.mu) / params.sigma);
  if (t <= 0.0) return 0.0;  // log-normal support is (0, inf)
  return standard_normal_cdf((std::log(t) - params.mu) / params.sigma);
}

namespace detail {

// Inverse standard normal by bisection; converges to the floating-point
// collapse of the bracket.
inline double standard_normal_quantile(double p) {
  double lo = -42.0, hi = 42.0;
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (standard_normal_cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline double quantile(const DistParams& params, double p) {
  params.validate();
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must be in (0,1)");
  const double z = detail::standard_normal_quantile(p);
  if (params.family == DistFamily::normal) return params.mu + params.sigma * z;
  return std::exp(params.mu + params.sigma * z);
}

inline double t95(const DistParams& params, double confidence = 0.95) {
  return quantile(params, confidence);
}

// Maximum-likelihood fit: sample mean and (population) standard deviation, on
// ln(samples) for the log-normal family. Sigma is floored so degenerate
// samples still yield a usable distribution.
inline DistParams fit_empirical(std::span<const double> samples, DistFamily family,
                                double sigma_floor) {
  if (samples.size() < 2) throw InvalidArgumentError("fit_empirical: need >= 2 samples");
  if (!(sigma_floor > 0.0))
    throw InvalidArgumentError("fit_empirical: sigma_floor must be > 0");
  double mean = 0.0;
  if (family == DistFamily::lognormal) {
    for (double t : samples) {
      if (!(t > 0.0)) throw DomainError("fit_empirical: log-normal samples must be positive");
      mean += std::log(t);
    }
  } else {
    for (double t : samples) mean += t;
  }
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double t : samples) {
    const double v = family == DistFamily::lognormal ? std::log(t) : t;
    var += (v - mean) * (v - mean);
  }
  var /= static_cast<double>(samples.size());
  DistParams out;
  out.family = family;
  out.mu = mean;
  out.sigma = std::max(std::sqrt(var), sigma_floor);
  return out;
}

inline DistParams fit_empirical(std::span<const double> samples, DistFamily family) {
  return fit_empirical(samples, family, default_sigma_floor(family));
}

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;  // ln(2*pi)/2

// Mean negative log-likelihood of the samples under params.
inline double nll(const DistParams& params, std::span<const double> samples) {
  params.validate();
  if (samples.empty()) throw InvalidArgumentError("nll: need >= 1 sample");
  double total = 0.0;
  for (double t : samples) {
    if (params.family == DistFamily::lognormal) {
      if (!(t > 0.0)) throw DomainError("nll: log-normal samples must be positive");
      const double z = (std::log(t) - params.mu) / params.sigma;
      total += std::log(t) + std::log(params.sigma) + kHalfLog2Pi + 0.5 * z * z;
    } else {
      const double z = (t - params.mu) / params.sigma;
      total += std::log(params.sigma) + kHalfLog2Pi + 0.5 * z * z;
    }
  }
  return total / static_cast<double>(samples.size());
}

}  // namespace sgp
