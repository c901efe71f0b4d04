// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Checks on the Gaussian modelling assumption behind the advantage
// estimator: residuals between prior, observation and posterior, normality
// tests, and a noise-level vs. correctness summary.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "noisygrpo/bayes_advantage.hpp"
#include "noisygrpo/error.hpp"
#include "noisygrpo/group_stats.hpp"
#include "noisygrpo/rng.hpp"

namespace noisygrpo {

// -- normal distribution helpers ----------------------------------------------

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Inverse standard normal CDF (Wichura, AS 241 PPND16; ~1e-16 relative).
inline double normal_quantile(double p) {
  detail::require(p > 0.0 && p < 1.0, "normal_quantile: p must be in (0, 1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
               45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
               21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
               1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
               0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
               0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
               7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

// -- residuals ----------------------------------------------------------------

enum class ResidualKind {
  ObsMinusPrior,  // r^s_hat - r^n_hat
  PostMinusObs,   // r_hat - r^s_hat
};

inline std::string_view to_string(ResidualKind k) {
  return k == ResidualKind::ObsMinusPrior ? "obs_minus_prior" : "post_minus_obs";
}

inline ResidualKind parse_residual_kind(std::string_view s) {
  if (s == "obs_minus_prior" || s == "obs-prior") return ResidualKind::ObsMinusPrior;
  if (s == "post_minus_obs" || s == "post-obs") return ResidualKind::PostMinusObs;
  throw InvalidInput("unknown residual kind '" + std::string(s) +
                     "' (expected obs_minus_prior or post_minus_obs)");
}

struct ResidualSet {
  ResidualKind kind = ResidualKind::ObsMinusPrior;
  std::vector<double> values;
  std::string run_id;
  int first_iteration = 0;
  int last_iteration = 0;
};

/// Pools residuals across reports in order. Vanilla reports carry no fused
/// prior and are rejected.
inline ResidualSet collect_residuals(std::span<const AdvantageReport> reports, ResidualKind kind) {
  ResidualSet set;
  set.kind = kind;
  for (const auto& rep : reports) {
    detail::require(rep.mode != AdvantageMode::VanillaGRPO,
                    "collect_residuals: vanilla GRPO reports have no prior/posterior fusion");
    detail::require(rep.prior_normed.size() == rep.obs_normed.size() &&
                        rep.posterior.size() == rep.obs_normed.size(),
                    "collect_residuals: report vectors differ in length");
    for (std::size_t i = 0; i < rep.obs_normed.size(); ++i) {
      const double v = kind == ResidualKind::ObsMinusPrior ? rep.obs_normed[i] - rep.prior_normed[i]
                                                           : rep.posterior[i] - rep.obs_normed[i];
      detail::require(std::isfinite(v), "collect_residuals: non-finite residual");
      set.values.push_back(v);
    }
  }
  return set;
}

// -- Shapiro-Wilk (Royston 1995, AS R94) -----------------------------------------

struct TestResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

inline constexpr std::size_t kShapiroWilkMaxN = 5000;

namespace detail {

// c[0] + c[1] x + c[2] x^2 + ...
template <std::size_t N>
double poly(const std::array<double, N>& c, double x) {
  double r = 0.0;
  for (std::size_t i = N; i-- > 0;) r = r * x + c[i];
  return r;
}

/// Royston's approximation to the Shapiro-Wilk coefficients a_1..a_{n/2}
/// (positive, for the upper half of the ordered sample).
inline std::vector<double> shapiro_wilk_coefficients(std::size_t n) {
  const std::size_t half = n / 2;
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::numbers::sqrt2 / 2.0;
    return a;
  }
  static constexpr std::array<double, 6> c1{0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
  static constexpr std::array<double, 6> c2{0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};

  const double an = static_cast<double>(n);
  std::vector<double> m(half);
  double summ2 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    m[i] = -normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
    summ2 += m[i] * m[i];
  }
  summ2 *= 2.0;
  const double ssumm2 = std::sqrt(summ2);
  const double rsn = 1.0 / std::sqrt(an);
  const double a1 = poly(c1, rsn) + m[0] / ssumm2;

  std::size_t first;
  double fac;
  if (n > 5) {
    const double a2 = poly(c2, rsn) + m[1] / ssumm2;
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                    (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
    a[1] = a2;
    first = 2;
  } else {
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    first = 1;
  }
  a[0] = a1;
  for (std::size_t i = first; i < half; ++i) a[i] = m[i] / fac;
  return a;
}

inline double shapiro_wilk_p_value(double w, std::size_t n) {
  const double an = static_cast<double>(n);
  if (n == 3) {
    constexpr double pi6 = 6.0 / std::numbers::pi;
    constexpr double stqr = std::numbers::pi / 3.0;
    return std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
  }
  static constexpr std::array<double, 2> g{-2.273, 0.459};
  static constexpr std::array<double, 4> c3{0.5440, -0.39978, 0.025054, -6.714e-4};
  static constexpr std::array<double, 4> c4{1.3822, -0.77857, 0.062767, -0.0020322};
  static constexpr std::array<double, 4> c5{-1.5861, -0.31082, -0.083751, 0.0038915};
  static constexpr std::array<double, 3> c6{-0.4803, -0.082676, 0.0030302};

  const double w1 = 1.0 - w;
  if (w1 <= 0.0) return 1.0;
  double y = std::log(w1);
  double mean, sd;
  if (n <= 11) {
    const double gamma = poly(g, an);
    if (y >= gamma) return 1e-99;
    y = -std::log(gamma - y);
    mean = poly(c3, an);
    sd = std::exp(poly(c4, an));
  } else {
    const double xx = std::log(an);
    mean = poly(c5, xx);
    sd = std::exp(poly(c6, xx));
  }
  return std::clamp(1.0 - normal_cdf((y - mean) / sd), 0.0, 1.0);
}

}  // namespace detail

/// Shapiro-Wilk W and p-value via Royston's approximation, 3 <= n <= 5000.
inline TestResult shapiro_wilk(std::span<const double> values) {
  const std::size_t n = values.size();
  detail::require(n >= 3 && n <= kShapiroWilkMaxN, "shapiro_wilk: sample size must be in [3, 5000]");
  std::vector<double> x(values.begin(), values.end());
  for (double v : x) detail::require(std::isfinite(v), "shapiro_wilk: non-finite value");
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  detail::require(range > 0.0 && range >= 1e-19 * std::max(1.0, std::fabs(x.front())),
                  "shapiro_wilk: constant sample");

  // Scale by the range for conditioning; W is scale free.
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) ss += ((v - mean) / range) * ((v - mean) / range);

  const auto a = detail::shapiro_wilk_coefficients(n);
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) num += a[i] * (x[n - 1 - i] - x[i]) / range;

  const double w = std::min(1.0, num * num / ss);
  return {w, detail::shapiro_wilk_p_value(w, n)};
}

/// Draws at most max_n values without replacement, keeping sample order.
inline std::vector<double> subsample(std::span<const double> values, std::size_t max_n,
                                     std::uint64_t seed) {
  if (values.size() <= max_n) return {values.begin(), values.end()};
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_stream(seed, {tag(StreamTag::kSubsample)});
  for (std::size_t i = 0; i < max_n; ++i) {
    const std::size_t j = i + std::uniform_int_distribution<std::size_t>(0, idx.size() - 1 - i)(rng);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(max_n);
  std::sort(idx.begin(), idx.end());
  std::vector<double> out;
  out.reserve(max_n);
  for (auto i : idx) out.push_back(values[i]);
  return out;
}

// -- Kolmogorov-Smirnov ---------------------------------------------------------

/// P(K > lambda) for the limiting Kolmogorov distribution.
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // P(K <= l) = sqrt(2 pi)/l * sum exp(-(2k-1)^2 pi^2 / (8 l^2))
    const double f = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double term = std::exp(f * (2 * k - 1) * (2 * k - 1));
      cdf += term;
      if (term < 1e-300) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

struct GaussianReference {
  double mean = 0.0;
  double variance = 1.0;
};

/// Moment-matched (population variance) reference for a sample.
inline GaussianReference fit_gaussian(std::span<const double> values) {
  return {group_mean(values), std::pow(group_std(values), 2)};
}

/// One-sample D = sup |F_n - F| with asymptotic p = Q(sqrt(n) D).
inline TestResult kolmogorov_smirnov(std::span<const double> values, GaussianReference ref) {
  detail::require(!values.empty(), "kolmogorov_smirnov: empty sample");
  detail::require(ref.variance > 0.0 && std::isfinite(ref.variance),
                  "kolmogorov_smirnov: reference variance must be > 0");
  std::vector<double> x(values.begin(), values.end());
  for (double v : x) detail::require(std::isfinite(v), "kolmogorov_smirnov: non-finite value");
  std::sort(x.begin(), x.end());
  const double sd = std::sqrt(ref.variance);
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf((x[i] - ref.mean) / sd);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_survival(std::sqrt(n) * d)};
}

// -- noise level vs. correctness ------------------------------------------------

struct NoiseCorrectnessRow {
  int decile = 0;  // covers [decile/10, (decile+1)/10), the last bin includes 1
  std::size_t count = 0;
  double mean_raw = 0.0;
  double mean_normalized = 0.0;
};

/// Per-decile means of raw and group-normalized semantic rewards; only
/// populated deciles are returned.
inline std::vector<NoiseCorrectnessRow> noise_correctness_summary(
    std::span<const RewardedGroup> groups) {
  detail::require(!groups.empty(), "noise_correctness_summary: no groups");
  std::array<double, 10> raw{}, normed{};
  std::array<std::size_t, 10> count{};
  for (const auto& g : groups) {
    g.validate();
    const auto z = normalize(g.semantic_rewards);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto bin = std::min<std::size_t>(9, static_cast<std::size_t>(g.noise_levels[i] * 10.0));
      raw[bin] += g.semantic_rewards[i];
      normed[bin] += z[i];
      ++count[bin];
    }
  }
  std::vector<NoiseCorrectnessRow> rows;
  for (std::size_t b = 0; b < 10; ++b) {
    if (count[b] == 0) continue;
    const auto c = static_cast<double>(count[b]);
    rows.push_back({static_cast<int>(b), count[b], raw[b] / c, normed[b] / c});
  }
  return rows;
}

// -- plotting exports ------------------------------------------------------------

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
};

inline std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins = 30) {
  detail::require(!values.empty() && bins > 0, "histogram: empty input");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lower = lo + width * static_cast<double>(b);
    out[b].upper = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    ++out[std::min(b, bins - 1)].count;
  }
  return out;
}

struct QQPoint {
  double theoretical = 0.0;  // standard normal quantile
  double sample = 0.0;
};

/// Sorted sample against standard normal quantiles at (i - 0.5) / n.
inline std::vector<QQPoint> qq_points(std::span<const double> values) {
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  std::vector<QQPoint> out(x.size());
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = {normal_quantile((static_cast<double>(i) + 0.5) / n), x[i]};
  }
  return out;
}

}  // namespace noisygrpo
