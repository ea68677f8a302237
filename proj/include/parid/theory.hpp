#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "parid/weights.hpp"

namespace parid {

/// Limiting degree distribution {p_k} of the process together with its
/// power-law exponents.
struct TheoreticalDegreeDistribution {
    double delta = 0.0;
    /// theta = 2 + delta / mu.
    double theta = 2.0;
    /// p[k] for k = 0..k_max; p[0] = 0.
    std::vector<double> p;
    /// 1 - sum_{k <= k_max} p_k.
    double tail_mass = 0.0;
    double tau_w = 0.0;
    double tau_p = 0.0;
    double tau = 0.0;

    std::uint64_t k_max() const noexcept { return p.empty() ? 0 : p.size() - 1; }
    /// p_k, or 0 beyond k_max.
    double at(std::uint64_t k) const noexcept { return k < p.size() ? p[k] : 0.0; }
};

struct Exponents {
    double tau_w = 0.0;
    /// Undefined when the weight law has infinite mean.
    std::optional<double> tau_p;
    std::optional<double> tau;
};

inline constexpr std::uint64_t kDefaultTheoryKMax = 1'000'000;

/// Solves p_k = [(k - 1 + delta) p_{k-1} + theta r_k] / (k + delta + theta)
/// forward from p_0 = 0. Throws UnsupportedRegime for infinite-mean weights
/// and ConfigError when delta + min support <= 0.
TheoreticalDegreeDistribution limit_pk(const WeightDistribution& weights, double delta,
                                       std::uint64_t k_max = kDefaultTheoryKMax);

/// Gamma-function form of p_k for constant initial degree m.
double closed_form_constant(std::uint64_t m, double delta, std::uint64_t k);

Exponents exponents(const WeightDistribution& weights, double delta);

/// Least-squares slope of log p_k against log k over k in [k_lo, k_hi].
double asymptotic_slope(const TheoreticalDegreeDistribution& dist, std::uint64_t k_lo, std::uint64_t k_hi);

}  // namespace parid
