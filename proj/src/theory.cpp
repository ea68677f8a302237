#include "parid/theory.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "parid/error.hpp"
#include "parid/format.hpp"

namespace parid {

namespace {

void require_valid_shift(const WeightDistribution& weights, double delta) {
    if (!(delta + static_cast<double>(weights.min_support()) > 0.0)) {
        throw ConfigError("delta + min support must be > 0 (delta=" + format_double(delta) + ")");
    }
}

}  // namespace

Exponents exponents(const WeightDistribution& weights, double delta) {
    Exponents e;
    e.tau_w = weights.tail_exponent();
    if (weights.has_finite_mean()) {
        e.tau_p = 3.0 + delta / weights.mean();
        e.tau = std::min(e.tau_w, *e.tau_p);
    }
    return e;
}

TheoreticalDegreeDistribution limit_pk(const WeightDistribution& weights, double delta, std::uint64_t k_max) {
    require_valid_shift(weights, delta);
    if (!weights.has_finite_mean()) {
        throw UnsupportedRegime("no limiting degree distribution for an infinite-mean weight law");
    }
    if (k_max < 1) {
        throw PreconditionError("k_max must be >= 1");
    }
    TheoreticalDegreeDistribution dist;
    dist.delta = delta;
    dist.theta = 2.0 + delta / weights.mean();
    const auto ex = exponents(weights, delta);
    dist.tau_w = ex.tau_w;
    dist.tau_p = *ex.tau_p;
    dist.tau = *ex.tau;

    const double theta = dist.theta;
    dist.p.assign(k_max + 1, 0.0);
    double previous = 0.0;
    double sum = 0.0;
    for (std::uint64_t k = weights.min_support(); k <= k_max; ++k) {
        const double kd = static_cast<double>(k);
        const double pk = ((kd - 1.0 + delta) * previous + theta * weights.pmf(k)) / (kd + delta + theta);
        dist.p[k] = pk;
        sum += pk;
        previous = pk;
    }
    dist.tail_mass = std::max(1.0 - sum, 0.0);
    return dist;
}

double closed_form_constant(std::uint64_t m, double delta, std::uint64_t k) {
    if (!(delta + static_cast<double>(m) > 0.0) || m < 1) {
        throw ConfigError("closed form requires m >= 1 and delta + m > 0");
    }
    if (k < m) {
        return 0.0;
    }
    const long double theta = 2.0L + static_cast<long double>(delta) / m;
    const long double d = delta;
    const long double kk = k;
    const long double mm = m;
    assert(kk + d > 0);
    const long double log_p = std::log(theta) + std::lgamma(kk + d) + std::lgamma(mm + d + theta) -
                              std::lgamma(mm + d) - std::lgamma(kk + 1.0L + d + theta);
    return static_cast<double>(std::exp(log_p));
}

double asymptotic_slope(const TheoreticalDegreeDistribution& dist, std::uint64_t k_lo, std::uint64_t k_hi) {
    if (!(k_lo < k_hi) || k_hi > dist.k_max() || k_lo < 1) {
        throw PreconditionError("slope range must satisfy 1 <= k_lo < k_hi <= k_max");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(k_hi - k_lo + 1);
    for (std::uint64_t k = k_lo; k <= k_hi; ++k) {
        if (!(dist.p[k] > 0.0)) {
            throw PreconditionError("p_k vanishes at k=" + std::to_string(k) + " inside the slope range");
        }
        const double x = std::log(static_cast<double>(k));
        const double y = std::log(dist.p[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace parid
