#include "parid/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "parid/error.hpp"
#include "parid/format.hpp"

namespace parid {

namespace {

constexpr double kDirectSumLimit = 32.0;
constexpr std::uint64_t kMaxZetaTable = std::uint64_t{1} << 20;
const double kTableTailMass = std::ldexp(1.0, -32);

// Euler-Maclaurin tail of sum_{k >= n} k^{-s}, valid for n >= 32.
double zeta_tail_em(double s, double n) {
    const double p = std::pow(n, -s);
    const double inv = 1.0 / n;
    const double inv2 = inv * inv;
    double sum = n * p / (s - 1.0) + 0.5 * p;
    double deriv = s * p * inv;  // s n^{-s-1}
    sum += deriv / 12.0;
    deriv *= (s + 1.0) * (s + 2.0) * inv2;
    sum -= deriv / 720.0;
    deriv *= (s + 3.0) * (s + 4.0) * inv2;
    sum += deriv / 30240.0;
    deriv *= (s + 5.0) * (s + 6.0) * inv2;
    sum -= deriv / 1209600.0;
    return sum;
}

}  // namespace

double hurwitz_zeta(double s, double n) {
    if (!(s > 1.0) || !(n >= 1.0)) {
        throw std::domain_error("hurwitz_zeta requires s > 1 and n >= 1");
    }
    if (n >= kDirectSumLimit) {
        return zeta_tail_em(s, n);
    }
    // Sum the short head in reverse so small terms accumulate first.
    const double start = std::floor(n);
    double sum = zeta_tail_em(s, kDirectSumLimit);
    for (double k = kDirectSumLimit - 1.0; k >= start; k -= 1.0) {
        sum += std::pow(k, -s);
    }
    return sum;
}

struct WeightDistribution::ZetaTables {
    double tau = 0;
    std::uint64_t k_min = 1;
    double norm = 0;
    /// survival[j] = P(W > k_min + j), strictly decreasing.
    std::vector<double> survival;
    std::uint64_t table_max = 0;

    double survival_at(std::uint64_t k) const {
        if (k < k_min) {
            return 1.0;
        }
        if (k <= table_max) {
            return survival[k - k_min];
        }
        return hurwitz_zeta(tau, static_cast<double>(k) + 1.0) / norm;
    }
};

WeightDistribution::WeightDistribution(WeightKind kind) : kind_(std::move(kind)) {}

WeightDistribution WeightDistribution::constant(std::uint64_t m) {
    if (m < 1) {
        throw ConfigError("const weights need m >= 1");
    }
    WeightDistribution d{ConstantWeights{m}};
    d.mean_ = static_cast<double>(m);
    d.min_support_ = m;
    return d;
}

WeightDistribution WeightDistribution::zeta(double tau, std::uint64_t k_min) {
    if (!(tau > 1.0) || !std::isfinite(tau)) {
        throw ConfigError("zeta weights need finite tau > 1");
    }
    if (k_min < 1) {
        throw ConfigError("zeta weights need kmin >= 1");
    }
    WeightDistribution d{ZetaWeights{tau, k_min}};
    d.min_support_ = k_min;

    auto tables = std::make_shared<ZetaTables>();
    tables->tau = tau;
    tables->k_min = k_min;
    tables->norm = hurwitz_zeta(tau, static_cast<double>(k_min));

    // Smallest K with P(W > K) < 2^-32, located by doubling on the analytic
    // tail, then capped.
    std::uint64_t cutoff = k_min;
    while (cutoff < k_min + kMaxZetaTable &&
           hurwitz_zeta(tau, static_cast<double>(cutoff) + 1.0) / tables->norm >= kTableTailMass) {
        cutoff = std::max<std::uint64_t>(cutoff * 2, cutoff + 1);
    }
    cutoff = std::min(cutoff, k_min + kMaxZetaTable - 1);
    tables->table_max = cutoff;

    const std::size_t size = cutoff - k_min + 1;
    tables->survival.resize(size);
    double tail = hurwitz_zeta(tau, static_cast<double>(cutoff) + 1.0);
    for (std::size_t j = size; j-- > 0;) {
        tables->survival[j] = tail / tables->norm;
        tail += std::pow(static_cast<double>(k_min + j), -tau);
    }

    if (tau > 2.0) {
        d.mean_ = hurwitz_zeta(tau - 1.0, static_cast<double>(k_min)) / tables->norm;
    } else {
        d.mean_ = std::numeric_limits<double>::infinity();
    }
    d.zeta_ = std::move(tables);
    return d;
}

WeightDistribution WeightDistribution::explicit_pmf(std::vector<std::pair<std::uint64_t, double>> table) {
    if (table.empty()) {
        throw ConfigError("explicit weights need at least one entry");
    }
    double total = 0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto [k, r] = table[i];
        if (k < 1) {
            throw ConfigError("explicit weights: support must be positive integers");
        }
        if (i > 0 && k <= table[i - 1].first) {
            throw ConfigError("explicit weights: support must be strictly increasing");
        }
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw ConfigError("explicit weights: probabilities must be finite and >= 0");
        }
        total += r;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ConfigError("explicit weights: probabilities sum to " + format_double(total) + ", not 1");
    }
    // Zero-mass entries carry no support.
    std::erase_if(table, [](const auto& e) { return e.second == 0.0; });

    WeightDistribution d{ExplicitWeights{table}};
    d.min_support_ = table.front().first;
    d.cdf_.resize(table.size());
    d.suffix_.resize(table.size());
    double acc = 0;
    double mean = 0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        acc += table[i].second;
        d.cdf_[i] = acc;
        mean += static_cast<double>(table[i].first) * table[i].second;
    }
    d.cdf_.back() = 1.0;
    acc = 0;
    for (std::size_t i = table.size(); i-- > 0;) {
        acc += table[i].second;
        d.suffix_[i] = acc;
    }
    d.mean_ = mean;
    return d;
}

WeightDistribution WeightDistribution::parse(std::string_view spec) {
    spec = trim(spec);
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) {
        throw ConfigError("weight spec '" + std::string(spec) + "' lacks a kind prefix");
    }
    const auto kind = spec.substr(0, colon);
    std::vector<std::pair<std::string_view, std::string_view>> fields;
    auto rest = spec.substr(colon + 1);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = trim(rest.substr(0, comma));
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("weight spec field '" + std::string(item) + "' is not key=value");
        }
        fields.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
        if (comma == std::string_view::npos) {
            break;
        }
        rest = rest.substr(comma + 1);
    }

    auto bad = [&](std::string_view what) {
        return ConfigError("weight spec '" + std::string(spec) + "': " + std::string(what));
    };

    if (kind == "const") {
        if (fields.size() != 1 || fields[0].first != "m") {
            throw bad("expected const:m=<int>");
        }
        const auto m = parse_uint(fields[0].second);
        if (!m) {
            throw bad("m must be a positive integer");
        }
        return constant(*m);
    }
    if (kind == "zeta") {
        std::optional<double> tau;
        std::uint64_t k_min = 1;
        for (const auto& [key, value] : fields) {
            if (key == "tau") {
                tau = parse_double(value);
                if (!tau) {
                    throw bad("tau must be a decimal number");
                }
            } else if (key == "kmin") {
                const auto v = parse_uint(value);
                if (!v) {
                    throw bad("kmin must be a positive integer");
                }
                k_min = *v;
            } else {
                throw bad("unknown key '" + std::string(key) + "'");
            }
        }
        if (!tau) {
            throw bad("missing tau");
        }
        return zeta(*tau, k_min);
    }
    if (kind == "explicit") {
        std::vector<std::pair<std::uint64_t, double>> table;
        for (const auto& [key, value] : fields) {
            const auto k = parse_uint(key);
            const auto r = parse_double(value);
            if (!k || !r) {
                throw bad("entries must be <int>=<probability>");
            }
            table.emplace_back(*k, *r);
        }
        return explicit_pmf(std::move(table));
    }
    throw bad("unknown kind '" + std::string(kind) + "'");
}

std::string WeightDistribution::to_string() const {
    return std::visit(
        [](const auto& w) -> std::string {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, ConstantWeights>) {
                return "const:m=" + std::to_string(w.m);
            } else if constexpr (std::is_same_v<T, ZetaWeights>) {
                return "zeta:tau=" + format_double(w.tau) + ",kmin=" + std::to_string(w.k_min);
            } else {
                std::string out = "explicit:";
                for (std::size_t i = 0; i < w.table.size(); ++i) {
                    if (i > 0) {
                        out += ',';
                    }
                    out += std::to_string(w.table[i].first) + "=" + format_double(w.table[i].second);
                }
                return out;
            }
        },
        kind_);
}

double WeightDistribution::pmf(std::uint64_t k) const {
    if (k == 0) {
        return 0.0;
    }
    if (const auto* c = std::get_if<ConstantWeights>(&kind_)) {
        return k == c->m ? 1.0 : 0.0;
    }
    if (const auto* z = std::get_if<ZetaWeights>(&kind_)) {
        if (k < z->k_min) {
            return 0.0;
        }
        return std::pow(static_cast<double>(k), -z->tau) / zeta_->norm;
    }
    const auto& table = std::get<ExplicitWeights>(kind_).table;
    const auto it = std::lower_bound(table.begin(), table.end(), k,
                                     [](const auto& e, std::uint64_t key) { return e.first < key; });
    return (it != table.end() && it->first == k) ? it->second : 0.0;
}

double WeightDistribution::survival(std::uint64_t k) const {
    if (const auto* c = std::get_if<ConstantWeights>(&kind_)) {
        return k < c->m ? 1.0 : 0.0;
    }
    if (zeta_) {
        return zeta_->survival_at(k);
    }
    const auto& table = std::get<ExplicitWeights>(kind_).table;
    const auto it = std::upper_bound(table.begin(), table.end(), k,
                                     [](std::uint64_t key, const auto& e) { return key < e.first; });
    if (it == table.end()) {
        return 0.0;
    }
    return suffix_[static_cast<std::size_t>(it - table.begin())];
}

double WeightDistribution::ccdf(double x) const {
    if (std::isnan(x)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (x < 0.0) {
        return 1.0;
    }
    const double fl = std::floor(x);
    if (fl >= 0x1.0p63) {
        if (zeta_) {
            return hurwitz_zeta(zeta_->tau, fl + 1.0) / zeta_->norm;
        }
        return 0.0;
    }
    return survival(static_cast<std::uint64_t>(fl));
}

double WeightDistribution::tail_at_least(std::uint64_t k) const {
    return k == 0 ? 1.0 : survival(k - 1);
}

bool WeightDistribution::has_finite_mean() const noexcept { return std::isfinite(mean_); }

std::optional<std::uint64_t> WeightDistribution::max_support() const noexcept {
    if (const auto* c = std::get_if<ConstantWeights>(&kind_)) {
        return c->m;
    }
    if (const auto* e = std::get_if<ExplicitWeights>(&kind_)) {
        return e->table.back().first;
    }
    return std::nullopt;
}

double WeightDistribution::tail_exponent() const noexcept {
    if (const auto* z = std::get_if<ZetaWeights>(&kind_)) {
        return z->tau;
    }
    return std::numeric_limits<double>::infinity();
}

std::uint64_t WeightDistribution::sample(Stream& rng) const {
    if (const auto* c = std::get_if<ConstantWeights>(&kind_)) {
        return c->m;
    }
    if (zeta_) {
        return zeta_inverse(rng.uniform_pos());
    }
    const auto& table = std::get<ExplicitWeights>(kind_).table;
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), table.size() - 1);
    return table[idx].first;
}

double WeightDistribution::sample_real(Stream& rng) const {
    if (zeta_) {
        const ZetaTables& z = *zeta_;
        const double v = rng.uniform_pos();
        constexpr std::uint64_t kLimit = std::uint64_t{1} << 62;
        if (z.survival_at(kLimit) >= v) {
            // Far tail: the continuous inverse is accurate to many digits here.
            return std::pow((z.tau - 1.0) * z.norm * v, -1.0 / (z.tau - 1.0));
        }
        return static_cast<double>(zeta_inverse(v));
    }
    return static_cast<double>(sample(rng));
}

std::uint64_t WeightDistribution::zeta_inverse(double v) const {
    {
        const ZetaTables& z = *zeta_;
        // W = min{k : P(W > k) < v} with v uniform on (0, 1].
        const auto& s = z.survival;
        if (v > s.back()) {
            const auto it = std::lower_bound(s.begin(), s.end(), v, std::greater_equal<>{});
            return z.k_min + static_cast<std::uint64_t>(it - s.begin());
        }
        // Beyond the table: bisection on the analytic survival function.
        std::uint64_t lo = z.table_max;  // survival(lo) >= v
        const double guess = std::pow((z.tau - 1.0) * z.norm * v, -1.0 / (z.tau - 1.0));
        std::uint64_t hi = lo + 1;
        if (guess > static_cast<double>(hi) && guess < 0x1.0p62) {
            hi = static_cast<std::uint64_t>(guess);
        }
        while (z.survival_at(hi) >= v) {
            lo = hi;
            if (hi >= (std::uint64_t{1} << 62)) {
                throw std::overflow_error("zeta weight draw exceeds 2^62");
            }
            hi *= 2;
        }
        while (hi - lo > 1) {
            const std::uint64_t mid = lo + (hi - lo) / 2;
            if (z.survival_at(mid) >= v) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return hi;
    }
}

NormingQuantile WeightDistribution::norming_quantile(std::uint64_t n) const {
    if (n < 1) {
        throw PreconditionError("norming_quantile requires n >= 1");
    }
    const double level = 1.0 / static_cast<double>(n);
    const auto holds = [&](std::uint64_t k) { return tail_at_least(k) >= level; };

    std::uint64_t lo = min_support_;  // P(W >= min_support) = 1
    std::uint64_t hi = 0;
    if (const auto top = max_support()) {
        if (holds(*top)) {
            return {*top, true};
        }
        hi = *top;
    } else {
        hi = std::max<std::uint64_t>(lo * 2, lo + 1);
        while (holds(hi)) {
            lo = hi;
            if (hi >= (std::uint64_t{1} << 62)) {
                throw std::overflow_error("norming quantile exceeds 2^62");
            }
            hi *= 2;
        }
    }
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (holds(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {lo, false};
}

}  // namespace parid
