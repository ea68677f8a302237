#include "parid/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "parid/error.hpp"
#include "parid/format.hpp"

namespace parid {

namespace {

// Above this many edges per step the hit counts are drawn as one multinomial.
constexpr std::uint64_t kPerEdgeLimit = 16;

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) {
        throw std::overflow_error("degree or edge count overflows 64 bits");
    }
    return out;
}

std::vector<std::pair<std::string_view, std::string_view>> split_fields(std::string_view body,
                                                                       char sep) {
    std::vector<std::pair<std::string_view, std::string_view>> fields;
    while (!body.empty()) {
        const auto cut = body.find(sep);
        const auto item = trim(body.substr(0, cut));
        if (!item.empty()) {
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError("expected key=value, got '" + std::string(item) + "'");
            }
            fields.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
        }
        if (cut == std::string_view::npos) {
            break;
        }
        body = body.substr(cut + 1);
    }
    return fields;
}

}  // namespace

FitnessLaw FitnessLaw::parse(std::string_view spec) {
    spec = trim(spec);
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) {
        throw ConfigError("fitness law '" + std::string(spec) + "' lacks a kind prefix");
    }
    const auto kind = spec.substr(0, colon);
    const auto fields = split_fields(spec.substr(colon + 1), ',');
    auto get = [&](std::string_view key) {
        for (const auto& [k, v] : fields) {
            if (k == key) {
                if (const auto x = parse_double(v)) {
                    return *x;
                }
                throw ConfigError("fitness law '" + std::string(spec) + "': bad number for " + std::string(key));
            }
        }
        throw ConfigError("fitness law '" + std::string(spec) + "': missing " + std::string(key));
    };
    FitnessLaw law;
    if (kind == "const") {
        law = constant(get("c"));
    } else if (kind == "uniform") {
        law = uniform(get("lo"), get("hi"));
    } else if (kind == "exp") {
        law = exponential(get("rate"));
    } else {
        throw ConfigError("unknown fitness law kind '" + std::string(kind) + "'");
    }
    return law;
}

std::string FitnessLaw::to_string() const {
    switch (kind) {
        case Kind::Constant:
            return "const:c=" + format_double(a);
        case Kind::Uniform:
            return "uniform:lo=" + format_double(a) + ",hi=" + format_double(b);
        case Kind::Exponential:
            return "exp:rate=" + format_double(a);
    }
    return {};
}

double FitnessLaw::sample(Stream& rng) const {
    switch (kind) {
        case Kind::Constant:
            return a;
        case Kind::Uniform:
            return a + (b - a) * rng.uniform();
        case Kind::Exponential:
            return -std::log(rng.uniform_pos()) / a;
    }
    return a;
}

void FitnessLaw::validate(std::string_view name) const {
    const std::string label(name);
    switch (kind) {
        case Kind::Constant:
            if (!(a >= 0.0) || !std::isfinite(a)) {
                throw ConfigError(label + " fitness must be a finite constant >= 0");
            }
            break;
        case Kind::Uniform:
            if (!(a >= 0.0) || !(b >= a) || !std::isfinite(b)) {
                throw ConfigError(label + " fitness uniform law needs 0 <= lo <= hi < inf");
            }
            break;
        case Kind::Exponential:
            if (!(a > 0.0) || !std::isfinite(a)) {
                throw ConfigError(label + " fitness exponential law needs rate > 0");
            }
            break;
    }
}

bool FitnessLaw::positive_with_positive_probability() const noexcept {
    switch (kind) {
        case Kind::Constant:
            return a > 0.0;
        case Kind::Uniform:
            return b > 0.0;
        case Kind::Exponential:
            return true;
    }
    return false;
}

AttachmentRule parse_rule(std::string_view spec) {
    spec = trim(spec);
    if (spec == "parid") {
        return ParidRule{};
    }
    constexpr std::string_view prefix = "fitness(";
    if (spec.starts_with(prefix) && spec.ends_with(')')) {
        const auto body = spec.substr(prefix.size(), spec.size() - prefix.size() - 1);
        FitnessRule rule;
        for (const auto& [key, value] : split_fields(body, ';')) {
            if (key == "eta") {
                rule.eta = FitnessLaw::parse(value);
            } else if (key == "zeta") {
                rule.zeta = FitnessLaw::parse(value);
            } else {
                throw ConfigError("unknown fitness rule key '" + std::string(key) + "'");
            }
        }
        return rule;
    }
    throw ConfigError("unknown attachment rule '" + std::string(spec) + "'");
}

std::string rule_to_string(const AttachmentRule& rule) {
    if (const auto* f = std::get_if<FitnessRule>(&rule)) {
        return "fitness(eta=" + f->eta.to_string() + ";zeta=" + f->zeta.to_string() + ")";
    }
    return "parid";
}

void ModelParams::validate() const {
    if (t_max < 1) {
        throw ConfigError("t_max must be >= 1");
    }
    if (!std::isfinite(delta)) {
        throw ConfigError("delta must be finite");
    }
    if (const auto* f = std::get_if<FitnessRule>(&rule)) {
        f->eta.validate("eta");
        f->zeta.validate("zeta");
        if (!f->eta.positive_with_positive_probability() && !f->zeta.positive_with_positive_probability()) {
            throw ConfigError("fitness laws eta and zeta are both identically zero");
        }
        return;
    }
    if (!(delta + static_cast<double>(weights.min_support()) > 0.0)) {
        throw ConfigError("delta + min support of the weight law must be > 0 (delta=" + format_double(delta) +
                          ", min support=" + std::to_string(weights.min_support()) + ")");
    }
}

GraphState GraphState::init(const ModelParams& params, EngineStreams& rng) {
    params.validate();
    GraphState g(params);
    const std::uint64_t w = params.weights.sample(rng.weights);
    g.t_ = 1;
    g.total_weight_ = w;
    g.degrees_.reserve(params.t_max + 1);
    g.initial_.reserve(params.t_max + 1);
    g.sampler_.reserve(params.t_max + 1);
    g.degrees_ = {w, w};
    g.initial_ = {0, w};
    const bool fitness = std::holds_alternative<FitnessRule>(params.rule);
    for (std::size_t i = 0; i < 2; ++i) {
        if (fitness) {
            const auto& f = std::get<FitnessRule>(params.rule);
            g.eta_.push_back(f.eta.sample(rng.fitness));
            g.zeta_.push_back(f.zeta.sample(rng.fitness));
            g.fitness_total_ += g.attachment_weight(i);
        }
        g.sampler_.push_back(g.attachment_weight(i));
    }
    if (params.record_edges) {
        g.edges_.assign(w, Edge{1, 0});
    }
    return g;
}

double GraphState::attachment_weight(std::size_t i) const {
    const auto d = static_cast<double>(degrees_[i]);
    if (!eta_.empty()) {
        return eta_[i] * d + zeta_[i];
    }
    return d + params_.delta;
}

double GraphState::expected_total_weight() const {
    if (!eta_.empty()) {
        return static_cast<double>(fitness_total_);
    }
    return 2.0 * static_cast<double>(total_weight_) + static_cast<double>(degrees_.size()) * params_.delta;
}

void GraphState::step(EngineStreams& rng) {
    const std::uint64_t w = params_.weights.sample(rng.weights);
    if (eta_.empty()) {
        step_parid(rng, w);
    } else {
        step_fitness(rng, w);
    }
}

void GraphState::draw_frozen(std::uint64_t w, Stream& rng) {
    hits_.clear();
    if (w <= kPerEdgeLimit) {
        for (std::uint64_t l = 0; l < w; ++l) {
            hits_.emplace_back(sampler_.sample(rng), 1);
        }
    } else {
        sampler_.sample_multinomial(w, rng, [this](std::size_t i, std::uint64_t c) { hits_.emplace_back(i, c); });
    }
}

void GraphState::commit_hits(std::uint64_t source) {
    for (const auto& [i, c] : hits_) {
        degrees_[i] = checked_add(degrees_[i], c);
        if (params_.record_edges) {
            edges_.insert(edges_.end(), c, Edge{source, i});
        }
    }
    for (const auto& [i, c] : hits_) {
        const double before = sampler_.value(i);
        const double after = attachment_weight(i);
        if (before != after) {
            if (!eta_.empty()) {
                fitness_total_ += static_cast<long double>(after) - before;
            }
            sampler_.set(i, after);
        }
    }
}

void GraphState::add_vertex(std::uint64_t w, Stream& fitness_rng) {
    total_weight_ = checked_add(total_weight_, w);
    degrees_.push_back(w);
    initial_.push_back(w);
    if (const auto* f = std::get_if<FitnessRule>(&params_.rule)) {
        eta_.push_back(f->eta.sample(fitness_rng));
        zeta_.push_back(f->zeta.sample(fitness_rng));
        fitness_total_ += attachment_weight(degrees_.size() - 1);
    }
    sampler_.push_back(attachment_weight(degrees_.size() - 1));
    ++t_;
}

void GraphState::refresh_sampler() {
    const double expected = expected_total_weight();
    if (sampler_.refresh(expected)) {
        if (std::abs(sampler_.total() - expected) > FenwickSampler::kDriftTolerance * std::abs(expected)) {
            throw std::logic_error("sampler total " + format_double(sampler_.total()) +
                                   " disagrees with exact attachment weight " + format_double(expected));
        }
    }
}

void GraphState::step_parid(EngineStreams& rng, std::uint64_t w) {
    const std::uint64_t source = t_ + 1;
    if (params_.sequential_update) {
        hits_.clear();
        for (std::uint64_t l = 0; l < w; ++l) {
            const std::size_t i = sampler_.sample(rng.endpoints);
            degrees_[i] = checked_add(degrees_[i], 1);
            sampler_.set(i, attachment_weight(i));
            if (params_.record_edges) {
                edges_.push_back(Edge{source, i});
            }
        }
    } else {
        draw_frozen(w, rng.endpoints);
        commit_hits(source);
    }
    add_vertex(w, rng.fitness);
    refresh_sampler();
}

void GraphState::step_fitness(EngineStreams& rng, std::uint64_t w) {
    if (!(sampler_.total() > 0.0) || !(fitness_total_ > 0)) {
        throw ConfigError("fitness attachment weights sum to zero at t=" + std::to_string(t_));
    }
    draw_frozen(w, rng.endpoints);
    commit_hits(t_ + 1);
    add_vertex(w, rng.fitness);
    refresh_sampler();
}

EmpiricalStats GraphState::histogram() const {
    return EmpiricalStats::from_degrees(t_, total_weight_, degrees_);
}

void GraphState::check_invariants() const {
    if (degrees_.size() != t_ + 1) {
        throw std::logic_error("vertex count differs from t+1");
    }
    std::uint64_t sum = 0;
    for (const auto d : degrees_) {
        sum += d;
    }
    if (sum != 2 * total_weight_) {
        throw std::logic_error("degree sum differs from 2 L_t");
    }
    for (std::size_t i = 1; i < degrees_.size(); ++i) {
        if (degrees_[i] < initial_[i]) {
            throw std::logic_error("degree below initial degree at vertex " + std::to_string(i));
        }
    }
    if (degrees_[0] < initial_[1]) {
        throw std::logic_error("d_0 below W_1");
    }
    const double expected = expected_total_weight();
    if (std::abs(sampler_.total() - expected) > FenwickSampler::kDriftTolerance * std::abs(expected)) {
        throw std::logic_error("sampler total drifted beyond tolerance");
    }
    for (std::size_t i = 0; i < degrees_.size(); ++i) {
        if (eta_.empty() && !(sampler_.value(i) > 0.0)) {
            throw std::logic_error("non-positive attachment weight at vertex " + std::to_string(i));
        }
    }
}

RunResult run(const ModelParams& params, std::span<const std::uint64_t> snapshot_times,
              std::uint64_t replication) {
    params.validate();
    if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end())) {
        throw PreconditionError("snapshot times must be sorted");
    }
    if (!snapshot_times.empty() && (snapshot_times.front() < 1 || snapshot_times.back() > params.t_max)) {
        throw PreconditionError("snapshot times must lie in [1, t_max]");
    }
    EngineStreams rng(params.seed, replication);
    RunResult result{GraphState::init(params, rng), {}};
    result.snapshots.reserve(snapshot_times.size());
    auto next = snapshot_times.begin();
    auto capture = [&] {
        while (next != snapshot_times.end() && *next == result.final_state.time()) {
            result.snapshots.push_back(result.final_state.histogram());
            ++next;
        }
    };
    capture();
    while (result.final_state.time() < params.t_max) {
        result.final_state.step(rng);
        capture();
    }
    return result;
}

}  // namespace parid
