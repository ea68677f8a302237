#include "parid/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "parid/error.hpp"
#include "parid/format.hpp"

namespace parid {

namespace {

std::vector<std::uint64_t> parse_uint_list(std::string_view text, char sep) {
    std::vector<std::uint64_t> out;
    text = trim(text);
    while (!text.empty()) {
        const auto cut = text.find(sep);
        const auto item = trim(text.substr(0, cut));
        const auto v = parse_uint(item);
        if (!v) {
            throw ConfigError("'" + std::string(item) + "' is not a non-negative integer");
        }
        out.push_back(*v);
        if (cut == std::string_view::npos) {
            break;
        }
        text = text.substr(cut + 1);
    }
    return out;
}

std::string join_uints(const std::vector<std::uint64_t>& v, char sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += std::to_string(v[i]);
    }
    return out;
}

double require_double(std::string_view key, std::string_view value) {
    const auto v = parse_double(trim(value));
    if (!v) {
        throw ConfigError(std::string(key) + ": '" + std::string(value) + "' is not a decimal number");
    }
    return *v;
}

std::uint64_t require_uint(std::string_view key, std::string_view value) {
    const auto v = parse_uint(trim(value));
    if (!v) {
        throw ConfigError(std::string(key) + ": '" + std::string(value) + "' is not a non-negative integer");
    }
    return *v;
}

// Splits on `sep` at parenthesis/bracket depth zero, outside double quotes.
std::vector<std::string_view> split_top_level(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    int depth = 0;
    bool quoted = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '"') {
            quoted = !quoted;
        } else if (quoted) {
            continue;
        } else if (c == '(' || c == '[') {
            ++depth;
        } else if (c == ')' || c == ']') {
            --depth;
        } else if (c == sep && depth == 0) {
            out.push_back(trim(text.substr(start, i - start)));
            start = i + 1;
        }
    }
    const auto last = trim(text.substr(start));
    if (!last.empty() || !out.empty()) {
        out.push_back(last);
    }
    return out;
}

std::string_view unquote(std::string_view v) {
    v = trim(v);
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
        return v.substr(1, v.size() - 2);
    }
    return v;
}

bool valid_name(std::string_view name) {
    if (name.empty() || name == "." || name == "..") {
        return false;
    }
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
               c == '.';
    });
}

}  // namespace

SnapshotSchedule SnapshotSchedule::parse(std::string_view text) {
    text = trim(text);
    SnapshotSchedule s;
    if (text.starts_with("geom:")) {
        const auto body = trim(text.substr(5));
        if (!body.starts_with("base=")) {
            throw ConfigError("snapshots: expected geom:base=<b>");
        }
        const double base = require_double("snapshots", body.substr(5));
        if (!(base > 1.0)) {
            throw ConfigError("snapshots: geometric base must exceed 1");
        }
        s.geometric_base = base;
        return s;
    }
    s.times = parse_uint_list(text, ',');
    return s;
}

std::string SnapshotSchedule::to_string() const {
    if (geometric_base) {
        return "geom:base=" + format_double(*geometric_base);
    }
    return join_uints(times, ',');
}

std::vector<std::uint64_t> SnapshotSchedule::resolve(std::uint64_t t_max) const {
    std::vector<std::uint64_t> out;
    if (geometric_base) {
        double t = 1.0;
        while (t < static_cast<double>(t_max)) {
            const auto ti = static_cast<std::uint64_t>(std::llround(t));
            if (out.empty() || out.back() != ti) {
                out.push_back(ti);
            }
            t *= *geometric_base;
        }
        if (out.empty() || out.back() != t_max) {
            out.push_back(t_max);
        }
        return out;
    }
    out = times;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string analysis_name(const Analysis& a) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, SupNormAnalysis>) {
                return "supnorm";
            } else if constexpr (std::is_same_v<T, HillAnalysis>) {
                return "hill";
            } else if constexpr (std::is_same_v<T, CcdfBoundAnalysis>) {
                return "ccdf_bound";
            } else if constexpr (std::is_same_v<T, CouplingAnalysis>) {
                return "coupling";
            } else if constexpr (std::is_same_v<T, MomentsAnalysis>) {
                return "moments";
            } else {
                return "theory_table";
            }
        },
        a);
}

Analysis parse_analysis(std::string_view text) {
    text = trim(text);
    std::string_view head = text;
    std::string_view body;
    if (const auto open = text.find('('); open != std::string_view::npos) {
        if (text.back() != ')') {
            throw ConfigError("analysis '" + std::string(text) + "' has unbalanced parentheses");
        }
        head = trim(text.substr(0, open));
        body = text.substr(open + 1, text.size() - open - 2);
    }
    std::map<std::string, std::string, std::less<>> args;
    for (const auto item : split_top_level(body, ',')) {
        if (item.empty()) {
            continue;
        }
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("analysis argument '" + std::string(item) + "' is not key=value");
        }
        args.emplace(std::string(trim(item.substr(0, eq))), std::string(trim(item.substr(eq + 1))));
    }
    auto take = [&](std::string_view key) -> std::optional<std::string> {
        const auto it = args.find(key);
        if (it == args.end()) {
            return std::nullopt;
        }
        auto v = it->second;
        args.erase(it);
        return v;
    };
    auto finish = [&](Analysis a) {
        if (!args.empty()) {
            throw ConfigError("analysis " + std::string(head) + ": unknown argument '" + args.begin()->first + "'");
        }
        return a;
    };

    if (head == "supnorm") {
        SupNormAnalysis a;
        if (auto v = take("k_max")) a.k_max = require_uint("k_max", *v);
        if (auto v = take("gamma_lo")) a.gamma_lo = require_double("gamma_lo", *v);
        if (auto v = take("gamma_hi")) a.gamma_hi = require_double("gamma_hi", *v);
        if (auto v = take("min_ratio")) a.min_ratio = require_double("min_ratio", *v);
        if (auto v = take("spot")) a.spot = parse_uint_list(*v, ';');
        return finish(a);
    }
    if (head == "hill") {
        HillAnalysis a;
        if (auto v = take("top")) a.top = require_double("top", *v);
        if (auto v = take("expect")) a.expect = require_double("expect", *v);
        if (auto v = take("tol")) a.tol = require_double("tol", *v);
        if (!(a.top > 0.0 && a.top < 1.0)) {
            throw ConfigError("hill: top must lie in (0, 1)");
        }
        return finish(a);
    }
    if (head == "ccdf_bound") {
        return finish(CcdfBoundAnalysis{});
    }
    if (head == "coupling") {
        CouplingAnalysis a;
        if (auto v = take("a")) a.a = require_double("a", *v);
        if (auto v = take("horizons")) a.horizons = parse_uint_list(*v, ';');
        if (auto v = take("marginal_t")) a.marginal_t = require_uint("marginal_t", *v);
        if (auto v = take("b_max")) a.b_max = require_double("b_max", *v);
        return finish(a);
    }
    if (head == "moments") {
        MomentsAnalysis a;
        if (auto v = take("s")) a.s = require_double("s", *v);
        if (auto v = take("probes")) a.probes = parse_uint_list(*v, ';');
        if (auto v = take("tol")) a.tol = require_double("tol", *v);
        if (auto v = take("norming_times")) a.norming_times = parse_uint_list(*v, ';');
        if (auto v = take("norming_reps")) a.norming_reps = require_uint("norming_reps", *v);
        return finish(a);
    }
    if (head == "theory_table") {
        TheoryTableAnalysis a;
        if (auto v = take("k_max")) a.k_max = require_uint("k_max", *v);
        if (auto v = take("slope_lo")) a.slope_lo = require_uint("slope_lo", *v);
        if (auto v = take("slope_hi")) a.slope_hi = require_uint("slope_hi", *v);
        if (auto v = take("tol")) a.tol = require_double("tol", *v);
        return finish(a);
    }
    throw ConfigError("unknown analysis '" + std::string(head) + "'");
}

std::string print_analysis(const Analysis& analysis) {
    std::vector<std::string> args;
    auto put = [&](std::string_view key, const std::string& value) { args.push_back(std::string(key) + "=" + value); };
    std::visit(
        [&](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, SupNormAnalysis>) {
                put("k_max", std::to_string(a.k_max));
                put("gamma_lo", format_double(a.gamma_lo));
                put("gamma_hi", format_double(a.gamma_hi));
                put("min_ratio", format_double(a.min_ratio));
                if (!a.spot.empty()) put("spot", join_uints(a.spot, ';'));
            } else if constexpr (std::is_same_v<T, HillAnalysis>) {
                put("top", format_double(a.top));
                if (a.expect) put("expect", format_double(*a.expect));
                put("tol", format_double(a.tol));
            } else if constexpr (std::is_same_v<T, CouplingAnalysis>) {
                if (a.a) put("a", format_double(*a.a));
                if (!a.horizons.empty()) put("horizons", join_uints(a.horizons, ';'));
                if (a.marginal_t > 0) put("marginal_t", std::to_string(a.marginal_t));
                put("b_max", format_double(a.b_max));
            } else if constexpr (std::is_same_v<T, MomentsAnalysis>) {
                put("s", format_double(a.s));
                if (!a.probes.empty()) put("probes", join_uints(a.probes, ';'));
                put("tol", format_double(a.tol));
                if (!a.norming_times.empty()) put("norming_times", join_uints(a.norming_times, ';'));
                if (a.norming_reps > 0) put("norming_reps", std::to_string(a.norming_reps));
            } else if constexpr (std::is_same_v<T, TheoryTableAnalysis>) {
                put("k_max", std::to_string(a.k_max));
                if (a.slope_hi > 0) {
                    put("slope_lo", std::to_string(a.slope_lo));
                    put("slope_hi", std::to_string(a.slope_hi));
                }
                put("tol", format_double(a.tol));
            }
        },
        analysis);
    std::string out = analysis_name(analysis);
    if (!args.empty()) {
        out += '(';
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            out += args[i];
        }
        out += ')';
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> check_spec(const ExperimentSpec& spec) {
    std::vector<std::pair<std::string, std::string>> errs;
    const auto& p = spec.params;
    if (!valid_name(spec.name)) {
        errs.emplace_back("name", "name '" + spec.name + "' is not a valid directory component");
    }
    if (spec.reps < 1) {
        errs.emplace_back("reps", "reps must be >= 1");
    }
    if (p.t_max < 1) {
        errs.emplace_back("t_max", "t_max must be >= 1");
    }
    try {
        p.validate();
    } catch (const ConfigError& e) {
        errs.emplace_back("delta", std::string(e.what()) + " (delta + min{x: x in support of W} > 0 is required)");
    }
    for (const auto t : spec.snapshots.resolve(std::max<std::uint64_t>(p.t_max, 1))) {
        if (t < 1 || t > p.t_max) {
            errs.emplace_back("snapshots", "snapshot time " + std::to_string(t) + " outside [1, t_max]");
            break;
        }
    }
    if (spec.coupling_a && !(*spec.coupling_a > 0.0 && *spec.coupling_a < 0.5)) {
        errs.emplace_back("coupling_a", "coupling_a must lie in (0, 1/2)");
    }

    const double tau_w = p.weights.tail_exponent();
    const bool finite_mean = p.weights.has_finite_mean();
    const bool parid_rule = std::holds_alternative<ParidRule>(p.rule);
    const auto snapshot_count = spec.snapshots.resolve(std::max<std::uint64_t>(p.t_max, 1)).size();
    for (const auto& analysis : spec.analyses) {
        const auto name = analysis_name(analysis);
        std::visit(
            [&](const auto& a) {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, SupNormAnalysis>) {
                    if (!finite_mean) {
                        errs.emplace_back("analyses", "supnorm analysis requires finite-mean weights");
                    }
                    if (!parid_rule) {
                        errs.emplace_back("analyses", "supnorm analysis requires the parid rule");
                    }
                    if (snapshot_count < 3) {
                        errs.emplace_back("analyses", "supnorm analysis requires at least three snapshot times");
                    }
                } else if constexpr (std::is_same_v<T, HillAnalysis>) {
                    if (snapshot_count < 1) {
                        errs.emplace_back("analyses", "hill analysis requires a snapshot");
                    }
                } else if constexpr (std::is_same_v<T, CcdfBoundAnalysis>) {
                    if (snapshot_count < 1) {
                        errs.emplace_back("analyses", "ccdf_bound analysis requires a snapshot");
                    }
                } else if constexpr (std::is_same_v<T, CouplingAnalysis>) {
                    const auto ca = a.a ? a.a : spec.coupling_a;
                    if (!ca || !(*ca > 0.0 && *ca < 0.5)) {
                        errs.emplace_back("analyses", "coupling analysis requires a in (0, 1/2) (or coupling_a)");
                    }
                    if (!parid_rule) {
                        errs.emplace_back("analyses", "coupling analysis requires the parid rule");
                    }
                } else if constexpr (std::is_same_v<T, MomentsAnalysis>) {
                    if (!(tau_w > 1.0 && tau_w < 2.0)) {
                        errs.emplace_back("analyses", "moments analysis requires tau_W in (1,2) (infinite-mean "
                                                      "power-law weights)");
                    } else if (!(a.s >= 0.0 && a.s < tau_w - 1.0)) {
                        errs.emplace_back("analyses", "moments analysis requires 0 <= s < tau_W - 1");
                    }
                    if (a.probes.empty()) {
                        errs.emplace_back("analyses", "moments analysis requires probe vertices");
                    }
                    for (const auto i : a.probes) {
                        if (i > p.t_max) {
                            errs.emplace_back("analyses", "moments probe " + std::to_string(i) + " exceeds t_max");
                        }
                    }
                    if (!a.norming_times.empty() && !(a.s > 0.0)) {
                        errs.emplace_back("analyses", "norming check requires s > 0");
                    }
                } else if constexpr (std::is_same_v<T, TheoryTableAnalysis>) {
                    if (!finite_mean) {
                        errs.emplace_back("analyses", "theory_table analysis requires finite-mean weights");
                    }
                    if (a.slope_hi > 0 && !(a.slope_lo >= 1 && a.slope_lo < a.slope_hi && a.slope_hi <= a.k_max)) {
                        errs.emplace_back("analyses", "theory_table slope range must satisfy 1 <= lo < hi <= k_max");
                    }
                }
            },
            analysis);
        (void)name;
    }
    return errs;
}

ConfigParseResult parse_config(std::string_view text) {
    ConfigParseResult result;
    ExperimentSpec spec;
    std::map<std::string, std::size_t, std::less<>> line_of;
    std::size_t line_no = 0;
    auto error = [&](std::size_t line, std::string msg) { result.errors.push_back({line, std::move(msg)}); };

    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            error(line_no, "expected key = value");
            continue;
        }
        const std::string key(trim(line.substr(0, eq)));
        const auto value = unquote(line.substr(eq + 1));
        if (line_of.contains(key)) {
            error(line_no, "duplicate key '" + key + "'");
            continue;
        }
        line_of.emplace(key, line_no);
        try {
            if (key == "name") {
                spec.name = std::string(value);
            } else if (key == "delta") {
                spec.params.delta = require_double(key, value);
            } else if (key == "weights") {
                spec.params.weights = WeightDistribution::parse(value);
            } else if (key == "t_max") {
                spec.params.t_max = require_uint(key, value);
            } else if (key == "seed") {
                spec.params.seed = require_uint(key, value);
            } else if (key == "reps") {
                spec.reps = require_uint(key, value);
            } else if (key == "snapshots") {
                spec.snapshots = SnapshotSchedule::parse(value);
            } else if (key == "rule") {
                spec.params.rule = parse_rule(value);
            } else if (key == "coupling_a") {
                spec.coupling_a = require_double(key, value);
            } else if (key == "sequential_update") {
                if (value != "true" && value != "false") {
                    throw ConfigError("sequential_update must be true or false");
                }
                spec.params.sequential_update = value == "true";
            } else if (key == "out_dir") {
                spec.out_dir = std::string(value);
            } else if (key == "analyses") {
                auto body = trim(value);
                if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
                    throw ConfigError("analyses must be a bracketed list, e.g. [supnorm, hill(top=0.01)]");
                }
                for (const auto item : split_top_level(body.substr(1, body.size() - 2), ',')) {
                    if (item.empty()) {
                        continue;
                    }
                    try {
                        spec.analyses.push_back(parse_analysis(unquote(item)));
                    } catch (const ConfigError& e) {
                        error(line_no, e.what());
                    }
                }
            } else {
                error(line_no, "unknown key '" + key + "'");
            }
        } catch (const ConfigError& e) {
            error(line_no, e.what());
        }
    }

    if (!line_of.contains("weights")) {
        error(0, "missing required key 'weights'");
    }
    if (!line_of.contains("t_max")) {
        error(0, "missing required key 't_max'");
    }
    if (result.errors.empty()) {
        for (const auto& [key, msg] : check_spec(spec)) {
            std::size_t line = 0;
            if (const auto it = line_of.find(key); it != line_of.end()) {
                line = it->second;
            } else if (key == "delta") {
                if (const auto w = line_of.find("weights"); w != line_of.end()) {
                    line = w->second;
                }
            }
            error(line, msg);
        }
    }
    if (result.errors.empty()) {
        result.spec = std::move(spec);
    }
    return result;
}

std::string print_config(const ExperimentSpec& spec) {
    std::ostringstream out;
    auto quote = [](const std::string& v) { return '"' + v + '"'; };
    out << "name = " << quote(spec.name) << '\n';
    out << "delta = " << format_double(spec.params.delta) << '\n';
    out << "weights = " << quote(spec.params.weights.to_string()) << '\n';
    out << "t_max = " << spec.params.t_max << '\n';
    out << "seed = " << spec.params.seed << '\n';
    out << "reps = " << spec.reps << '\n';
    out << "rule = " << quote(rule_to_string(spec.params.rule)) << '\n';
    if (spec.params.sequential_update) {
        out << "sequential_update = true\n";
    }
    const auto snaps = spec.snapshots.to_string();
    if (!snaps.empty()) {
        out << "snapshots = " << quote(snaps) << '\n';
    }
    if (spec.coupling_a) {
        out << "coupling_a = " << format_double(*spec.coupling_a) << '\n';
    }
    out << "analyses = [";
    for (std::size_t i = 0; i < spec.analyses.size(); ++i) {
        if (i > 0) {
            out << ", ";
        }
        out << quote(print_analysis(spec.analyses[i]));
    }
    out << "]\n";
    out << "out_dir = " << quote(spec.out_dir) << '\n';
    return out.str();
}

}  // namespace parid
