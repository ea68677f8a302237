#include "parid/experiment.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "parid/analysis.hpp"
#include "parid/engine.hpp"
#include "parid/error.hpp"
#include "parid/format.hpp"

namespace parid {

using nlohmann::ordered_json;

namespace {

// JSON has no infinity; non-finite values are written as null.
ordered_json num(double x) {
    if (!std::isfinite(x)) {
        return nullptr;
    }
    return x;
}

std::string csv_row(std::initializer_list<std::string> cells) {
    std::string out;
    bool first = true;
    for (const auto& c : cells) {
        if (!first) {
            out += ',';
        }
        out += c;
        first = false;
    }
    out += '\n';
    return out;
}

std::string f(double x) { return format_double(x); }
std::string u(std::uint64_t x) { return std::to_string(x); }

struct Context {
    const ExperimentSpec& spec;
    const RunOptions& options;
    std::filesystem::path dir;
    std::vector<std::uint64_t> times;
    // runs[r][j]: histogram of replication r at times[j].
    std::vector<std::vector<EmpiricalStats>> runs;
    std::vector<std::string> files;

    void write(const std::string& name, std::string_view contents) {
        write_file_atomic(dir / name, contents);
        files.push_back(name);
    }
};

AnalysisOutcome run_supnorm(Context& ctx, const SupNormAnalysis& a) {
    const auto& params = ctx.spec.params;
    const auto theory = limit_pk(params.weights, params.delta, a.k_max);
    std::string csv = "t,sup_norm\n";
    std::vector<std::pair<double, double>> points;
    ordered_json rows = ordered_json::array();
    for (std::size_t j = 0; j < ctx.times.size(); ++j) {
        double sum = 0;
        for (const auto& rep : ctx.runs) {
            sum += sup_norm_deviation(rep[j], theory);
        }
        const double mean = sum / static_cast<double>(ctx.runs.size());
        points.emplace_back(static_cast<double>(ctx.times[j]), mean);
        csv += csv_row({u(ctx.times[j]), f(mean)});
        rows.push_back({{"t", ctx.times[j]}, {"sup_norm", num(mean)}});
    }
    ctx.write("decay.csv", csv);

    const double gamma = decay_exponent(points);
    const double ratio = points.back().second > 0 ? points.front().second / points.back().second
                                                  : std::numeric_limits<double>::infinity();
    bool pass = gamma > a.gamma_lo && gamma < a.gamma_hi && ratio >= a.min_ratio;

    ordered_json spots = ordered_json::array();
    if (!a.spot.empty()) {
        ReplicationAggregate agg;
        for (const auto& rep : ctx.runs) {
            agg.add(rep.back());
        }
        for (const auto k : a.spot) {
            const double mean = agg.mean(k);
            const double se = agg.standard_error(k);
            const double z = se > 0 ? std::abs(mean - theory.at(k)) / se
                                    : (mean == theory.at(k) ? 0.0 : std::numeric_limits<double>::infinity());
            const bool ok = z <= 3.0;
            pass = pass && ok;
            spots.push_back({{"k", k},
                             {"mean_p_k", num(mean)},
                             {"stderr", num(se)},
                             {"theory_p_k", num(theory.at(k))},
                             {"z", num(z)},
                             {"pass", ok}});
        }
    }
    ordered_json detail = {{"gamma", num(gamma)},
                           {"gamma_range", {num(a.gamma_lo), num(a.gamma_hi)}},
                           {"first_last_ratio", num(ratio)},
                           {"min_ratio", num(a.min_ratio)},
                           {"rows", rows},
                           {"spot", spots}};
    return {"supnorm", pass, detail.dump()};
}

AnalysisOutcome run_hill(Context& ctx, const HillAnalysis& a) {
    const auto& params = ctx.spec.params;
    double expected = 0;
    if (a.expect) {
        expected = *a.expect;
    } else {
        const auto ex = exponents(params.weights, params.delta);
        expected = ex.tau ? *ex.tau : ex.tau_w;
    }
    double sum = 0;
    ordered_json per_rep = ordered_json::array();
    for (const auto& rep : ctx.runs) {
        const auto sorted = rep.back().sorted_degrees_desc();
        const double h = hill_estimator_fraction(sorted, a.top);
        sum += h;
        per_rep.push_back(num(h));
    }
    const double mean = sum / static_cast<double>(ctx.runs.size());
    const bool pass = std::abs(mean - expected) <= a.tol;
    ordered_json detail = {{"t", ctx.times.back()},  {"top", num(a.top)},  {"hill_mean", num(mean)},
                           {"expected", num(expected)}, {"tol", num(a.tol)}, {"per_rep", per_rep}};
    return {"hill", pass, detail.dump()};
}

AnalysisOutcome run_ccdf_bound(Context& ctx, const CcdfBoundAnalysis&) {
    const auto& weights = ctx.spec.params.weights;
    bool pass = true;
    std::size_t violations = 0;
    double max_violation = 0;
    for (std::size_t r = 0; r < ctx.runs.size(); ++r) {
        const auto report = ccdf_lower_bound_check(ctx.runs[r].back(), weights);
        violations += report.violations;
        max_violation = std::max(max_violation, report.max_violation);
        pass = pass && report.pass();
        if (r == 0) {
            std::string csv = "k,p_geq_k,bound,slack\n";
            for (const auto& row : report.rows) {
                csv += csv_row({u(row.k), f(row.p_at_least), f(row.bound), f(row.slack)});
            }
            ctx.write("ccdf_bound.csv", csv);
        }
    }
    ordered_json detail = {{"t", ctx.times.back()},
                           {"reps_checked", ctx.runs.size()},
                           {"violations", violations},
                           {"max_violation", num(max_violation)}};
    return {"ccdf_bound", pass, detail.dump()};
}

AnalysisOutcome run_coupling(Context& ctx, const CouplingAnalysis& a) {
    const auto& spec = ctx.spec;
    const double exponent = a.a ? *a.a : *spec.coupling_a;
    std::vector<std::uint64_t> horizons = a.horizons;
    if (horizons.empty()) {
        for (const auto div : {100ULL, 10ULL, 1ULL}) {
            if (spec.params.t_max / div >= 1) {
                horizons.push_back(spec.params.t_max / div);
            }
        }
    }
    const auto report = coupling_growth(spec.params, exponent, horizons, spec.reps, ctx.options.workers);
    std::string csv = "t,mean_U,stderr\n";
    ordered_json rows = ordered_json::array();
    for (const auto& row : report.rows) {
        csv += csv_row({u(row.t), f(row.mean_u), f(row.stderr_)});
        rows.push_back({{"t", row.t}, {"mean_U", num(row.mean_u)}, {"stderr", num(row.stderr_)}});
    }
    ctx.write("coupling.csv", csv);
    bool pass = report.slope < a.b_max;
    ordered_json detail = {{"a", num(exponent)}, {"b", num(report.slope)}, {"b_max", num(a.b_max)}, {"rows", rows}};

    if (a.marginal_t > 0) {
        ModelParams p = spec.params;
        p.t_max = a.marginal_t;
        const auto coupled = run_replications<EmpiricalStats>(
            spec.reps, ctx.options.workers, [&](std::uint64_t r) { return coupled_run(p, exponent, r).g_final; });
        // Offset replication indices so the plain runs draw independent weights.
        const std::array<std::uint64_t, 1> at{p.t_max};
        const auto plain = run_replications<EmpiricalStats>(spec.reps, ctx.options.workers, [&](std::uint64_t r) {
            return run(p, at, spec.reps + r).snapshots.back();
        });
        const auto cmp = compare_aggregates(ReplicationAggregate(coupled), ReplicationAggregate(plain));
        pass = pass && cmp.pass();
        detail["marginal"] = {{"t", p.t_max},
                              {"compared", cmp.compared},
                              {"max_z", num(cmp.max_z)},
                              {"worst_k", cmp.worst_k},
                              {"pass", cmp.pass()}};
    }
    return {"coupling", pass, detail.dump()};
}

AnalysisOutcome run_moments(Context& ctx, const MomentsAnalysis& a) {
    const auto& spec = ctx.spec;
    const auto report = fractional_moment_scaling(spec.params, a.s, a.probes, spec.reps, ctx.options.workers);
    std::string csv = "i,mean_d_s,stderr\n";
    ordered_json rows = ordered_json::array();
    for (const auto& row : report.rows) {
        csv += csv_row({u(row.i), f(row.mean), f(row.stderr_)});
        rows.push_back({{"i", row.i}, {"mean_d_s", num(row.mean)}, {"stderr", num(row.stderr_)}});
    }
    ctx.write("moments.csv", csv);
    bool pass = std::abs(report.slope - report.expected_slope) <= a.tol;
    ordered_json detail = {{"s", num(a.s)},
                           {"t", spec.params.t_max},
                           {"slope", num(report.slope)},
                           {"expected_slope", num(report.expected_slope)},
                           {"tol", num(a.tol)},
                           {"rows", rows}};
    if (!a.norming_times.empty()) {
        const auto reps = a.norming_reps > 0 ? a.norming_reps : spec.reps;
        const auto norming =
            norming_moment_check(spec.params.weights, a.s, a.norming_times, reps, spec.params.seed, ctx.options.workers);
        std::string ncsv = "t,a_t,mean_L_s,mean_L_neg_s,upper_ratio,lower_ratio\n";
        ordered_json nrows = ordered_json::array();
        for (const auto& row : norming.rows) {
            ncsv += csv_row({u(row.t), u(row.a_t), f(row.mean_pos), f(row.mean_neg), f(row.upper_ratio),
                             f(row.lower_ratio)});
            nrows.push_back({{"t", row.t},
                             {"a_t", row.a_t},
                             {"upper_ratio", num(row.upper_ratio)},
                             {"lower_ratio", num(row.lower_ratio)}});
        }
        ctx.write("norming.csv", ncsv);
        pass = pass && norming.pass();
        detail["norming"] = {{"reps", reps},
                             {"upper_spread", num(norming.upper_spread)},
                             {"lower_max", num(norming.lower_max)},
                             {"pass", norming.pass()},
                             {"rows", nrows}};
    }
    return {"moments", pass, detail.dump()};
}

AnalysisOutcome run_theory_table(Context& ctx, const TheoryTableAnalysis& a) {
    const auto& params = ctx.spec.params;
    const auto dist = limit_pk(params.weights, params.delta, a.k_max);
    ctx.write("theory.csv", theory_csv(dist));
    ctx.write("theory.json", theory_json(dist, params.weights));
    bool pass = true;
    ordered_json detail = {{"k_max", a.k_max}, {"tau", num(dist.tau)}, {"tail_mass", num(dist.tail_mass)}};
    if (a.slope_hi > 0) {
        const double slope = asymptotic_slope(dist, a.slope_lo, a.slope_hi);
        pass = std::abs(slope + dist.tau) <= a.tol;
        detail["slope"] = num(slope);
        detail["slope_range"] = {a.slope_lo, a.slope_hi};
        detail["tol"] = num(a.tol);
    }
    return {"theory_table", pass, detail.dump()};
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            throw std::runtime_error("write to " + tmp.string() + " failed");
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string histogram_csv(const EmpiricalStats& stats, bool with_ccdf) {
    std::string out = with_ccdf ? "k,N_k,p_k,p_geq_k\n" : "k,N_k,p_k\n";
    const double n = static_cast<double>(stats.total_count());
    // Walk degrees from the top so p_geq_k accumulates exactly in integers.
    std::vector<std::string> rows;
    rows.reserve(stats.counts.size());
    std::uint64_t at_least = 0;
    for (auto it = stats.counts.rbegin(); it != stats.counts.rend(); ++it) {
        const auto [k, c] = *it;
        at_least += c;
        std::string row = u(k) + ',' + u(c) + ',' + f(static_cast<double>(c) / n);
        if (with_ccdf) {
            row += ',' + f(static_cast<double>(at_least) / n);
        }
        rows.push_back(std::move(row));
    }
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        out += *it;
        out += '\n';
    }
    return out;
}

std::string theory_csv(const TheoreticalDegreeDistribution& dist) {
    std::string out = "k,p_k\n";
    for (std::uint64_t k = 1; k <= dist.k_max(); ++k) {
        out += u(k) + ',' + f(dist.p[k]) + '\n';
    }
    return out;
}

std::string theory_json(const TheoreticalDegreeDistribution& dist, const WeightDistribution& weights) {
    ordered_json j = {{"weights", weights.to_string()},
                      {"delta", num(dist.delta)},
                      {"k_max", dist.k_max()},
                      {"theta", num(dist.theta)},
                      {"tau_W", num(dist.tau_w)},
                      {"tau_P", num(dist.tau_p)},
                      {"tau", num(dist.tau)},
                      {"tail_mass", num(dist.tail_mass)}};
    return j.dump(2) + "\n";
}

std::string content_hash(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
    if (const auto errs = check_spec(spec); !errs.empty()) {
        throw ConfigError(errs.front().first + ": " + errs.front().second);
    }
    const auto started = std::chrono::steady_clock::now();
    const auto started_at = utc_timestamp();

    Context ctx{spec, options, std::filesystem::path(spec.out_dir) / spec.name, spec.snapshots.resolve(spec.params.t_max),
                {}, {}};
    std::filesystem::create_directories(ctx.dir);

    if (!ctx.times.empty()) {
        ctx.runs = run_replications<std::vector<EmpiricalStats>>(
            spec.reps, options.workers, [&](std::uint64_t r) { return run(spec.params, ctx.times, r).snapshots; });
        for (std::size_t j = 0; j < ctx.times.size(); ++j) {
            ctx.write("hist_t" + u(ctx.times[j]) + ".csv", histogram_csv(ctx.runs[0][j], true));
            ReplicationAggregate agg;
            for (const auto& rep : ctx.runs) {
                agg.add(rep[j]);
            }
            std::string csv = "k,mean_p_k,stderr\n";
            for (const auto k : agg.degrees()) {
                csv += csv_row({u(k), f(agg.mean(k)), f(agg.standard_error(k))});
            }
            ctx.write("mean_p_t" + u(ctx.times[j]) + ".csv", csv);
        }
    }

    ExperimentOutcome outcome;
    outcome.directory = ctx.dir;
    for (const auto& analysis : spec.analyses) {
        outcome.analyses.push_back(std::visit(
            [&](const auto& a) -> AnalysisOutcome {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, SupNormAnalysis>) {
                    return run_supnorm(ctx, a);
                } else if constexpr (std::is_same_v<T, HillAnalysis>) {
                    return run_hill(ctx, a);
                } else if constexpr (std::is_same_v<T, CcdfBoundAnalysis>) {
                    return run_ccdf_bound(ctx, a);
                } else if constexpr (std::is_same_v<T, CouplingAnalysis>) {
                    return run_coupling(ctx, a);
                } else if constexpr (std::is_same_v<T, MomentsAnalysis>) {
                    return run_moments(ctx, a);
                } else {
                    return run_theory_table(ctx, a);
                }
            },
            analysis));
    }

    ordered_json report = {{"name", spec.name}, {"pass", outcome.pass()}, {"analyses", ordered_json::array()}};
    for (const auto& a : outcome.analyses) {
        report["analyses"].push_back(
            {{"name", a.name}, {"pass", a.pass}, {"detail", ordered_json::parse(a.detail_json)}});
    }
    ctx.write("report.json", report.dump(2) + "\n");

    const auto config_text = print_config(spec);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    ordered_json manifest = {
        {"name", spec.name},
        {"version", kVersion},
        {"config", config_text},
        {"config_hash", content_hash(config_text)},
        {"seed", spec.params.seed},
        {"reps", spec.reps},
        {"rng", {{"generator", "philox4x32-10"},
                 {"key", spec.params.seed},
                 {"counter_layout", "draw index | substream | replication"},
                 {"substreams", {{"weights", 0}, {"endpoints", 1}, {"fitness", 2}, {"coupling", 3}, {"analysis", 4}}}}},
        {"snapshot_times", ctx.times},
        {"workers", options.workers},
        {"started_at", started_at},
        {"wall_seconds", seconds},
        {"files", ctx.files},
        {"pass", outcome.pass()}};
    write_file_atomic(ctx.dir / "manifest.json", manifest.dump(2) + "\n");
    return outcome;
}

}  // namespace parid
