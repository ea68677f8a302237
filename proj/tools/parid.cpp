// Command-line front end: generate graphs, tabulate the limiting degree law,
// run configured verification experiments, and probe the truncation coupling
// and fractional-moment scaling.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "parid/analysis.hpp"
#include "parid/config.hpp"
#include "parid/engine.hpp"
#include "parid/error.hpp"
#include "parid/experiment.hpp"
#include "parid/format.hpp"
#include "parid/theory.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitUnsupported = 3;

struct ModelFlags {
    double delta = 0.0;
    std::string weights = "const:m=1";
    std::uint64_t t_max = 1000;
    std::uint64_t seed = 1;
    std::string rule = "parid";
    bool sequential = false;

    void attach(CLI::App* app) {
        app->add_option("--delta", delta, "Attachment offset delta")->capture_default_str();
        app->add_option("--weights", weights, "Initial-degree law: const:m=, zeta:tau=,kmin=, explicit:k=p,...")
            ->capture_default_str();
        app->add_option("--t-max,--t_max", t_max, "Number of vertices to grow to")->capture_default_str();
        app->add_option("--seed", seed, "Master seed")->capture_default_str();
        app->add_option("--rule", rule, "parid or fitness(eta=...;zeta=...)")->capture_default_str();
        app->add_flag("--sequential-update,--sequential_update", sequential,
                      "Update degrees after each edge instead of once per step");
    }

    parid::ModelParams params() const {
        parid::ModelParams p;
        p.delta = delta;
        p.weights = parid::WeightDistribution::parse(weights);
        p.t_max = t_max;
        p.seed = seed;
        p.rule = parid::parse_rule(rule);
        p.sequential_update = sequential;
        return p;
    }
};

std::vector<std::uint64_t> parse_times(const std::string& text) {
    if (text.empty()) {
        return {};
    }
    return parid::SnapshotSchedule::parse(text).times;
}

int cmd_generate(const ModelFlags& model, const std::string& snapshots, std::uint64_t reps, const std::string& out,
                 bool edges, unsigned workers) {
    auto params = model.params();
    params.record_edges = edges;
    parid::ExperimentSpec spec;
    spec.name = "generate";
    spec.params = params;
    spec.reps = reps;
    spec.snapshots = snapshots.empty() ? parid::SnapshotSchedule{{params.t_max}, {}}
                                       : parid::SnapshotSchedule::parse(snapshots);
    spec.out_dir = out;
    if (const auto errs = parid::check_spec(spec); !errs.empty()) {
        for (const auto& [key, msg] : errs) {
            std::cerr << "error: " << msg << '\n';
        }
        return kExitConfig;
    }
    const auto times = spec.snapshots.resolve(params.t_max);
    const std::filesystem::path dir(out);
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;
    const auto results = parid::run_replications<parid::RunResult>(
        reps, workers, [&](std::uint64_t r) { return parid::run(params, times, r); });
    for (std::uint64_t r = 0; r < reps; ++r) {
        for (std::size_t j = 0; j < times.size(); ++j) {
            const auto name = "rep" + std::to_string(r) + "_t" + std::to_string(times[j]) + ".csv";
            parid::write_file_atomic(dir / name, parid::histogram_csv(results[r].snapshots[j], false));
            files.push_back(name);
        }
        if (edges) {
            std::string csv = "source,target\n";
            for (const auto& e : results[r].final_state.edges()) {
                csv += std::to_string(e.source) + ',' + std::to_string(e.target) + '\n';
            }
            const auto name = "rep" + std::to_string(r) + "_edges.csv";
            parid::write_file_atomic(dir / name, csv);
            files.push_back(name);
        }
    }
    const auto config = parid::print_config(spec);
    ordered_json manifest = {{"command", "generate"},
                             {"version", parid::kVersion},
                             {"config", config},
                             {"config_hash", parid::content_hash(config)},
                             {"seed", params.seed},
                             {"reps", reps},
                             {"snapshot_times", times},
                             {"files", files}};
    parid::write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << files.size() << " files to " << dir.string() << '\n';
    return 0;
}

int cmd_theory(const std::string& weights_spec, double delta, std::uint64_t k_max, const std::string& out) {
    const auto weights = parid::WeightDistribution::parse(weights_spec);
    const auto ex = parid::exponents(weights, delta);
    if (!weights.has_finite_mean()) {
        ordered_json j = {{"weights", weights.to_string()},
                          {"delta", delta},
                          {"tau_W", ex.tau_w},
                          {"tau_P", nullptr},
                          {"tau", nullptr}};
        std::cout << j.dump() << '\n';
        std::cerr << "error: the weight law has infinite mean; the limiting p_k is not defined\n";
        return kExitUnsupported;
    }
    const auto dist = parid::limit_pk(weights, delta, k_max);
    if (out.empty()) {
        std::cout << parid::theory_json(dist, weights) << parid::theory_csv(dist);
        return 0;
    }
    const std::filesystem::path dir(out);
    std::filesystem::create_directories(dir);
    parid::write_file_atomic(dir / "theory.csv", parid::theory_csv(dist));
    parid::write_file_atomic(dir / "theory.json", parid::theory_json(dist, weights));
    std::cout << "wrote theory.csv and theory.json to " << dir.string() << '\n';
    return 0;
}

int report_outcome(const parid::ExperimentOutcome& outcome) {
    for (const auto& a : outcome.analyses) {
        std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << ' ' << a.detail_json << '\n';
    }
    std::cout << "artifacts: " << outcome.directory.string() << '\n';
    return outcome.pass() ? 0 : kExitFail;
}

int cmd_verify(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed,
               std::optional<std::uint64_t> reps, unsigned workers) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot read " << path << '\n';
        return kExitConfig;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const auto parsed = parid::parse_config(buf.str());
    if (!parsed.ok()) {
        for (const auto& e : parsed.errors) {
            std::cerr << path << ':' << e.line << ": " << e.message << '\n';
        }
        return kExitConfig;
    }
    auto spec = *parsed.spec;
    if (!out.empty()) {
        spec.out_dir = out;
    }
    if (seed) {
        spec.params.seed = *seed;
    }
    if (reps) {
        spec.reps = *reps;
    }
    return report_outcome(parid::run_experiment(spec, {workers}));
}

int cmd_couple(const ModelFlags& model, double a, std::uint64_t reps, const std::string& out, unsigned workers) {
    const auto params = model.params();
    const auto runs = parid::run_replications<parid::CouplingStats>(
        reps, workers, [&](std::uint64_t r) { return parid::coupled_run(params, a, r); });
    // Log-spaced sample of the trajectory, always including t_max.
    std::vector<std::uint64_t> times;
    for (double t = 1; t < static_cast<double>(params.t_max); t *= 1.1) {
        const auto ti = static_cast<std::uint64_t>(t);
        if (times.empty() || times.back() != ti) {
            times.push_back(ti);
        }
    }
    times.push_back(params.t_max);
    std::string csv = "t,mean_U,stderr\n";
    double final_mean = 0;
    for (const auto t : times) {
        long double sum = 0;
        long double sq = 0;
        for (const auto& run : runs) {
            const auto x = static_cast<long double>(run.u[t]);
            sum += x;
            sq += x * x;
        }
        const auto n = static_cast<long double>(reps);
        const double mean = static_cast<double>(sum / n);
        const double var = reps > 1 ? static_cast<double>((sq - sum * sum / n) / (n - 1)) : 0.0;
        const double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(reps));
        csv += std::to_string(t) + ',' + parid::format_double(mean) + ',' + parid::format_double(se) + '\n';
        final_mean = mean;
    }
    const std::filesystem::path dir(out);
    std::filesystem::create_directories(dir);
    parid::write_file_atomic(dir / "coupling_trajectory.csv", csv);
    ordered_json summary = {{"a", a},
                            {"truncation_level", runs.front().truncation_level},
                            {"t_max", params.t_max},
                            {"reps", reps},
                            {"mean_U_t_max", final_mean}};
    parid::write_file_atomic(dir / "coupling_summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump() << '\n';
    return 0;
}

int cmd_moments(const ModelFlags& model, double s, const std::string& probes, const std::string& norming,
                std::uint64_t reps, const std::string& out, unsigned workers) {
    parid::ExperimentSpec spec;
    spec.name = "moments";
    spec.params = model.params();
    spec.reps = reps;
    spec.out_dir = out;
    parid::MomentsAnalysis m;
    m.s = s;
    m.probes = parse_times(probes);
    m.norming_times = parse_times(norming);
    spec.analyses.push_back(m);
    if (const auto errs = parid::check_spec(spec); !errs.empty()) {
        for (const auto& [key, msg] : errs) {
            std::cerr << "error: " << msg << '\n';
        }
        return kExitConfig;
    }
    return report_outcome(parid::run_experiment(spec, {workers}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Preferential attachment with random initial degrees"};
    app.require_subcommand(1);
    unsigned workers = parid::default_workers();
    app.add_option("--workers", workers, "Worker threads for replications");

    ModelFlags gen_model;
    std::string gen_snapshots;
    std::uint64_t gen_reps = 1;
    std::string gen_out = "out/generate";
    bool gen_edges = false;
    auto* gen = app.add_subcommand("generate", "Grow graphs and write degree histograms");
    gen_model.attach(gen);
    gen->add_option("--snapshots", gen_snapshots, "Snapshot times: t1,t2,... or geom:base=b (default t_max)");
    gen->add_option("--reps", gen_reps, "Replications")->capture_default_str();
    gen->add_option("--out", gen_out, "Output directory")->capture_default_str();
    gen->add_flag("--edges", gen_edges, "Also write the edge list of each replication");

    std::string th_weights = "const:m=1";
    double th_delta = 0.0;
    std::uint64_t th_kmax = 1000;
    std::string th_out;
    auto* th = app.add_subcommand("theory", "Tabulate the limiting degree distribution");
    th->add_option("--weights", th_weights)->capture_default_str();
    th->add_option("--delta", th_delta)->capture_default_str();
    th->add_option("--k-max,--k_max", th_kmax)->capture_default_str();
    th->add_option("--out", th_out, "Output directory (default: print to stdout)");

    std::string vf_path;
    std::string vf_out;
    std::optional<std::uint64_t> vf_seed;
    std::optional<std::uint64_t> vf_reps;
    auto* vf = app.add_subcommand("verify", "Run the analyses of an experiment config");
    vf->add_option("config", vf_path, "Experiment config file")->required()->check(CLI::ExistingFile);
    vf->add_option("--out", vf_out, "Override out_dir");
    vf->add_option("--seed", vf_seed, "Override seed");
    vf->add_option("--reps", vf_reps, "Override reps");

    ModelFlags cp_model;
    double cp_a = 0.4;
    std::uint64_t cp_reps = 10;
    std::string cp_out = "out/couple";
    auto* cp = app.add_subcommand("couple", "Simulate the truncation coupling and record U_t");
    cp_model.attach(cp);
    cp->add_option("--a,--coupling_a", cp_a, "Truncation exponent a in (0, 1/2)")->capture_default_str();
    cp->add_option("--reps", cp_reps)->capture_default_str();
    cp->add_option("--out", cp_out)->capture_default_str();

    ModelFlags mo_model;
    mo_model.weights = "zeta:tau=1.5,kmin=1";
    double mo_s = 0.4;
    std::string mo_probes = "10,100,1000";
    std::string mo_norming;
    std::uint64_t mo_reps = 20;
    std::string mo_out = "out";
    auto* mo = app.add_subcommand("moments", "Fractional-moment scaling of degrees (infinite-mean weights)");
    mo_model.attach(mo);
    mo->add_option("--s", mo_s)->capture_default_str();
    mo->add_option("--probes", mo_probes, "Probe vertices i1,i2,...")->capture_default_str();
    mo->add_option("--norming-times,--norming_times", mo_norming, "Times for the L_t norming check");
    mo->add_option("--reps", mo_reps)->capture_default_str();
    mo->add_option("--out", mo_out)->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*gen) {
            return cmd_generate(gen_model, gen_snapshots, gen_reps, gen_out, gen_edges, workers);
        }
        if (*th) {
            return cmd_theory(th_weights, th_delta, th_kmax, th_out);
        }
        if (*vf) {
            return cmd_verify(vf_path, vf_out, vf_seed, vf_reps, workers);
        }
        if (*cp) {
            return cmd_couple(cp_model, cp_a, cp_reps, cp_out, workers);
        }
        if (*mo) {
            return cmd_moments(mo_model, mo_s, mo_probes, mo_norming, mo_reps, mo_out, workers);
        }
    } catch (const parid::UnsupportedRegime& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUnsupported;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFail;
    }
    return 0;
}
