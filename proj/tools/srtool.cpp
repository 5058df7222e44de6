// srtool: batch driver for the library. One binary, five subcommands:
//   region-causal     feasible (r1, delta_r) frontier, causal side info
//   bounds-noncausal  inner/outer bounds and closed-form cases, block side info
//   capacity          channel capacities (plain, causal state, non-causal state)
//   separation        source-channel feasibility against stage rate budgets
//   simulate          Monte-Carlo runs of the random-coding constructions
// Every run drops its outputs plus a manifest into --out-dir; nothing is
// written when a command fails. Data goes to files, messages to stderr; the
// only stdout chatter is what downstream scripts consume (capacity value,
// separation verdict).

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sr/bounds_noncausal.hpp"
#include "sr/channels.hpp"
#include "sr/coding_sim.hpp"
#include "sr/errors.hpp"
#include "sr/json_io.hpp"
#include "sr/manifest.hpp"
#include "sr/rd_causal.hpp"
#include "sr/search.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sr;

namespace {

struct Global {
    std::uint64_t seed = 1;
    int workers = 0; // 0 = all available cores
    std::string out_dir = ".";
    std::string format = "csv";

    int effective_workers() const {
        if (workers > 0) return workers;
        const unsigned hc = std::thread::hardware_concurrency();
        return hc == 0 ? 1 : static_cast<int>(hc);
    }
};

std::string g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// Tabular output rendered as CSV (9 significant digits) or as a JSON array
// of row objects, per --format.
struct Table {
    std::vector<std::string> columns;
    json rows = json::array();

    explicit Table(std::vector<std::string> cols) : columns(std::move(cols)) {}

    void row(json obj) { rows.push_back(std::move(obj)); }

    std::string render(const std::string& format) const {
        if (format == "json") return rows.dump(2) + "\n";
        std::string out;
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) out += ',';
            out += columns[i];
        }
        out += '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < columns.size(); ++i) {
                if (i) out += ',';
                const json& v = r.at(columns[i]);
                if (v.is_string())
                    out += v.get<std::string>();
                else if (v.is_boolean())
                    out += v.get<bool>() ? '1' : '0';
                else if (v.is_number_integer())
                    out += std::to_string(v.get<std::int64_t>());
                else
                    out += g9(v.get<double>());
            }
            out += '\n';
        }
        return out;
    }
};

json quad_json(const DistortionQuad& q) {
    json o = json::object();
    if (std::isfinite(q.dy1)) o["dy1"] = q.dy1;
    if (std::isfinite(q.dz1)) o["dz1"] = q.dz1;
    if (std::isfinite(q.dy2)) o["dy2"] = q.dy2;
    if (std::isfinite(q.dz2)) o["dz2"] = q.dz2;
    return o;
}

json search_json(const SearchConfig& c) {
    return json{{"restarts", c.restarts}, {"steps", c.steps},     {"seed", c.seed},
                {"workers", c.workers},   {"dist_tol", c.dist_tol}, {"aux_cap", c.aux_cap}};
}

json sim_json(const SimConfig& c) {
    return json{{"n", c.n},
                {"delta", c.delta},
                {"rate_margin", c.rate_margin},
                {"trials", c.trials},
                {"seed", c.seed},
                {"codeword_cap", c.codeword_cap},
                {"scan_cap", c.scan_cap},
                {"max_typical_retries", c.max_typical_retries},
                {"workers", c.workers}};
}

// Collects computed outputs and writes them (then the manifest) only once
// the whole command has succeeded.
struct Run {
    const Global& g;
    std::string command;
    std::vector<std::string> argv;
    std::vector<InputDigest> inputs;
    json resolved = json::object();
    std::vector<std::pair<std::string, std::string>> files;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    std::string started = utc_now();

    Run(const Global& g_, std::string cmd, std::vector<std::string> args)
        : g(g_), command(std::move(cmd)), argv(std::move(args)) {
        resolved["command"] = command;
        resolved["seed"] = g.seed;
        resolved["workers"] = g.effective_workers();
        resolved["format"] = g.format;
        resolved["out_dir"] = g.out_dir;
    }

    std::string read_input(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw InputError("cannot read '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        inputs.push_back({path, fnv1a_hex(buf.str())});
        return buf.str();
    }

    void add(const std::string& name, std::string contents) {
        files.emplace_back(name, std::move(contents));
    }

    void emit() {
        fs::create_directories(g.out_dir);
        for (const auto& [name, text] : files) atomic_write(out_path(name), text);

        RunManifest m;
        m.command = command;
        m.argv = argv;
        m.resolved_json = resolved.dump();
        m.seed = g.seed;
        m.workers = g.effective_workers();
        m.inputs = inputs;
        for (const auto& [name, text] : files) m.outputs.push_back(name);
        m.started_utc = started;
        m.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        std::string stem = command;
        for (char& c : stem)
            if (c == '-') c = '_';
        atomic_write(out_path(stem + "_manifest.json"), manifest_json(m));
    }

    std::string out_path(const std::string& name) const {
        return (fs::path(g.out_dir) / name).string();
    }
};

const SourceSpec& need_source(const ProblemFile& pf) {
    if (!pf.source) throw InputError("this command needs a source section in the problem file");
    return *pf.source;
}

struct TargetFlags {
    std::optional<double> dy1, dz1, dy2, dz2;

    // file target (or unconstrained) with per-component flag overrides
    DistortionQuad resolve(const ProblemFile& pf) const {
        DistortionQuad t = pf.target.value_or(DistortionQuad{});
        if (dy1) t.dy1 = *dy1;
        if (dz1) t.dz1 = *dz1;
        if (dy2) t.dy2 = *dy2;
        if (dz2) t.dz2 = *dz2;
        return t;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--target-dy1", dy1, "stage-1 Y distortion target (overrides the file)");
        cmd->add_option("--target-dz1", dz1, "stage-1 Z distortion target");
        cmd->add_option("--target-dy2", dy2, "stage-2 Y distortion target");
        cmd->add_option("--target-dz2", dz2, "stage-2 Z distortion target");
    }
};

struct SearchFlags {
    std::optional<int> restarts, steps, aux_cap;

    SearchConfig resolve(const ProblemFile& pf, const Global& g) const {
        SearchConfig cfg = pf.search;
        if (restarts) cfg.restarts = *restarts;
        if (steps) cfg.steps = *steps;
        if (aux_cap) cfg.aux_cap = *aux_cap;
        cfg.seed = g.seed;
        cfg.workers = g.effective_workers();
        return cfg;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--restarts", restarts, "search restarts (overrides the file)");
        cmd->add_option("--steps", steps, "annealing steps per restart");
        cmd->add_option("--aux-cap", aux_cap, "cap on default auxiliary alphabet sizes");
    }
};

json point_row(double r1, double r2, const DistortionQuad& d, const char* kind) {
    json row{{"r1", r1}, {"r2", r2}, {"dy1", d.dy1}, {"dz1", d.dz1},
             {"dy2", d.dy2}, {"dz2", d.dz2}};
    if (kind) row["kind"] = kind;
    return row;
}

// ---------- region-causal ----------

int run_region_causal(Run& run, const std::string& problem, const TargetFlags& tf,
                      const SearchFlags& sf) {
    const ProblemFile pf = parse_problem_text(run.read_input(problem), problem);
    const SourceSpec& src = need_source(pf);
    const DistortionQuad target = tf.resolve(pf);
    const SearchConfig cfg = sf.resolve(pf, run.g);

    const auto points = min_rates_causal(src, target, cfg);

    Table t({"r1", "delta_r", "dy1", "dz1", "dy2", "dz2"});
    for (const auto& pt : points)
        t.row(json{{"r1", pt.r1},
                   {"delta_r", pt.delta_r},
                   {"dy1", pt.achieved.dy1},
                   {"dz1", pt.achieved.dz1},
                   {"dy2", pt.achieved.dy2},
                   {"dz2", pt.achieved.dz2}});

    run.resolved["problem_file"] = problem;
    run.resolved["target"] = quad_json(target);
    run.resolved["search"] = search_json(cfg);
    run.add("region_causal." + run.g.format, t.render(run.g.format));
    run.add("region_causal_witness.json", causal_witness_json({"region-causal", points}));
    run.emit();
    std::cerr << points.size() << " frontier point(s) -> " << run.out_path("region_causal." + run.g.format)
              << "\n";
    return 0;
}

// ---------- bounds-noncausal ----------

int run_bounds_noncausal(Run& run, const std::string& problem, const std::string& mode,
                         const TargetFlags& tf, const SearchFlags& sf, int samples,
                         double tol) {
    const ProblemFile pf = parse_problem_text(run.read_input(problem), problem);
    const SourceSpec& src = need_source(pf);
    run.resolved["problem_file"] = problem;
    run.resolved["mode"] = mode;

    if (mode == "consistency") {
        const ConsistencyReport rep = verify_inner_subset_outer(src, samples, run.g.seed, tol);
        run.resolved["samples"] = samples;
        run.resolved["tol"] = tol;
        if (run.g.format == "json") {
            run.add("bounds_noncausal.json", consistency_json(rep));
        } else {
            Table t({"samples", "r1_mismatches", "dominance_violations", "max_r1_gap",
                     "min_r2_slack", "max_markov_residual"});
            t.row(json{{"samples", rep.samples},
                       {"r1_mismatches", rep.r1_mismatches},
                       {"dominance_violations", rep.dominance_violations},
                       {"max_r1_gap", rep.max_r1_gap},
                       {"min_r2_slack", rep.min_r2_slack},
                       {"max_markov_residual", rep.max_markov_residual}});
            run.add("bounds_noncausal.csv", t.render("csv"));
        }
        run.emit();
        std::cerr << "consistency over " << rep.samples << " sampled aux: " << rep.r1_mismatches
                  << " r1 mismatch(es), " << rep.dominance_violations << " dominance violation(s)\n";
        return 0;
    }

    std::string kind = mode;
    std::vector<NcRegionPoint> points;
    if (mode == "inner" || mode == "outer") {
        if (!pf.aux_block)
            throw InputError("mode " + mode + " evaluates the aux_block section, which is missing");
        if (mode == "inner") {
            points.push_back(evaluate_inner(src, *pf.aux_block));
        } else {
            NcRegionPoint pt;
            const NcRates r = outer_rates(src, *pf.aux_block);
            pt.r1 = r.r1;
            pt.r2 = r.r2;
            pt.aux = *pf.aux_block;
            pt.decoders = nc_optimal_decoders(src, pt.aux);
            pt.achieved = nc_distortions(src, pt.aux, pt.decoders);
            points.push_back(std::move(pt));
        }
    } else {
        const DistortionQuad target = tf.resolve(pf);
        const SearchConfig cfg = sf.resolve(pf, run.g);
        run.resolved["target"] = quad_json(target);
        run.resolved["search"] = search_json(cfg);
        if (mode == "sr") {
            kind = classify_sr_case(target) == SrCaseKind::Z1Slack ? "z1-slack" : "y2-static";
            points = sr_special_case(src, target, cfg);
        } else {
            const LosslessStage stage =
                mode == "lossless-z1" ? LosslessStage::Z1 : LosslessStage::Y2;
            points = lossless_special_case(src, stage, target, cfg);
        }
    }

    Table t({"r1", "r2", "dy1", "dz1", "dy2", "dz2", "kind"});
    for (const auto& pt : points) t.row(point_row(pt.r1, pt.r2, pt.achieved, kind.c_str()));

    run.add("bounds_noncausal." + run.g.format, t.render(run.g.format));
    run.add("bounds_noncausal_witness.json", nc_witness_json({kind, points}));
    run.emit();
    std::cerr << points.size() << " " << kind << " point(s) -> "
              << run.out_path("bounds_noncausal." + run.g.format) << "\n";
    return 0;
}

// ---------- capacity ----------

int run_capacity(Run& run, const std::string& problem, const std::string& mode, int stage,
                 int u_size, double tol) {
    const ProblemFile pf = parse_problem_text(run.read_input(problem), problem);
    const auto& ch = stage == 1 ? pf.channel1 : pf.channel2;
    if (!ch)
        throw InputError("problem file has no channels.stage" + std::to_string(stage) +
                         " section");
    run.resolved["problem_file"] = problem;
    run.resolved["mode"] = mode;
    run.resolved["stage"] = stage;
    run.resolved["tol"] = tol;

    CapacityResult res;
    if (mode == "dmc") {
        if (ch->s_size() != 1)
            throw InputError("dmc mode needs a stateless channel; use mode causal or noncausal");
        const CondPmf plain({Alphabet(ch->a_size(), "A")}, {Alphabet(ch->b_size(), "B")},
                            ch->p_b_given_as.rows());
        res = dmc_capacity(plain, tol);
    } else if (mode == "causal") {
        res = causal_state_capacity(*ch, tol);
    } else {
        SearchConfig cfg = pf.search;
        cfg.seed = run.g.seed;
        cfg.workers = run.g.effective_workers();
        run.resolved["u_size"] = u_size;
        run.resolved["search"] = search_json(cfg);
        res = gelfand_pinsker_capacity(*ch, u_size, cfg);
    }

    run.add("capacity.json", capacity_json(res, mode));
    run.emit();
    // full precision on stdout so shell pipelines can feed `separation --c1`
    std::printf("capacity %.17g\n", res.capacity);
    return 0;
}

// ---------- separation ----------

int run_separation(Run& run, const std::string& problem, const std::string& mode,
                   std::optional<double> rho1, std::optional<double> rho2,
                   std::optional<double> c1, std::optional<double> c2, const TargetFlags& tf,
                   const SearchFlags& sf) {
    const ProblemFile pf = parse_problem_text(run.read_input(problem), problem);
    const SourceSpec& src = need_source(pf);
    const DistortionQuad target = tf.resolve(pf);
    const SearchConfig cfg = sf.resolve(pf, run.g);

    // budgets: explicit flags win; otherwise capacities come from the
    // channel sections and rho from their bandwidth ratios
    double r1 = rho1.value_or(1.0), r2 = rho2.value_or(1.0);
    double cap1, cap2;
    if (c1 && c2) {
        cap1 = *c1;
        cap2 = *c2;
    } else {
        if (!pf.channel1 || !pf.channel2)
            throw InputError(
                "separation needs either --c1/--c2 or channels.stage1 and channels.stage2");
        const StateMode sm = mode == "noncausal" ? StateMode::Noncausal : StateMode::Causal;
        const StagePair pair = stage_capacity_pair(*pf.channel1, *pf.channel2, sm, cfg);
        cap1 = c1 ? *c1 : pair.c1.capacity;
        cap2 = c2 ? *c2 : pair.c2.capacity;
        if (!rho1) r1 = pf.channel1->rho;
        if (!rho2) r2 = pf.channel2->rho;
    }

    const SeparationResult res = separation_check(src, target, r1, r2, cap1, cap2, cfg);

    run.resolved["problem_file"] = problem;
    run.resolved["target"] = quad_json(target);
    run.resolved["search"] = search_json(cfg);
    run.resolved["rho1"] = r1;
    run.resolved["rho2"] = r2;
    run.resolved["c1"] = cap1;
    run.resolved["c2"] = cap2;
    run.add("separation.json", separation_json(res));
    run.emit();

    if (!res.achievable) {
        std::printf("achievable: no\n");
        return 0;
    }
    std::printf("achievable: yes\n");
    std::printf("rates: r1 %s (budget %s), delta_r %s (budget %s)\n", g9(res.witness.r1).c_str(),
                g9(res.rate1_budget).c_str(), g9(res.witness.delta_r).c_str(),
                g9(res.rate2_budget).c_str());
    const auto& aux = res.witness.aux;
    std::printf("witness aux P(w1,w2|x), |W1|=%d |W2|=%d, w2 fastest:\n", aux.w1_size(),
                aux.w2_size());
    for (int x = 0; x < aux.x_size(); ++x) {
        std::printf("  x=%d:", x);
        for (std::size_t c = 0; c < aux.cond.to_cells(); ++c)
            std::printf(" %s", g9(aux.cond(static_cast<std::size_t>(x), c)).c_str());
        std::printf("\n");
    }
    return 0;
}

// ---------- simulate ----------

struct SimFlags {
    std::optional<int> n, trials, max_typical_retries;
    std::optional<double> delta, rate_margin;
    std::optional<std::uint64_t> codeword_cap, scan_cap;

    SimConfig resolve(const ProblemFile& pf, const Global& g) const {
        SimConfig cfg = pf.sim;
        if (n) cfg.n = *n;
        if (delta) cfg.delta = *delta;
        if (rate_margin) cfg.rate_margin = *rate_margin;
        if (trials) cfg.trials = *trials;
        if (codeword_cap) cfg.codeword_cap = *codeword_cap;
        if (scan_cap) cfg.scan_cap = *scan_cap;
        if (max_typical_retries) cfg.max_typical_retries = *max_typical_retries;
        cfg.seed = g.seed;
        cfg.workers = g.effective_workers();
        return cfg;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--n", n, "block length (overrides the file)");
        cmd->add_option("--delta", delta, "typicality slack, 0 = the 2/sqrt(n) default");
        cmd->add_option("--rate-margin", rate_margin, "rate margin above the single-letter exponents");
        cmd->add_option("--trials", trials, "number of trials");
        cmd->add_option("--codeword-cap", codeword_cap, "stored-symbol gate for codebooks");
        cmd->add_option("--scan-cap", scan_cap, "cap on lazily scanned codewords per stage");
        cmd->add_option("--max-typical-retries", max_typical_retries,
                        "redraws per codeword before keeping the last");
    }
};

int run_simulate(Run& run, const std::string& problem, const std::string& scheme,
                 const std::string& witness_file, int witness_index, const SimFlags& flags) {
    const ProblemFile pf = parse_problem_text(run.read_input(problem), problem);
    const SourceSpec& src = need_source(pf);
    const SimConfig cfg = flags.resolve(pf, run.g);

    run.resolved["problem_file"] = problem;
    run.resolved["scheme"] = scheme;
    run.resolved["sim"] = sim_json(cfg);
    if (!witness_file.empty()) {
        run.resolved["witness_file"] = witness_file;
        run.resolved["witness_index"] = witness_index;
    }

    SimReport rep;
    if (scheme == "causal") {
        CausalAuxChannel aux;
        CausalDecoders dec;
        if (!witness_file.empty()) {
            const auto w = load_causal_witness(run.read_input(witness_file));
            if (witness_index < 0 || witness_index >= static_cast<int>(w.points.size()))
                throw InputError("witness has " + std::to_string(w.points.size()) +
                                 " point(s); index " + std::to_string(witness_index) +
                                 " is out of range");
            const auto& pt = w.points[static_cast<std::size_t>(witness_index)];
            check_causal_point(src, pt);
            aux = pt.aux;
            dec = pt.decoders;
        } else if (pf.aux_causal) {
            aux = *pf.aux_causal;
            dec = optimal_causal_decoders(src, aux);
        } else {
            throw InputError("no aux_causal section and no --from-region-witness");
        }
        rep = simulate_causal(src, aux, dec, cfg);
    } else {
        NcAuxChannel aux;
        NcDecoders dec;
        if (!witness_file.empty()) {
            const auto w = load_nc_witness(run.read_input(witness_file));
            if (witness_index < 0 || witness_index >= static_cast<int>(w.points.size()))
                throw InputError("witness has " + std::to_string(w.points.size()) +
                                 " point(s); index " + std::to_string(witness_index) +
                                 " is out of range");
            const auto& pt = w.points[static_cast<std::size_t>(witness_index)];
            check_nc_point(src, pt);
            aux = pt.aux;
            dec = pt.decoders;
        } else if (pf.aux_block) {
            aux = *pf.aux_block;
            dec = nc_optimal_decoders(src, aux);
        } else {
            throw InputError("no aux_block section and no --from-region-witness");
        }
        rep = simulate_nc(src, aux, dec, cfg);
    }

    Table t({"trial", "event", "ok", "y_fail", "z_fail", "dy1", "dz1", "dy2", "dz2"});
    for (std::size_t i = 0; i < rep.per_trial.size(); ++i) {
        const TrialRow& r = rep.per_trial[i];
        t.row(json{{"trial", static_cast<int>(i)},
                   {"event", r.event},
                   {"ok", r.ok ? 1 : 0},
                   {"y_fail", r.y_fail},
                   {"z_fail", r.z_fail},
                   {"dy1", r.dist.dy1},
                   {"dz1", r.dist.dz1},
                   {"dy2", r.dist.dy2},
                   {"dz2", r.dist.dz2}});
    }

    run.add("simulate_report.json", sim_report_json(rep, scheme));
    run.add("simulate_trials." + run.g.format, t.render(run.g.format));
    run.emit();
    std::cerr << rep.trials_ok << "/" << rep.trials << " trials ok -> "
              << run.out_path("simulate_report.json") << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rate-distortion regions, capacities and coding simulations "
                 "for two-stage refinement with decoder side information"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    Global g;
    app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
    app.add_option("--workers", g.workers, "parallelism bound, 0 = all cores")
        ->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory for outputs and the manifest")
        ->capture_default_str();
    app.add_option("--format", g.format, "table output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    std::string problem;
    TargetFlags targets;
    SearchFlags search;

    auto* reg = app.add_subcommand("region-causal",
                                   "feasible (r1, delta_r) frontier with causal side information");
    reg->fallthrough();
    reg->add_option("problem", problem, "problem JSON file")->required();
    targets.attach(reg);
    search.attach(reg);

    std::string nc_mode;
    int samples = 200;
    double tol = 1e-9;
    auto* bnc = app.add_subcommand("bounds-noncausal",
                                   "inner/outer bounds and closed-form cases for block side information");
    bnc->fallthrough();
    bnc->add_option("problem", problem, "problem JSON file")->required();
    bnc->add_option("--mode", nc_mode, "what to evaluate")
        ->required()
        ->check(CLI::IsMember({"inner", "outer", "sr", "lossless-z1", "lossless-y2",
                               "consistency"}));
    bnc->add_option("--samples", samples, "sampled aux channels (consistency mode)")
        ->capture_default_str();
    bnc->add_option("--tol", tol, "comparison tolerance (consistency mode)")
        ->capture_default_str();
    targets.attach(bnc);
    search.attach(bnc);

    std::string cap_mode;
    int stage = 1, u_size = 0;
    double cap_tol = 1e-9;
    auto* cap = app.add_subcommand("capacity", "channel capacity of one noisy stage");
    cap->fallthrough();
    cap->add_option("problem", problem, "problem JSON file")->required();
    cap->add_option("--mode", cap_mode, "state knowledge at the encoder")
        ->required()
        ->check(CLI::IsMember({"dmc", "causal", "noncausal"}));
    cap->add_option("--stage", stage, "which channel section to solve")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    cap->add_option("--u-size", u_size, "auxiliary alphabet for noncausal mode, 0 = default")
        ->capture_default_str();
    cap->add_option("--tol", cap_tol, "convergence tolerance")->capture_default_str();

    std::string sep_mode = "causal";
    std::optional<double> rho1, rho2, c1, c2;
    auto* sep = app.add_subcommand("separation",
                                   "can the target survive the two noisy stages' rate budgets");
    sep->fallthrough();
    sep->add_option("problem", problem, "problem JSON file")->required();
    sep->add_option("--rho1", rho1, "stage-1 channel uses per source symbol");
    sep->add_option("--rho2", rho2, "stage-2 channel uses per source symbol");
    sep->add_option("--c1", c1, "stage-1 capacity (skips solving channels.stage1)");
    sep->add_option("--c2", c2, "stage-2 capacity (skips solving channels.stage2)");
    sep->add_option("--mode", sep_mode, "state knowledge when solving the channels")
        ->check(CLI::IsMember({"causal", "noncausal"}))
        ->capture_default_str();
    targets.attach(sep);
    search.attach(sep);

    std::string scheme, witness_file;
    int witness_index = 0;
    SimFlags sim_flags;
    auto* sim = app.add_subcommand("simulate", "Monte-Carlo run of a random-coding construction");
    sim->fallthrough();
    sim->add_option("problem", problem, "problem JSON file")->required();
    sim->add_option("--scheme", scheme, "which construction to run")
        ->required()
        ->check(CLI::IsMember({"causal", "noncausal"}));
    sim->add_option("--from-region-witness", witness_file,
                    "witness JSON from region-causal or bounds-noncausal; uses its aux and decoders");
    sim->add_option("--witness-index", witness_index, "which witness point to simulate")
        ->capture_default_str();
    sim_flags.attach(sim);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const std::vector<std::string> raw_args(argv + 1, argv + argc);
    try {
        if (*reg) {
            Run run(g, "region-causal", raw_args);
            return run_region_causal(run, problem, targets, search);
        }
        if (*bnc) {
            Run run(g, "bounds-noncausal", raw_args);
            return run_bounds_noncausal(run, problem, nc_mode, targets, search, samples, tol);
        }
        if (*cap) {
            Run run(g, "capacity", raw_args);
            return run_capacity(run, problem, cap_mode, stage, u_size, cap_tol);
        }
        if (*sep) {
            Run run(g, "separation", raw_args);
            return run_separation(run, problem, sep_mode, rho1, rho2, c1, c2, targets, search);
        }
        Run run(g, "simulate", raw_args);
        return run_simulate(run, problem, scheme, witness_file, witness_index, sim_flags);
    } catch (const InfeasibleTargetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CapExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
