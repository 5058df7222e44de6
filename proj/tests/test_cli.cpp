#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "json.hpp"

#include "sr/bounds_noncausal.hpp"
#include "sr/json_io.hpp"
#include "sr/manifest.hpp"
#include "sr/rd_causal.hpp"

using namespace sr;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// The binary under test and the example problem files come from the build
// environment; everything a case writes goes into its own scratch directory.

std::string tool_bin() {
    const char* bin = std::getenv("SRTOOL_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "SRTOOL_BIN must point at the srtool binary");
    return bin;
}

std::string data_file(const std::string& name) {
    const char* dir = std::getenv("SRTOOL_DATA");
    REQUIRE_MESSAGE(dir != nullptr, "SRTOOL_DATA must point at the examples directory");
    return (fs::path(dir) / name).string();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("srtool_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct CmdResult {
    int code = -1;
    std::string out, err;
};

CmdResult run_tool(const std::string& args, const fs::path& dir) {
    const fs::path outf = dir / "stdout.txt";
    const fs::path errf = dir / "stderr.txt";
    const std::string cmd =
        tool_bin() + " " + args + " > " + outf.string() + " 2> " + errf.string();
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    CmdResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(outf);
    r.err = slurp(errf);
    return r;
}

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    return cells;
}

std::string g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

} // namespace

TEST_CASE("missing_input_file_exits_one_with_no_outputs") {
    const auto dir = scratch_dir("missing");
    const fs::path out = dir / "out";
    const auto r = run_tool("region-causal " + (dir / "nope.json").string() + " --out-dir " +
                                out.string(),
                            dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("nope.json") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("unknown_fields_are_rejected_at_any_depth") {
    const auto dir = scratch_dir("unknown");
    const fs::path out = dir / "out";

    const std::string base =
        "\"source\": {\"px\": [0.5, 0.5], \"y_given_x\": [[1.0], [1.0]], "
        "\"z_given_x\": [[1.0], [1.0]]}";
    write_file(dir / "top.json", "{" + base + ", \"bogus\": 1}");
    auto r = run_tool("region-causal " + (dir / "top.json").string() + " --out-dir " +
                          out.string(),
                      dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("bogus") != std::string::npos);

    write_file(dir / "nested.json", "{" + base + ", \"sim\": {\"trails\": 5}}");
    r = run_tool("simulate " + (dir / "nested.json").string() + " --scheme causal --out-dir " +
                     out.string(),
                 dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("trails") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("unconstrained_target_yields_exactly_the_zero_rate_point") {
    const auto dir = scratch_dir("notarget");
    const fs::path out = dir / "out";
    write_file(dir / "p.json",
               "{\"source\": {\"px\": [0.5, 0.5], \"y_given_x\": [[1.0], [1.0]], "
               "\"z_given_x\": [[1.0], [1.0]]}}");
    const auto r = run_tool("region-causal " + (dir / "p.json").string() +
                                " --restarts 4 --steps 60 --out-dir " + out.string(),
                            dir);
    CHECK(r.code == 0);
    const auto lines = csv_lines(slurp(out / "region_causal.csv"));
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "r1,delta_r,dy1,dz1,dy2,dz2");
    const auto cells = split_csv(lines[1]);
    REQUIRE(cells.size() == 6);
    CHECK(cells[0] == "0");
    CHECK(cells[1] == "0");
}

TEST_CASE("capacity_of_a_noiseless_binary_channel_is_one_bit") {
    const auto dir = scratch_dir("cap_noiseless");
    const fs::path out = dir / "out";
    write_file(dir / "p.json",
               "{\"channels\": {\"stage1\": {\"b_given_a\": [[1.0, 0.0], [0.0, 1.0]]}}}");
    const auto r = run_tool("capacity " + (dir / "p.json").string() + " --mode dmc --out-dir " +
                                out.string(),
                            dir);
    CHECK(r.code == 0);
    const json doc = json::parse(slurp(out / "capacity.json"));
    CHECK(near(doc.at("capacity").get<double>(), 1.0, 1e-6));
    CHECK(doc.at("mode") == "dmc");
    // stdout carries the value for shell pipelines
    CHECK(r.out.find("capacity 1") != std::string::npos);
    CHECK(fs::exists(out / "capacity_manifest.json"));
}

TEST_CASE("cap_exceeding_simulation_exits_two_with_the_size_report") {
    const auto dir = scratch_dir("cap_gate");
    const fs::path out = dir / "out";
    const auto r = run_tool("simulate " + data_file("degraded_binary.json") +
                                " --scheme noncausal --n 80 --out-dir " + out.string(),
                            dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("c_w1") != std::string::npos);
    CHECK(r.err.find("cap") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("infeasible_target_exits_two_without_outputs") {
    const auto dir = scratch_dir("infeasible");
    const fs::path out = dir / "out";
    const auto r = run_tool("region-causal " + data_file("binary_no_si.json") +
                                " --target-dy1 -0.5 --out-dir " + out.string(),
                            dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("floor") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("causal_witness_reloads_and_reevaluates_identically") {
    const auto dir = scratch_dir("witness_causal");
    const fs::path out = dir / "out";
    const auto r = run_tool("region-causal " + data_file("binary_no_si.json") +
                                " --restarts 6 --steps 120 --seed 11 --out-dir " + out.string(),
                            dir);
    REQUIRE(r.code == 0);

    const auto w = load_causal_witness(slurp(out / "region_causal_witness.json"));
    REQUIRE_FALSE(w.points.empty());
    const auto pf = load_problem_file(data_file("binary_no_si.json"));
    REQUIRE(pf.source.has_value());

    for (const auto& pt : w.points) {
        check_causal_point(*pf.source, pt);
        const auto back = evaluate_causal(*pf.source, pt.aux, pt.decoders);
        CHECK(near(back.r1, pt.r1, 1e-9));
        CHECK(near(back.delta_r, pt.delta_r, 1e-9));
        CHECK(near(back.achieved.dy1, pt.achieved.dy1, 1e-9));
        CHECK(near(back.achieved.dz1, pt.achieved.dz1, 1e-9));
        CHECK(near(back.achieved.dy2, pt.achieved.dy2, 1e-9));
        CHECK(near(back.achieved.dz2, pt.achieved.dz2, 1e-9));
    }

    // the CSV prints the same points with 9 significant digits
    const auto lines = csv_lines(slurp(out / "region_causal.csv"));
    REQUIRE(lines.size() == w.points.size() + 1);
    for (std::size_t i = 0; i < w.points.size(); ++i) {
        const auto cells = split_csv(lines[i + 1]);
        REQUIRE(cells.size() == 6);
        CHECK(cells[0] == g9(w.points[i].r1));
        CHECK(cells[1] == g9(w.points[i].delta_r));
        CHECK(cells[2] == g9(w.points[i].achieved.dy1));
    }
}

TEST_CASE("block_witness_reloads_and_reevaluates_identically") {
    const auto dir = scratch_dir("witness_block");
    const fs::path out = dir / "out";
    const auto r = run_tool("bounds-noncausal " + data_file("degraded_binary.json") +
                                " --mode inner --out-dir " + out.string(),
                            dir);
    REQUIRE(r.code == 0);

    const auto w = load_nc_witness(slurp(out / "bounds_noncausal_witness.json"));
    CHECK(w.kind == "inner");
    REQUIRE(w.points.size() == 1);
    const auto pf = load_problem_file(data_file("degraded_binary.json"));
    const auto& pt = w.points.front();
    check_nc_point(*pf.source, pt);

    const auto back = evaluate_inner(*pf.source, pt.aux);
    CHECK(near(back.r1, pt.r1, 1e-9));
    CHECK(near(back.r2, pt.r2, 1e-9));
    const auto dist = nc_distortions(*pf.source, pt.aux, pt.decoders);
    CHECK(near(dist.dy1, pt.achieved.dy1, 1e-9));
    CHECK(near(dist.dz1, pt.achieved.dz1, 1e-9));
    CHECK(near(dist.dy2, pt.achieved.dy2, 1e-9));
    CHECK(near(dist.dz2, pt.achieved.dz2, 1e-9));
}

TEST_CASE("separation_verdict_matches_the_library_bit_for_bit") {
    const auto dir = scratch_dir("separation");
    const fs::path out = dir / "out";
    const std::string budgets = " --rho1 1 --rho2 1 --c1 0.5 --c2 0.25";
    const auto r = run_tool("separation " + data_file("binary_no_si.json") +
                                " --target-dy1 0.13 --target-dy2 0.13 --seed 21" + budgets +
                                " --out-dir " + out.string(),
                            dir);
    REQUIRE(r.code == 0);
    const json doc = json::parse(slurp(out / "separation.json"));

    const auto pf = load_problem_file(data_file("binary_no_si.json"));
    DistortionQuad target;
    target.dy1 = 0.13;
    target.dy2 = 0.13;
    SearchConfig cfg = pf.search; // the file pins restarts and steps
    cfg.seed = 21;
    cfg.workers = 1;
    const auto direct = separation_check(*pf.source, target, 1.0, 1.0, 0.5, 0.25, cfg);

    REQUIRE(doc.at("achievable").get<bool>() == direct.achievable);
    CHECK(doc.at("rate1_budget").get<double>() == direct.rate1_budget);
    CHECK(doc.at("rate2_budget").get<double>() == direct.rate2_budget);
    if (direct.achievable) {
        CHECK(doc.at("witness").at("r1").get<double>() == direct.witness.r1);
        CHECK(doc.at("witness").at("delta_r").get<double>() == direct.witness.delta_r);
        CHECK(r.out.find("achievable: yes") != std::string::npos);
        CHECK(r.out.find("witness aux") != std::string::npos);
    }

    // an unmeetable budget answers no and keeps the witness to itself
    const auto no = run_tool("separation " + data_file("binary_no_si.json") +
                                 " --target-dy1 0.06 --target-dy2 0.06 --seed 21" + budgets +
                                 " --out-dir " + (dir / "out_no").string(),
                             dir);
    REQUIRE(no.code == 0);
    CHECK(no.out.find("achievable: no") != std::string::npos);
    CHECK(no.out.find("witness aux") == std::string::npos);
    const json ndoc = json::parse(slurp(dir / "out_no" / "separation.json"));
    CHECK_FALSE(ndoc.at("achievable").get<bool>());
    CHECK_FALSE(ndoc.contains("witness"));
}

TEST_CASE("reruns_are_byte_identical_and_the_manifest_replays") {
    const auto dir = scratch_dir("replay");
    const fs::path out = dir / "out";
    const std::string args = "simulate " + data_file("degraded_binary.json") +
                             " --scheme noncausal --trials 25 --seed 9 --out-dir " +
                             out.string();
    REQUIRE(run_tool(args, dir).code == 0);

    const json manifest = json::parse(slurp(out / "simulate_manifest.json"));
    const auto outputs = manifest.at("outputs").get<std::vector<std::string>>();
    REQUIRE_FALSE(outputs.empty());

    // stash, re-run the recorded argv, compare every listed output
    std::vector<std::string> before;
    for (const auto& name : outputs) before.push_back(slurp(out / name));

    std::string argv_joined;
    for (const auto& a : manifest.at("argv").get<std::vector<std::string>>())
        argv_joined += " " + a;
    REQUIRE(run_tool(argv_joined, dir).code == 0);

    for (std::size_t i = 0; i < outputs.size(); ++i)
        CHECK(slurp(out / outputs[i]) == before[i]);

    // the digests pin the inputs the run actually read
    CHECK(manifest.at("inputs").size() == 1);
    CHECK(manifest.at("inputs")[0].at("fnv1a64").get<std::string>() ==
          fnv1a_hex(slurp(data_file("degraded_binary.json"))));
}

TEST_CASE("simulate_consumes_a_frontier_witness") {
    const auto dir = scratch_dir("from_witness");
    const fs::path reg = dir / "reg";
    REQUIRE(run_tool("region-causal " + data_file("binary_no_si.json") +
                         " --restarts 4 --steps 80 --seed 3 --out-dir " + reg.string(),
                     dir)
                .code == 0);

    const fs::path out = dir / "sim";
    const auto r = run_tool("simulate " + data_file("binary_no_si.json") +
                                " --scheme causal --from-region-witness " +
                                (reg / "region_causal_witness.json").string() +
                                " --n 24 --trials 10 --seed 3 --out-dir " + out.string(),
                            dir);
    REQUIRE(r.code == 0);
    const json rep = json::parse(slurp(out / "simulate_report.json"));
    CHECK(rep.at("trials").get<int>() == 10);
    CHECK(rep.at("scheme") == "causal");
    const auto lines = csv_lines(slurp(out / "simulate_trials.csv"));
    CHECK(lines.size() == 11);

    // an out-of-range point index is an input error
    const auto bad = run_tool("simulate " + data_file("binary_no_si.json") +
                                  " --scheme causal --from-region-witness " +
                                  (reg / "region_causal_witness.json").string() +
                                  " --witness-index 99 --out-dir " + (dir / "bad").string(),
                              dir);
    CHECK(bad.code == 1);
    CHECK_FALSE(fs::exists(dir / "bad"));
}

TEST_CASE("format_json_swaps_the_table_for_row_objects") {
    const auto dir = scratch_dir("format_json");
    const fs::path out = dir / "out";
    const auto r = run_tool("region-causal " + data_file("binary_no_si.json") +
                                " --restarts 4 --steps 80 --format json --out-dir " +
                                out.string(),
                            dir);
    REQUIRE(r.code == 0);
    CHECK_FALSE(fs::exists(out / "region_causal.csv"));
    const json rows = json::parse(slurp(out / "region_causal.json"));
    REQUIRE(rows.is_array());
    REQUIRE_FALSE(rows.empty());
    CHECK(rows[0].contains("r1"));
    CHECK(rows[0].contains("delta_r"));

    const json manifest = json::parse(slurp(out / "region_causal_manifest.json"));
    CHECK(manifest.at("resolved").at("format") == "json");
}
