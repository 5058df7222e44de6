#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "sr/bounds_noncausal.hpp"
#include "sr/info.hpp"

using namespace sr;

namespace {

constexpr int kX = 0, kY = 1, kZ = 2, kW1 = 3, kW2 = 4, kW3 = 5, kW4 = 6, kV = 7;

SourceSpec degraded_src(double px0 = 0.5, double qz = 0.1, double qy = 0.1) {
    auto d = DistortionMatrix::hamming(2);
    return make_degraded_source({px0, 1.0 - px0}, bsc(qz, "X", "Z"), bsc(qy, "Z", "Y"),
                                d, d, d, d);
}

SourceSpec perfect_si_src() { return degraded_src(0.4, 0.0, 0.0); }

NcAuxChannel random_family_aux(const SourceSpec& src, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0xFA111EULL));
    return assemble_inner_family(src.x_size(),
                                 random_inner_family(src.x_size(), 2, 2, 2, 2, 2, rng));
}

SearchConfig quick_cfg(std::uint64_t seed = 1) {
    SearchConfig cfg;
    cfg.restarts = 8;
    cfg.steps = 150;
    cfg.seed = seed;
    return cfg;
}

bool close(double a, double b, double tol = 1e-10) { return std::abs(a - b) <= tol; }

} // namespace

// ===== degradedness gate =====

TEST_CASE("non_degraded_source_is_rejected") {
    auto d = DistortionMatrix::hamming(2);
    // Y and Z conditionally independent BSCs of X: I(X;Y|Z) > 0
    auto src = make_source({0.5, 0.5}, bsc(0.1, "X", "Y"), bsc(0.2, "X", "Z"), d, d, d, d);
    CHECK(src.degradedness_residual() > 0.01);
    auto aux = NcAuxChannel::trivial(2);
    CHECK_THROWS_AS(nc_joint(src, aux), NonDegradedSourceError);
    CHECK_THROWS_AS(outer_rates(src, aux), NonDegradedSourceError);
    CHECK_THROWS_AS(verify_inner_subset_outer(src, 3, 1), NonDegradedSourceError);

    auto ok = degraded_src();
    CHECK(ok.degradedness_residual() <= 1e-12);
    CHECK_NOTHROW(nc_joint(ok, aux));
}

// ===== aux validation =====

TEST_CASE("aux_cardinality_caps") {
    const int nx = 2;
    auto uniform_rows = [&](int cells) {
        return std::vector<std::vector<double>>(
            nx, std::vector<double>(static_cast<std::size_t>(cells), 1.0 / cells));
    };
    // |W1| <= |X|+6 at construction
    CHECK_NOTHROW(NcAuxChannel::from_rows(nx, 8, 1, 1, 1, 1, uniform_rows(8)));
    CHECK_THROWS_AS(NcAuxChannel::from_rows(nx, 9, 1, 1, 1, 1, uniform_rows(9)), InputError);
    // the converse evaluation wants |W1| <= |X|+5
    auto wide = NcAuxChannel::from_rows(nx, 8, 1, 1, 1, 1, uniform_rows(8));
    auto src = degraded_src();
    CHECK_THROWS_AS(outer_rates(src, wide), InputError);
    CHECK_NOTHROW(inner_rates(src, wide));

    CHECK_THROWS_AS(NcAuxChannel(CondPmf({Alphabet(2, "X")},
                                         {Alphabet(2, "W1"), Alphabet(2, "W2")},
                                         {0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25})),
                    InputError);
}

// ===== trivial and copy corners =====

TEST_CASE("trivial_aux_gives_zero_rates") {
    auto src = degraded_src(0.3, 0.15, 0.2);
    auto aux = NcAuxChannel::trivial(2);
    auto out = outer_rates(src, aux);
    CHECK(close(out.r1, 0.0, 1e-12));
    CHECK(close(out.r2, 0.0, 1e-12));
    auto in = inner_rates(src, aux);
    CHECK(close(in.r1, 0.0, 1e-12));
    CHECK(close(in.r2, 0.0, 1e-12));
}

TEST_CASE("w1_copy_gives_conditional_entropy_given_y") {
    auto src = degraded_src(0.35, 0.12, 0.08);
    // W1 = X, everything else trivial
    std::vector<std::vector<double>> rows = {{1.0, 0.0}, {0.0, 1.0}};
    auto aux = NcAuxChannel::from_rows(2, 2, 1, 1, 1, 1, rows);
    const int x[] = {kX}, y[] = {1};
    const double hxy = conditional_entropy(src.pxyz, x, y);
    auto out = outer_rates(src, aux);
    CHECK(close(out.r1, hxy, 1e-12));
    CHECK(close(out.r2, hxy, 1e-12));
    auto in = inner_rates(src, aux);
    CHECK(close(in.r1, hxy, 1e-12));
    CHECK(close(in.r2, hxy, 1e-12));
}

TEST_CASE("w2_copy_gives_conditional_entropy_given_z") {
    auto src = degraded_src(0.5, 0.1, 0.25);
    // W2 = X: the stage-1 payload only the Z decoder resolves
    std::vector<std::vector<double>> rows = {{1.0, 0.0}, {0.0, 1.0}};
    auto aux = NcAuxChannel::from_rows(2, 1, 2, 1, 1, 1, rows);
    const int x[] = {kX}, z[] = {2};
    const double hxz = conditional_entropy(src.pxyz, x, z);
    auto out = outer_rates(src, aux);
    CHECK(close(out.r1, hxz, 1e-12));
    CHECK(close(out.r2, hxz, 1e-12));
    auto in = inner_rates(src, aux);
    CHECK(close(in.r1, hxz, 1e-12));
    CHECK(close(in.r2, hxz, 1e-12));
}

// ===== the conditional-independence requirement =====

TEST_CASE("correlated_stage_descriptions_are_rejected") {
    auto src = degraded_src();
    // W2 = W3 = fair coin given X: I(W2;W3|X,W1,V) = 1 bit
    std::vector<std::vector<double>> rows(2, std::vector<double>(4, 0.0));
    for (auto& r : rows) { r[0] = 0.5; r[3] = 0.5; } // (w2,w3) in {(0,0),(1,1)}
    auto aux = NcAuxChannel::from_rows(2, 1, 2, 2, 1, 1, rows);
    CHECK(close(extra_markov_residual(src, aux), 1.0, 1e-12));
    CHECK_THROWS_AS(inner_rates(src, aux), ExtraMarkovViolated);
    CHECK_NOTHROW(outer_rates(src, aux));
}

TEST_CASE("factored_families_satisfy_the_requirement") {
    auto src = degraded_src(0.45, 0.07, 0.18);
    for (std::uint64_t s = 0; s < 8; ++s) {
        auto aux = random_family_aux(src, s);
        CHECK(extra_markov_residual(src, aux) <= 1e-12);
        CHECK_NOTHROW(inner_rates(src, aux));
    }
}

// ===== decoders =====

TEST_CASE("stage2_y_decoder_matches_exhaustive_table_search") {
    auto src = degraded_src(0.4, 0.12, 0.15);
    Rng rng(derive_seed(7, 0xFA111EULL));
    auto aux = assemble_inner_family(2, random_inner_family(2, 2, 1, 2, 1, 1, rng));
    auto dec = nc_optimal_decoders(src, aux);
    auto got = nc_distortions(src, aux, dec);

    // weight[(y,w1,w3,v)][x] for the stage-2 Y table
    JointPmf j = nc_joint(src, aux);
    std::vector<std::vector<double>> weight(
        static_cast<std::size_t>(2 * 2 * 2 * 1), std::vector<double>(2, 0.0));
    std::vector<int> idx(8);
    for (std::size_t flat = 0; flat < j.cells(); ++flat) {
        j.unflatten(flat, idx);
        const std::size_t cell = static_cast<std::size_t>(
            ((idx[kY] * 2 + idx[kW1]) * 2 + idx[kW3]) * 1 + idx[kV]);
        weight[cell][static_cast<std::size_t>(idx[kX])] += j[flat];
    }
    const double oracle = oracles::exhaustive_best_distortion(weight, src.d_y2);
    CHECK(close(got.dy2, oracle, 1e-12));
}

// ===== both bounds on the factored family =====

TEST_CASE("achievable_never_beats_converse_on_sampled_families") {
    for (auto& src : {degraded_src(0.5, 0.1, 0.1), degraded_src(0.3, 0.05, 0.22)}) {
        auto rep = verify_inner_subset_outer(src, 60, 42);
        CHECK(rep.samples == 60);
        CHECK(rep.r1_mismatches == 0);
        CHECK(rep.dominance_violations == 0);
        CHECK(rep.max_markov_residual <= 1e-12);
        CHECK(rep.min_r2_slack >= -1e-12);
        CHECK(rep.max_r1_gap <= 1e-12);
    }
}

TEST_CASE("si_ordering_carries_over_to_descriptions") {
    // W1 -> X -> Z -> Y, so the Z decoder learns at least as much about W1
    auto src = degraded_src(0.5, 0.08, 0.3);
    for (std::uint64_t s = 0; s < 6; ++s) {
        auto aux = random_family_aux(src, 100 + s);
        JointPmf j = nc_joint(src, aux);
        const int y[] = {kY}, z[] = {kZ}, w1[] = {kW1};
        CHECK(mi_sets(j, z, w1) >= mi_sets(j, y, w1) - 1e-12);
    }
}

// ===== closed-form target shapes =====

TEST_CASE("sr_case_classification") {
    DistortionQuad a;
    a.dy1 = 0.1; a.dz1 = 0.2; a.dy2 = 0.05; a.dz2 = 0.05;
    CHECK(classify_sr_case(a) == SrCaseKind::Z1Slack);

    DistortionQuad b;
    b.dy1 = 0.2; b.dz1 = 0.1; b.dy2 = 0.2; b.dz2 = 0.05;
    CHECK(classify_sr_case(b) == SrCaseKind::Y2Static);

    // both shapes match: the first one wins
    DistortionQuad tie;
    tie.dy1 = 0.2; tie.dz1 = 0.2; tie.dy2 = 0.2; tie.dz2 = 0.1;
    CHECK(classify_sr_case(tie) == SrCaseKind::Z1Slack);

    DistortionQuad unconstrained; // all infinite
    CHECK(classify_sr_case(unconstrained) == SrCaseKind::Z1Slack);

    DistortionQuad neither;
    neither.dy1 = 0.2; neither.dz1 = 0.1; neither.dy2 = 0.15; neither.dz2 = 0.05;
    CHECK_THROWS_AS(classify_sr_case(neither), InputError);
}

TEST_CASE("z1_slack_family_rate_identities") {
    auto src = degraded_src(0.42, 0.09, 0.14);
    Rng rng(derive_seed(3, 0x2E0CEDULL));
    for (int trial = 0; trial < 6; ++trial) {
        std::vector<std::vector<double>> rows;
        for (int x = 0; x < 2; ++x) rows.push_back(random_simplex_row(8, rng));
        auto aux = assemble_z1_slack(2, 2, 2, 2, rows);
        JointPmf j = nc_joint(src, aux);
        const int x[] = {kX}, y[] = {kY};
        const int w1[] = {kW1}, w4[] = {kW4};
        const int w13[] = {kW1, kW3}, w13z[] = {kW1, kW3, kZ};
        const double r1 = cmi_sets(j, x, w1, y);
        const double r2 = cmi_sets(j, x, w13, y) + cmi_sets(j, x, w4, w13z);
        auto in = inner_rates(src, aux);
        CHECK(close(in.r1, r1));
        CHECK(close(in.r2, r2));
        // with W2 and V degenerate the converse collapses onto the same point
        auto out = outer_rates(src, aux);
        CHECK(close(out.r1, r1));
        CHECK(close(out.r2, r2));
        CHECK(in.r2 >= in.r1 - 1e-12);
    }
}

TEST_CASE("y2_static_family_rate_identities") {
    auto src = degraded_src(0.5, 0.11, 0.21);
    Rng rng(derive_seed(4, 0x2E0CEDULL));
    for (int trial = 0; trial < 6; ++trial) {
        std::vector<std::vector<double>> rows;
        for (int x = 0; x < 2; ++x) rows.push_back(random_simplex_row(8, rng));
        auto aux = assemble_y2_static(2, 2, 2, 2, rows);
        JointPmf j = nc_joint(src, aux);
        const int x[] = {kX}, y[] = {kY};
        const int w1[] = {kW1}, w2[] = {kW2}, w4[] = {kW4};
        const int w1z[] = {kW1, kZ}, w12z[] = {kW1, kW2, kZ};
        const double r1 = cmi_sets(j, x, w1, y) + cmi_sets(j, x, w2, w1z);
        const double r2 = r1 + cmi_sets(j, x, w4, w12z);
        auto in = inner_rates(src, aux);
        CHECK(close(in.r1, r1));
        CHECK(close(in.r2, r2));
        auto out = outer_rates(src, aux);
        CHECK(close(out.r1, r1));
        CHECK(close(out.r2, r2));
    }

    // a degenerate W4 leaves nothing for stage 2 to send
    std::vector<std::vector<double>> rows;
    Rng rng2(derive_seed(5, 0x2E0CEDULL));
    for (int x = 0; x < 2; ++x) {
        auto r = random_simplex_row(4, rng2); // (w1, w2) only
        std::vector<double> wide(8, 0.0);
        for (int c = 0; c < 4; ++c) wide[static_cast<std::size_t>(c * 2)] = r[static_cast<std::size_t>(c)];
        rows.push_back(wide);
    }
    auto aux = assemble_y2_static(2, 2, 2, 2, rows);
    auto in = inner_rates(src, aux);
    CHECK(close(in.r2, in.r1, 1e-12));
}

// ===== exact-recovery shapes =====

TEST_CASE("lossless_z1_family_rate_identities") {
    auto src = degraded_src(0.38, 0.13, 0.09);
    Rng rng(derive_seed(6, 0x2E0CEDULL));
    for (int trial = 0; trial < 6; ++trial) {
        std::vector<std::vector<double>> rows;
        for (int x = 0; x < 2; ++x) rows.push_back(random_simplex_row(4, rng));
        auto aux = assemble_lossless_z1(2, 2, 2, rows);
        JointPmf j = nc_joint(src, aux);
        const int x[] = {kX}, y[] = {kY};
        const int w1[] = {kW1}, w1z[] = {kW1, kZ};
        const int w13[] = {kW1, kW3}, w13z[] = {kW1, kW3, kZ};
        const double r1 = cmi_sets(j, x, w1, y) + conditional_entropy(j, x, w1z);
        const double r2 = cmi_sets(j, x, w13, y) + conditional_entropy(j, x, w13z);
        auto in = inner_rates(src, aux);
        CHECK(close(in.r1, r1));
        CHECK(close(in.r2, r2));
        // the Z decoder resolves X exactly in stage 1
        auto dec = nc_optimal_decoders(src, aux);
        auto got = nc_distortions(src, aux, dec);
        CHECK(got.dz1 == 0.0);
    }
}

TEST_CASE("lossless_y2_family_rate_identities") {
    auto src = degraded_src(0.47, 0.06, 0.24);
    const int x[] = {kX}, y[] = {1};
    const double hxy = conditional_entropy(src.pxyz, x, y);
    Rng rng(derive_seed(7, 0x2E0CEDULL));
    for (int trial = 0; trial < 6; ++trial) {
        std::vector<std::vector<double>> rows;
        for (int xx = 0; xx < 2; ++xx) rows.push_back(random_simplex_row(4, rng));
        auto aux = assemble_lossless_y2(2, 2, 2, rows);
        JointPmf j = nc_joint(src, aux);
        const int w1[] = {kW1}, w2[] = {kW2}, w1z[] = {kW1, kZ};
        const double r1 = cmi_sets(j, x, w1, y) + cmi_sets(j, x, w2, w1z);
        auto in = inner_rates(src, aux);
        CHECK(close(in.r1, r1));
        // total rate is pinned at H(X|Y) no matter the first-stage choices
        CHECK(close(in.r2, hxy));
        CHECK(in.r1 <= in.r2 + 1e-12);
        auto dec = nc_optimal_decoders(src, aux);
        auto got = nc_distortions(src, aux, dec);
        CHECK(got.dy2 == 0.0);
    }
}

TEST_CASE("trivial_w1_hits_the_slepian_wolf_corner") {
    for (auto& src : {degraded_src(0.5, 0.1, 0.1), degraded_src(0.27, 0.18, 0.05)}) {
        std::vector<std::vector<double>> rows(2, std::vector<double>{1.0});
        auto aux = assemble_lossless_z1(2, 1, 1, rows);
        auto in = inner_rates(src, aux);
        const int x[] = {0}, z[] = {2};
        const double hxz = conditional_entropy(src.pxyz, x, z);
        CHECK(close(in.r1, hxz, 1e-12));
        CHECK(close(in.r2, hxz, 1e-12));
    }
}

// ===== searches =====

TEST_CASE("perfect_side_information_needs_no_rate") {
    auto src = perfect_si_src();
    DistortionQuad target;
    target.dy1 = 0.0; target.dz1 = 0.0; target.dy2 = 0.0; target.dz2 = 0.0;
    auto front = lossless_special_case(src, LosslessStage::Y2, target, quick_cfg());
    REQUIRE(!front.empty());
    for (auto& pt : front) {
        CHECK(close(pt.r1, 0.0, 1e-12));
        CHECK(close(pt.r2, 0.0, 1e-12));
        CHECK(pt.achieved.dy1 == 0.0);
        CHECK(pt.achieved.dz2 == 0.0);
    }
}

TEST_CASE("z1_slack_search_returns_feasible_sorted_frontier") {
    auto src = degraded_src(0.5, 0.1, 0.1);
    DistortionQuad target;
    target.dy1 = 0.25; target.dz1 = 0.30; target.dy2 = 0.08; target.dz2 = 0.05;
    auto front = sr_special_case(src, target, quick_cfg(11));
    REQUIRE(!front.empty());
    for (std::size_t i = 0; i + 1 < front.size(); ++i) {
        CHECK(front[i].r1 < front[i + 1].r1);
        CHECK(front[i].r2 > front[i + 1].r2);
    }
    for (auto& pt : front) {
        CHECK(pt.achieved.meets(target, 1e-9));
        CHECK(pt.r2 >= pt.r1 - 1e-9);
        auto re = evaluate_inner(src, pt.aux);
        CHECK(re.r1 == pt.r1);
        CHECK(re.r2 == pt.r2);
        CHECK(re.achieved.dy2 == pt.achieved.dy2);
    }
}

TEST_CASE("free_stage1_lets_r1_drop_to_zero") {
    auto src = degraded_src(0.5, 0.1, 0.1);
    DistortionQuad target; // stage 1 unconstrained, stage 2 does the work
    target.dy2 = 0.12; target.dz2 = 0.12;
    auto front = sr_special_case(src, target, quick_cfg(12));
    REQUIRE(!front.empty());
    CHECK(front.front().r1 <= 0.02);
}

TEST_CASE("y2_static_search_on_matching_target") {
    auto src = degraded_src(0.5, 0.12, 0.15);
    DistortionQuad target;
    target.dy1 = 0.2; target.dz1 = 0.1; target.dy2 = 0.2; target.dz2 = 0.04;
    REQUIRE(classify_sr_case(target) == SrCaseKind::Y2Static);
    auto front = sr_special_case(src, target, quick_cfg(13));
    REQUIRE(!front.empty());
    for (auto& pt : front) CHECK(pt.achieved.meets(target, 1e-9));
}

TEST_CASE("lossless_y2_search_pins_total_rate") {
    auto src = degraded_src(0.5, 0.08, 0.2);
    const int x[] = {0}, y[] = {1};
    const double hxy = conditional_entropy(src.pxyz, x, y);
    DistortionQuad target;
    target.dy1 = 0.3; target.dz1 = 0.35; target.dy2 = 0.0; target.dz2 = 0.05;
    auto front = lossless_special_case(src, LosslessStage::Y2, target, quick_cfg(14));
    REQUIRE(!front.empty());
    for (auto& pt : front) {
        CHECK(close(pt.r2, hxy));
        CHECK(pt.r1 <= pt.r2 + 1e-12);
        CHECK(pt.achieved.dy2 == 0.0);
        CHECK(pt.achieved.meets(target, 1e-9));
    }
}

TEST_CASE("lossless_z1_search_finds_binning_gains") {
    auto src = degraded_src(0.5, 0.1, 0.15);
    DistortionQuad target;
    target.dy1 = 0.4; target.dz1 = 0.0; target.dy2 = 0.12; target.dz2 = 0.0;
    auto cfg = quick_cfg(15);
    cfg.restarts = 12;
    cfg.steps = 400;
    auto front = lossless_special_case(src, LosslessStage::Z1, target, cfg);
    REQUIRE(!front.empty());
    const int x[] = {0}, z[] = {2};
    const double hxz = conditional_entropy(src.pxyz, x, z);
    for (auto& pt : front) {
        CHECK(pt.achieved.dz1 == 0.0);
        CHECK(pt.achieved.meets(target, 1e-9));
        // never worse than recovering X at the Z decoder outright, and at
        // least the conditional entropy in total
        CHECK(pt.r2 >= hxz - 1e-9);
    }
    CHECK(front.front().r1 <= oracles::h2(0.1) + 0.05); // H(X|Z) plus search slack
}

TEST_CASE("lossless_target_validation") {
    auto src = degraded_src();
    DistortionQuad target;
    target.dy1 = 0.3; target.dz1 = 0.05; target.dy2 = 0.2; target.dz2 = 0.1;
    CHECK_THROWS_AS(lossless_special_case(src, LosslessStage::Z1, target, quick_cfg()),
                    InputError);
    target.dz1 = 0.0;
    target.dy2 = 0.3;
    CHECK_THROWS_AS(lossless_special_case(src, LosslessStage::Y2, target, quick_cfg()),
                    InputError);

    // exact stage-1 recovery is impossible when every reconstruction costs
    DistortionMatrix pricey(2, 2, {0.1, 0.2, 0.3, 0.1});
    auto hard = make_degraded_source({0.5, 0.5}, bsc(0.1, "X", "Z"), bsc(0.1, "Z", "Y"),
                                     DistortionMatrix::hamming(2), pricey,
                                     DistortionMatrix::hamming(2), DistortionMatrix::hamming(2));
    DistortionQuad zero;
    zero.dz1 = 0.0;
    CHECK_THROWS_AS(lossless_special_case(hard, LosslessStage::Z1, zero, quick_cfg()),
                    InfeasibleTargetError);
}
