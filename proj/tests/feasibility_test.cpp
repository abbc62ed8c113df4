#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "helpers.hpp"
#include "ssdmgf/feasibility.hpp"
#include "ssdmgf/serialize.hpp"

using namespace ssdmgf;

namespace {

SystemModel chain5() {
    return SystemModel::build(load_feeder(testutil::data_path("toy_ndmgf.fdr")));
}

ScenarioSpec spec(int horizon, int nu = 240) {
    ScenarioSpec sc;
    sc.id = "case";
    sc.season = "summer";
    sc.t0_hour = 10;
    sc.nu_minutes = nu;
    sc.horizon_steps = horizon;
    return sc;
}

/// Logits that pin block k at step t to one root label with near certainty.
void pin(Logits& z, int t, int k, int label) {
    for (int r = 0; r < z.R; ++r) z.root_at(t, k, r) = r == label ? 8.0 : 0.0;
}

Logits blank(int T, int K, int R, int E) {
    Logits z;
    z.T = T;
    z.K = K;
    z.R = R;
    z.E = E;
    z.z_root.assign(static_cast<std::size_t>(T) * K * R, 0.0);
    z.z_sync.assign(static_cast<std::size_t>(T) * E, -1.0);
    return z;
}

/// Pairwise synchronization matrix implied by a step's representative map.
SyncMatrix matrix_from_rho(std::vector<int> rho, const std::vector<int>& universe,
                           const std::vector<int>& bs_blocks) {
    auto find = [&](int r) {
        while (rho[static_cast<std::size_t>(r)] != r) r = rho[static_cast<std::size_t>(r)];
        return r;
    };
    const int n = static_cast<int>(bs_blocks.size());
    SyncMatrix sm(n);
    auto label_of = [&](int i) {
        for (std::size_t u = 0; u < universe.size(); ++u)
            if (universe[u] == bs_blocks[static_cast<std::size_t>(i)]) return static_cast<int>(u) + 1;
        return 0;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (find(label_of(i)) == find(label_of(j))) sm.set(i, j, 1);
    return sm;
}

} // namespace

TEST_CASE("threshold rule for a single block") {
    // labels: 0 dead, 1 = grid, 2..3 storage
    CHECK(assign_root({0.2, 0.5, 0.2, 0.1}, 0.5, 1, true) == 1);  // argmax, tg not over threshold
    CHECK(assign_root({0.1, 0.6, 0.2, 0.1}, 0.5, 1, true) == 1);  // tg clears the threshold
    CHECK(assign_root({0.6, 0.2, 0.1, 0.1}, 0.5, 1, true) == 0);  // dead clears it
    CHECK(assign_root({0.2, 0.6, 0.1, 0.1}, 0.5, 1, false) == 0); // tg masked, argmax of the rest
    CHECK(assign_root({0.1, 0.6, 0.15, 0.15}, 0.5, 1, false) == 2);
    CHECK(assign_root({0.1, 0.0, 0.45, 0.45}, 0.5, 0, true) == 2); // tie goes to the lower label
}

TEST_CASE("merging representatives") {
    std::vector<int> rho{0, 1, 2, 3};
    unite(rho, 2, 3, 0);
    CHECK(rho == std::vector<int>({0, 1, 2, 2}));
    unite(rho, 1, 2, 0);
    CHECK(rho == std::vector<int>({0, 1, 1, 2}));

    std::vector<int> rho_tg{0, 1, 2, 3};
    unite(rho_tg, 1, 3, 3); // the grid root absorbs
    CHECK(rho_tg == std::vector<int>({0, 3, 2, 3}));
    unite(rho_tg, 3, 2, 3);
    CHECK(rho_tg == std::vector<int>({0, 3, 3, 3}));

    CHECK_THROWS_AS(unite(rho_tg, 2, 2, 0), std::invalid_argument);
}

TEST_CASE("resolution walks a crafted schedule") {
    SystemModel m = chain5();
    ScenarioSpec sc = spec(4);
    ResolveOptions opt = make_resolve_options(m, sc, 0.5);
    REQUIRE(opt.universe == std::vector<int>({0, 2, 4}));
    REQUIRE(opt.tg_label == 0);
    REQUIRE(opt.ssw_ends.size() == 2);
    CHECK(opt.ssw_ends[0] == std::array<int, 2>({1, 2}));
    CHECK(opt.ssw_ends[1] == std::array<int, 2>({3, 4}));

    Logits z = blank(4, 5, 4, 2);
    const int want0[5] = {1, 1, 2, 2, 3};
    for (int t = 0; t < 4; ++t)
        for (int k = 0; k < 5; ++k) pin(z, t, k, want0[k]);
    z.sync_at(0, 0) = 9.0; // suppressed: the first step never closes
    z.sync_at(1, 0) = 5.0;
    z.sync_at(1, 1) = 1.0; // suppressed: its islands overlap the first merge
    z.sync_at(2, 1) = 5.0;

    FeasibleOutputs fo = resolve_sequence(z, opt);
    REQUIRE(fo.T == 4);
    for (int k = 0; k < 5; ++k) CHECK(fo.label_at(0, k) == want0[k]);
    const int want1[5] = {1, 1, 1, 1, 3};
    for (int k = 0; k < 5; ++k) CHECK(fo.label_at(1, k) == want1[k]);
    for (int k = 0; k < 5; ++k) {
        CHECK(fo.label_at(2, k) == 1);
        CHECK(fo.label_at(3, k) == 1);
    }

    CHECK(fo.sync_at(0, 0) == 0);
    CHECK(fo.sync_at(1, 0) == 1);
    CHECK(fo.sync_at(1, 1) == 0);
    CHECK(fo.sync_at(2, 1) == 1);
    CHECK(fo.sync_at(3, 0) == 0);
    CHECK(fo.sync_at(3, 1) == 0);

    CHECK(fo.rho_t[0] == std::vector<int>({0, 1, 2, 3}));
    CHECK(fo.rho_t[1] == std::vector<int>({0, 1, 1, 3}));
    CHECK(fo.rho_t[2] == std::vector<int>({0, 1, 1, 1}));

    // the whole walk is a safe transition sequence
    SyncMatrix prev(3);
    for (int t = 0; t < fo.T; ++t) {
        SyncMatrix cur = matrix_from_rho(fo.rho_t[static_cast<std::size_t>(t)], opt.universe,
                                         m.bs_blocks);
        CHECK(check_transition_safety(prev, cur).ok());
        prev = cur;
    }

    // and it converts to a consistent catalogued warm start
    PartialAssignment pa = extract_warm_start(fo, m, sc);
    CHECK(pa.family == "CAWS");
    CHECK(!pa.degraded);
    CHECK(pa.ssw_at(0, 0) == 0);
    CHECK(pa.ssw_at(1, 0) == 1);
    CHECK(pa.ssw_at(3, 0) == 1); // cumulative from the closing step on
    CHECK(pa.ssw_at(1, 1) == 0);
    CHECK(pa.ssw_at(2, 1) == 1);
    CHECK(pa.klass == std::vector<int>({3, 2, 1, 1}));
    WarmCheck wc = check_warm(pa, m, sc);
    INFO(wc.reason);
    CHECK(wc.consistent);
}

TEST_CASE("random score tensors always resolve to safe sequences") {
    SystemModel m = chain5();
    ScenarioSpec sc = spec(10);
    ResolveOptions opt = make_resolve_options(m, sc, 0.5);
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g(0.0, 2.0);

    for (int trial = 0; trial < 400; ++trial) {
        Logits z = blank(10, 5, 4, 2);
        for (double& v : z.z_root) v = g(rng);
        for (double& v : z.z_sync) v = g(rng);
        FeasibleOutputs fo = resolve_sequence(z, opt);

        SyncMatrix prev(3);
        for (int t = 0; t < fo.T; ++t) {
            SyncMatrix cur = matrix_from_rho(fo.rho_t[static_cast<std::size_t>(t)],
                                             opt.universe, m.bs_blocks);
            auto tr = check_transition_safety(prev, cur);
            REQUIRE(tr.monotone);
            REQUIRE(tr.safe);
            prev = cur;
        }
        for (int e = 0; e < fo.E; ++e) CHECK(fo.sync_at(0, e) == 0);
    }
}

TEST_CASE("loss terms on a hand-worked pair") {
    // T=3, K=2, R=3, E=1
    FeasibleOutputs y;
    y.T = 3; y.K = 2; y.R = 3; y.E = 1;
    y.labels = {1, 0, 1, 2, 1, 1};
    y.sync = {0, 1, 0};
    y.rho_t.assign(3, {});
    FeasibleOutputs ybar = y;
    ybar.labels = {1, 0, 2, 2, 1, 2};
    ybar.sync = {1, 1, 0};

    LossBreakdown lb = metrics(y, ybar, 0.1, 0.2);
    CHECK(lb.root == doctest::Approx(4.0 / 18.0).epsilon(1e-12));
    CHECK(lb.sync == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(lb.spar == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(lb.temp == doctest::Approx(4.0 / 12.0).epsilon(1e-12));
    CHECK(lb.total ==
          doctest::Approx(4.0 / 18.0 + 1.0 / 3.0 + 0.1 / 3.0 + 0.2 * 4.0 / 12.0).epsilon(1e-12));

    // identical trajectories keep only the regularizers
    LossBreakdown self = metrics(y, y, 0.25, 0.5);
    CHECK(self.root == 0.0);
    CHECK(self.sync == 0.0);
    CHECK(self.spar == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(self.temp == doctest::Approx(4.0 / 12.0).epsilon(1e-12));
    CHECK(self.total == doctest::Approx(0.25 / 3.0 + 0.5 / 3.0).epsilon(1e-12));

    FeasibleOutputs off = y;
    off.K = 3;
    CHECK_THROWS_AS(metrics(y, off, 0.1, 0.2), std::invalid_argument);
    FeasibleOutputs tiny;
    tiny.T = 1; tiny.K = 1; tiny.R = 1; tiny.E = 0;
    tiny.labels = {0};
    tiny.rho_t.assign(1, {});
    CHECK_THROWS_AS(metrics(tiny, tiny, 0.1, 0.2), std::invalid_argument);
}

TEST_CASE("labels convert into the outputs shape") {
    Labels lb;
    lb.T = 2; lb.K = 3; lb.E = 1;
    lb.root = {1, 0, 2, 1, 1, 2};
    lb.sync = {0, 1};
    FeasibleOutputs fo = outputs_from_labels(lb, 3);
    CHECK(fo.R == 3);
    CHECK(fo.labels == std::vector<int>({1, 0, 2, 1, 1, 2}));
    CHECK(fo.sync == std::vector<std::uint8_t>({0, 1}));
    // the conversion feeds straight into the metric
    LossBreakdown m1 = metrics(fo, fo, 0.0, 0.0);
    CHECK(m1.total == 0.0);
}

TEST_CASE("straight-through wrapper keeps both arrays") {
    StePair p = ste_wrap({1.0, 0.0}, {0.8, 0.2});
    CHECK(p.value == std::vector<double>({1.0, 0.0}));
    CHECK(p.sensitivity == std::vector<double>({0.8, 0.2}));
    CHECK_THROWS_AS(ste_wrap({1.0}, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("warm-start families against the screen") {
    SystemModel m = chain5();
    ScenarioSpec sc = spec(12);

    SUBCASE("all-zero schedule") {
        PartialAssignment pa = make_azws(m, sc);
        CHECK(pa.family == "AZWS");
        CHECK(!pa.degraded);
        for (std::size_t i = 0; i < pa.u_ssw.size(); ++i) CHECK(pa.u_ssw[i] == 0);
        CHECK(pa.klass == std::vector<int>(12, 3));
        WarmCheck wc = check_warm(pa, m, sc);
        INFO(wc.reason);
        CHECK(wc.consistent);
    }
    SUBCASE("oracle copy of the baseline") {
        GridConfig cfg;
        RestorationPlan plan = baseline_plan(m, sc, cfg);
        PartialAssignment pa = warm_from_plan(plan, m);
        CHECK(pa.family == "OSWS");
        CHECK(pa.sync == plan.sync);
        CHECK(pa.mode_index == plan.mode_index);
        WarmCheck wc = check_warm(pa, m, sc);
        INFO(wc.reason);
        CHECK(wc.consistent);
    }
    SUBCASE("random family almost always fails the screen") {
        int rejected = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            PartialAssignment pa = make_rws(m, sc, seed);
            CHECK(pa.family == "RWS");
            if (!check_warm(pa, m, sc).consistent) ++rejected;
        }
        CHECK(rejected >= 18);
    }
    SUBCASE("horizon mismatch is caught") {
        PartialAssignment pa = make_azws(m, sc);
        ScenarioSpec other = spec(9);
        CHECK(!check_warm(pa, m, other).consistent);
    }
    SUBCASE("an empty assignment is trivially consistent") {
        CHECK(check_warm(PartialAssignment{}, m, sc).consistent);
    }
}

TEST_CASE("built-in scores feed the whole pipeline") {
    for (const char* name : {"toy_ndmgf.fdr", "replica.fdr"}) {
        SystemModel m = SystemModel::build(load_feeder(testutil::data_path(name)));
        GridConfig cfg;
        ScenarioSpec sc = spec(cfg.horizon_steps, 120);
        Logits z = heuristic_logits(m, sc, cfg);
        REQUIRE(z.shape_ok());
        CHECK(z.K == m.blocks.num_blocks);
        CHECK(z.R == 1 + static_cast<int>(m.bs_blocks.size()));

        ResolveOptions opt = make_resolve_options(m, sc, cfg.lambda);
        FeasibleOutputs fo = resolve_sequence(z, opt);
        PartialAssignment pa = extract_warm_start(fo, m, sc);
        WarmCheck wc = check_warm(pa, m, sc);
        INFO(name << ": " << wc.reason);
        CHECK(wc.consistent);
    }
}

TEST_CASE("feasibility artifacts round trip through disk") {
    SystemModel m = chain5();
    GridConfig cfg;
    ScenarioSpec sc = spec(6);
    auto dir = std::filesystem::temp_directory_path();

    Logits z = heuristic_logits(m, sc, cfg);
    auto zp = dir / "ssdmgf_logits_rt.json";
    save_logits(zp.string(), z);
    Logits z2 = load_logits(zp.string());
    std::filesystem::remove(zp);
    CHECK(z2.T == z.T);
    CHECK(z2.z_root == z.z_root);
    CHECK(z2.z_sync == z.z_sync);

    FeasibleOutputs fo = resolve_sequence(z, make_resolve_options(m, sc, cfg.lambda));
    auto fp = dir / "ssdmgf_feasible_rt.json";
    save_feasible(fp.string(), fo);
    FeasibleOutputs fo2 = load_feasible(fp.string());
    std::filesystem::remove(fp);
    CHECK(fo2.labels == fo.labels);
    CHECK(fo2.sync == fo.sync);
    CHECK(fo2.rho_t == fo.rho_t);

    PartialAssignment pa = extract_warm_start(fo, m, sc);
    auto wp = dir / "ssdmgf_warm_rt.json";
    save_warm(wp.string(), pa);
    PartialAssignment pa2 = load_warm(wp.string());
    std::filesystem::remove(wp);
    CHECK(pa2.T == pa.T);
    CHECK(pa2.n_ssw == pa.n_ssw);
    CHECK(pa2.u_ssw == pa.u_ssw);
    CHECK(pa2.sync == pa.sync);
    CHECK(pa2.mode_index == pa.mode_index);
    CHECK(pa2.klass == pa.klass);
    CHECK(pa2.degraded == pa.degraded);
    CHECK(pa2.family == pa.family);
}
