#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>
#include <tuple>

#include "helpers.hpp"
#include "ssdmgf/plan.hpp"
#include "ssdmgf/serialize.hpp"

using namespace ssdmgf;

namespace {

struct Parts {
    Feeder f;
    BlockPartition bp;
    Backbone bb;
    SourceBlocks sb;

    explicit Parts(const std::string& name) : f(load_feeder(testutil::data_path(name))) {
        bp = partition_blocks(f);
        bb = build_backbone(f, bp);
        sb = find_source_blocks(f, bp);
    }
};

} // namespace

TEST_CASE("scenario grid over the replica feeder") {
    Parts p("replica.fdr");
    GridConfig cfg;
    ScenarioSet set = generate_scenarios(p.f, p.bp, p.sb, cfg, 42);

    REQUIRE(set.scenarios.size() == 1056);
    REQUIRE(set.split.size() == 1056);
    CHECK(set.scenarios.front().id == "sc0000");
    CHECK(set.scenarios.back().id == "sc1055");

    std::set<std::string> ids;
    std::set<std::tuple<std::string, int, int, int>> cells;
    int n_train = 0, n_val = 0, n_test = 0;
    for (std::size_t i = 0; i < set.scenarios.size(); ++i) {
        const ScenarioSpec& sc = set.scenarios[i];
        ids.insert(sc.id);
        cells.insert({sc.season, sc.t0_hour, sc.nu_minutes, sc.damaged_block});
        CHECK(sc.t0_hour >= 6);
        CHECK(sc.t0_hour <= 16);
        CHECK((sc.nu_minutes == 60 || sc.nu_minutes == 120 || sc.nu_minutes == 240));
        CHECK(!p.sb.is_bs(sc.damaged_block));
        CHECK(sc.horizon_steps == cfg.horizon_steps);
        CHECK(sc.dt_minutes == cfg.dt_minutes);
        CHECK(sc.seed == 42);
        switch (set.split[i]) {
        case Split::Train: ++n_train; break;
        case Split::Val: ++n_val; break;
        case Split::Test: ++n_test; break;
        }
    }
    CHECK(ids.size() == 1056);
    CHECK(cells.size() == 1056); // every factorial cell exactly once
    CHECK(n_train == 846);
    CHECK(n_val == 105);
    CHECK(n_test == 105);

    // same seed reproduces the split, a different seed reshuffles it
    ScenarioSet again = generate_scenarios(p.f, p.bp, p.sb, cfg, 42);
    CHECK(again.split == set.split);
    for (std::size_t i = 0; i < set.scenarios.size(); ++i)
        CHECK(again.scenarios[i].id == set.scenarios[i].id);
    ScenarioSet other = generate_scenarios(p.f, p.bp, p.sb, cfg, 7);
    CHECK(other.split != set.split);
    CHECK(other.scenarios.size() == set.scenarios.size());
}

TEST_CASE("grid availability and clock arithmetic") {
    ScenarioSpec sc;
    sc.t0_hour = 9;
    sc.dt_minutes = 15.0;
    sc.nu_minutes = 60;
    CHECK(!sc.tg_available(0));
    CHECK(!sc.tg_available(3));
    CHECK(sc.tg_available(4));
    sc.nu_minutes = 240;
    CHECK(!sc.tg_available(15));
    CHECK(sc.tg_available(16));
    CHECK(sc.minute_of_day(0) == 540.0);
    CHECK(sc.minute_of_day(6) == 630.0);
}

TEST_CASE("feature tensor for the five-block chain") {
    Parts p("toy_ndmgf.fdr");
    GridConfig cfg;
    ScenarioSpec sc;
    sc.season = "summer";
    sc.t0_hour = 10;
    sc.nu_minutes = 120;
    sc.damaged_block = 3;
    sc.horizon_steps = 12;

    FeatureTensor ft = build_features(p.f, p.bp, p.bb, p.sb, sc, cfg);
    REQUIRE(ft.T == 12);
    REQUIRE(ft.K == 5);
    REQUIRE(ft.F == 10);
    REQUIRE(ft.E == 4);
    REQUIRE(ft.x.size() == 12u * 5u * 10u);

    // backbone order: sw71_80, ssw80_90, sw91_95, ssw95_99
    CHECK(ft.edge_flags == std::vector<double>({0.0, 1.0, 0.0, 1.0}));

    const double cl[5] = {0.09, 0.09, 0.09, 0.12, 0.09};
    const double nl[5] = {0.0, 0.45, 0.0, 0.75, 0.0};
    const double bess_flag[5] = {1, 0, 1, 0, 1};
    const double bess_s[5] = {1.0, 0.0, 1.0, 0.0, 1.4};
    const double esw[5] = {1, 1, 1, 1, 0};
    const double ssw[5] = {0, 1, 1, 1, 1};
    for (int t = 0; t < ft.T; ++t) {
        double u_tg = t >= 8 ? 1.0 : 0.0;
        for (int k = 0; k < ft.K; ++k) {
            CHECK(ft.at(t, k, 0) == doctest::Approx(cl[k]).epsilon(1e-12));
            CHECK(ft.at(t, k, 1) == doctest::Approx(nl[k]).epsilon(1e-12));
            CHECK(ft.at(t, k, 2) == 0.0);
            CHECK(ft.at(t, k, 3) == u_tg);
            CHECK(ft.at(t, k, 4) == (k == 3 ? 1.0 : 0.0));
            CHECK(ft.at(t, k, 5) == bess_flag[k]);
            CHECK(ft.at(t, k, 6) == doctest::Approx(bess_s[k]).epsilon(1e-12));
            CHECK(ft.at(t, k, 7) == (bess_flag[k] > 0 ? 4.0 : 0.0));
            CHECK(ft.at(t, k, 8) == esw[k]);
            CHECK(ft.at(t, k, 9) == ssw[k]);
        }
    }
}

TEST_CASE("feature tensor over the replica stays consistent with the feeder") {
    Parts p("replica.fdr");
    GridConfig cfg;
    ScenarioSpec sc;
    sc.season = "winter";
    sc.t0_hour = 7;
    sc.nu_minutes = 240;
    sc.damaged_block = 4;
    sc.horizon_steps = cfg.horizon_steps;

    FeatureTensor ft = build_features(p.f, p.bp, p.bb, p.sb, sc, cfg);
    REQUIRE(ft.T == 32);
    REQUIRE(ft.K == 12);
    REQUIRE(ft.F == 10);
    REQUIRE(ft.E == static_cast<int>(p.bb.edges.size()));

    double flag_sum = 0.0;
    for (double v : ft.edge_flags) flag_sum += v;
    CHECK(flag_sum == 3.0);

    // switch-degree channels recounted from the backbone
    for (int k = 0; k < ft.K; ++k) {
        double esw = 0.0, ssw = 0.0;
        for (const auto& e : p.bb.edges) {
            if (e.u != k && e.v != k) continue;
            (e.kind == LineKind::Ssw ? ssw : esw) += 1.0;
        }
        CHECK(ft.at(5, k, 8) == esw);
        CHECK(ft.at(5, k, 9) == ssw);
    }

    // demand channels recounted load by load for a couple of steps
    for (int t : {0, 13}) {
        double want_cl = 0.0, want_nl = 0.0, got_cl = 0.0, got_nl = 0.0;
        for (const auto& ld : p.f.loads) {
            double s = sum(ld.p_peak) *
                       p.f.profile_factor(ld.profile, sc.season, sc.minute_of_day(t));
            (ld.critical ? want_cl : want_nl) += s;
        }
        for (int k = 0; k < ft.K; ++k) {
            got_cl += ft.at(t, k, 0);
            got_nl += ft.at(t, k, 1);
        }
        CHECK(got_cl == doctest::Approx(want_cl).epsilon(1e-9));
        CHECK(got_nl == doctest::Approx(want_nl).epsilon(1e-9));
    }

    // the damaged block is marked on every step, and only it
    for (int t = 0; t < ft.T; ++t)
        for (int k = 0; k < ft.K; ++k)
            CHECK(ft.at(t, k, 4) == (k == 4 ? 1.0 : 0.0));
}

TEST_CASE("labels of the baseline stay put") {
    Parts p("toy_ndmgf.fdr");
    SystemModel m = SystemModel::build(p.f);
    GridConfig cfg;
    ScenarioSpec sc;
    sc.season = "summer";
    sc.horizon_steps = 6;
    RestorationPlan plan = baseline_plan(m, sc, cfg);
    Labels lb = label_plan(p.f, p.bp, p.bb, p.sb, plan);

    REQUIRE(lb.T == 6);
    REQUIRE(lb.K == 5);
    REQUIRE(lb.E == 2);
    const int want[5] = {1, 0, 2, 0, 3}; // ascending universe {0, 2, 4}
    for (int t = 0; t < lb.T; ++t) {
        for (int k = 0; k < lb.K; ++k) CHECK(lb.root_at(t, k) == want[k]);
        for (int e = 0; e < lb.E; ++e) CHECK(lb.sync_at(t, e) == 0);
    }
}

TEST_CASE("labels follow an extension and a merge") {
    Parts p("toy_ndmgf.fdr");
    SystemModel m = SystemModel::build(p.f);
    GridConfig cfg;
    ScenarioSpec sc;
    sc.season = "summer";
    sc.horizon_steps = 5;

    RestorationPlan plan = RestorationPlan::sized(m, sc.horizon_steps);
    int esw = m.feeder.line_index("sw71_80");
    int ssw = m.feeder.line_index("ssw80_90");
    for (int t = 0; t < plan.T; ++t) {
        StepActions act;
        if (t == 1) act.close_esw.push_back(esw);
        if (t == 2) act.close_ssw.push_back(ssw);
        apply_actions(m, sc, plan, t, act);
        auto err = fill_step(m, sc, cfg, plan, t);
        INFO(err.value_or(""));
        REQUIRE(!err);
    }
    {
        ViolationReport rep = validate_plan(m, sc, cfg, plan);
        INFO(rep.summary());
        REQUIRE(rep.ok());
    }

    Labels lb = label_plan(p.f, p.bp, p.bb, p.sb, plan);
    // block 80 joins the bess70 island at t=1, the merge folds in the bess90
    // island at t=2, and bess99 keeps to itself
    CHECK(lb.root_at(0, 1) == 0);
    CHECK(lb.root_at(1, 1) == 1);
    CHECK(lb.root_at(2, 0) == 1);
    CHECK(lb.root_at(2, 1) == 1);
    CHECK(lb.root_at(2, 2) == 1);
    CHECK(lb.root_at(2, 3) == 0);
    CHECK(lb.root_at(2, 4) == 3);
    CHECK(lb.root_at(4, 2) == 1);

    // the closure event fires exactly once
    for (int t = 0; t < lb.T; ++t) {
        CHECK(lb.sync_at(t, 0) == (t == 2 ? 1 : 0));
        CHECK(lb.sync_at(t, 1) == 0);
    }
}

TEST_CASE("grid-led labels once the substation is back") {
    Parts p("replica.fdr");
    SystemModel m = SystemModel::build(p.f);
    GridConfig cfg;
    ScenarioSpec sc;
    sc.season = "summer";
    sc.nu_minutes = 60;
    sc.horizon_steps = 6;
    RestorationPlan plan = baseline_plan(m, sc, cfg);
    Labels lb = label_plan(p.f, p.bp, p.bb, p.sb, plan);

    CHECK(lb.root_at(3, m.sources.tg_block) == 0);
    CHECK(lb.root_at(4, m.sources.tg_block) == 1);
    const auto universe = p.sb.bs_blocks(); // tg first, then bess ascending
    for (std::size_t i = 1; i < universe.size(); ++i)
        CHECK(lb.root_at(0, universe[i]) > 0);
}

TEST_CASE("feature files round trip exactly") {
    Parts p("toy3.fdr");
    GridConfig cfg;
    ScenarioSpec sc;
    sc.horizon_steps = 9;
    FeatureTensor ft = build_features(p.f, p.bp, p.bb, p.sb, sc, cfg);

    auto path = std::filesystem::temp_directory_path() / "ssdmgf_feat_rt.ssdf";
    save_features(path.string(), ft);
    FeatureTensor back = load_features(path.string());
    std::filesystem::remove(path);

    CHECK(back.T == ft.T);
    CHECK(back.K == ft.K);
    CHECK(back.F == ft.F);
    CHECK(back.E == ft.E);
    CHECK(back.x == ft.x);
    CHECK(back.edge_flags == ft.edge_flags);
}
