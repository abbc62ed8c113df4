#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>

#include "helpers.hpp"
#include "ssdmgf/plan.hpp"

using namespace ssdmgf;

namespace {

bool has(const ViolationReport& rep, const std::string& family) {
    return std::any_of(rep.violations.begin(), rep.violations.end(),
                       [&](const Violation& v) { return v.constraint == family; });
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

/// Two single-bus blocks joined by a pair of parallel remote switches; the
/// redundant path makes loop and double-closure cases easy to stage.
SystemModel parallel_pair() {
    std::string text =
        "[base]\n"
        "s_base_mva = 1.0\n"
        "[buses]\n"
        "a1, abc\n"
        "b1, abc\n"
        "[lines]\n" +
        testutil::switch_line("swp1", "a1", "b1", "ESW") + "\n" +
        testutil::switch_line("swp2", "a1", "b1", "ESW") + "\n" +
        "[devices]\n"
        "bessa,BESS,a1,s_nom=1.0,e_nom=4.0,soc_init=0.9,f_set=59.88,droop=0.005\n"
        "[loads]\n"
        "cla,a1,CL,abc,0.03,0.03,0.03,0.01,0.01,0.01\n";
    return SystemModel::build(parse_feeder(text, "parallel_pair"));
}

} // namespace

TEST_CASE("cold-pickup staircase multipliers") {
    GridConfig cfg;
    CHECK(clpu_multiplier(cfg, -1) == 0.0);
    CHECK(clpu_multiplier(cfg, 0) == 2.0);
    CHECK(clpu_multiplier(cfg, 1) == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(clpu_multiplier(cfg, 2) == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(clpu_multiplier(cfg, 3) == 1.0);
    CHECK(clpu_multiplier(cfg, 17) == 1.0);
}

TEST_CASE("nominal demand follows the daily shape, season variants first") {
    std::string text =
        "[base]\n"
        "s_base_mva = 1.0\n"
        "[buses]\n"
        "n1, abc\n"
        "[loads]\n"
        "clp,n1,CL,abc,0.02,0.03,0.04,0.007,0.007,0.007\n"
        "clf,n1,CL,abc,0.05,0.05,0.05,0.017,0.017,0.017\n"
        "[profiles]\n";
    text += "shape";
    for (int h = 0; h < 24; ++h) text += "," + std::to_string(0.5 + h * 0.01);
    text += "\nshape_winter";
    for (int h = 0; h < 24; ++h) text += "," + std::to_string(1.0 - h * 0.01);
    text += "\n";
    Feeder f = parse_feeder(text, "profiled");
    f.loads[0].profile = "shape";

    ScenarioSpec sc = spec(8);
    sc.t0_hour = 6;
    // t = 5 lands at minute 435, hour 7
    CHECK(f.profile_factor("shape", "summer", sc.minute_of_day(5)) ==
          doctest::Approx(0.57).epsilon(1e-12));
    Vec3 p = nominal_load_p(f, f.loads[0], sc, 5);
    CHECK(p[0] == doctest::Approx(0.57 * 0.02).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.57 * 0.03).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(0.57 * 0.04).epsilon(1e-12));

    // the season-specific table wins when it exists
    sc.season = "winter";
    Vec3 pw = nominal_load_p(f, f.loads[0], sc, 5);
    CHECK(pw[0] == doctest::Approx(0.93 * 0.02).epsilon(1e-12));

    // unprofiled loads are flat
    Vec3 pf = nominal_load_p(f, f.loads[1], sc, 5);
    CHECK(pf[0] == doctest::Approx(0.05).epsilon(1e-12));

    // the shape wraps at midnight
    sc.t0_hour = 23;
    sc.season = "summer";
    CHECK(f.profile_factor("shape", sc.season, sc.minute_of_day(8)) ==
          doctest::Approx(0.51).epsilon(1e-12));
}

TEST_CASE("baseline plan on the three-block chain is clean and hand-checkable") {
    SystemModel m = SystemModel::build(load_feeder(testutil::data_path("toy3.fdr")));
    GridConfig cfg;
    ScenarioSpec sc = spec(16);
    RestorationPlan plan = baseline_plan(m, sc, cfg);

    for (RuleSet rules : {RuleSet::Ssdmgf, RuleSet::Ndmgf, RuleSet::RuleBased}) {
        ViolationReport rep = validate_plan(m, sc, cfg, plan, rules);
        INFO(rep.summary());
        CHECK(rep.ok());
    }

    // only the storage block self-starts, and it does so immediately
    for (int t = 0; t < plan.T; ++t) {
        CHECK(plan.bk(t, 0) == 1);
        CHECK(plan.bk(t, 1) == 0);
        CHECK(plan.bk(t, 2) == 0);
        for (int b = 0; b < plan.num_buses; ++b) CHECK(plan.nlb(t, b) == 0);
    }

    // served demand is cl10 alone: 0.06 p.u. nominal with the pickup
    // staircase on top, so step values are 18, 14.4, 11.7, then 9 forever
    CHECK(step_value(m, cfg, plan, 0) == doctest::Approx(18.0).epsilon(1e-9));
    CHECK(step_value(m, cfg, plan, 1) == doctest::Approx(14.4).epsilon(1e-9));
    CHECK(step_value(m, cfg, plan, 2) == doctest::Approx(11.7).epsilon(1e-9));
    CHECK(step_value(m, cfg, plan, 3) == doctest::Approx(9.0).epsilon(1e-9));
    CHECK(restored_value(m, sc, cfg, plan) == doctest::Approx(161.1).epsilon(1e-9));

    // storage bookkeeping: 0.294 p.u. served over the first three quarters
    CHECK(plan.soc_at(2, 0) == doctest::Approx(0.9 - 0.294 * 0.25 / 6.0).epsilon(1e-9));
    for (int t = 1; t < plan.T; ++t) CHECK(plan.soc_at(t, 0) < plan.soc_at(t - 1, 0));
}

TEST_CASE("single-field corruptions trip their constraint families") {
    SystemModel m = SystemModel::build(load_feeder(testutil::data_path("toy3.fdr")));
    GridConfig cfg;
    ScenarioSpec sc = spec(8);
    const RestorationPlan base = baseline_plan(m, sc, cfg);
    const int W_BK = base.num_blocks, W_LN = base.num_lines, W_NB = base.num_buses;

    SUBCASE("de-energizing an energized block") {
        RestorationPlan p = base;
        p.u_bk[RestorationPlan::idx2(4, 0, W_BK)] = 0;
        CHECK(has(validate_plan(m, sc, cfg, p), "eq25a"));
    }
    SUBCASE("energizing the damaged block") {
        ScenarioSpec scd = sc;
        scd.damaged_block = 2;
        RestorationPlan p = baseline_plan(m, scd, cfg);
        CHECK(validate_plan(m, scd, cfg, p).ok());
        p.u_bk[RestorationPlan::idx2(5, 2, W_BK)] = 1;
        CHECK(has(validate_plan(m, scd, cfg, p), "rule.damaged"));
    }
    SUBCASE("closing a switch between two dead blocks") {
        RestorationPlan p = base;
        p.u_line[RestorationPlan::idx2(0, m.feeder.line_index("sw20_30"), W_LN)] = 1;
        ViolationReport rep = validate_plan(m, sc, cfg, p);
        CHECK(has(rep, "eq26a"));
        CHECK(has(rep, "eq25d"));
    }
    SUBCASE("claiming grid power before recovery") {
        RestorationPlan p = base;
        p.u_tg[2] = 1;
        CHECK(has(validate_plan(m, sc, cfg, p), "rule.grid"));
    }
    SUBCASE("a jump in stored energy") {
        RestorationPlan p = base;
        p.soc[RestorationPlan::idx2(4, 0, p.num_devices)] += 0.5;
        ViolationReport rep = validate_plan(m, sc, cfg, p);
        CHECK(has(rep, "eq30b"));
        CHECK(has(rep, "eq30c"));
    }
    SUBCASE("served load that is not the staircase demand") {
        RestorationPlan p = base;
        p.p_load[RestorationPlan::idx3(3, 0, 0, p.num_loads)] += 0.01;
        ViolationReport rep = validate_plan(m, sc, cfg, p);
        CHECK(has(rep, "eq32a"));
        CHECK(has(rep, "eq34"));
    }
    SUBCASE("pickup at a de-energized bus") {
        RestorationPlan p = base;
        p.u_nlb[RestorationPlan::idx2(3, m.feeder.bus_index("30"), W_NB)] = 1;
        CHECK(has(validate_plan(m, sc, cfg, p), "eq33c"));
    }
    SUBCASE("pickup that does not stick") {
        RestorationPlan p = base;
        p.u_nlb[RestorationPlan::idx2(2, m.feeder.bus_index("11"), W_NB)] = 1;
        CHECK(has(validate_plan(m, sc, cfg, p), "eq33d"));
    }
    SUBCASE("voltage pushed out of the squared band") {
        RestorationPlan p = base;
        p.v_sq[RestorationPlan::idx3(1, m.feeder.bus_index("10"), 0, W_NB)] = 1.44;
        CHECK(has(validate_plan(m, sc, cfg, p), "eq36b"));
    }
    SUBCASE("block frequency outside the window") {
        RestorationPlan p = base;
        p.f_block[RestorationPlan::idx2(6, 0, W_BK)] = 61.0;
        CHECK(has(validate_plan(m, sc, cfg, p), "eq15"));
    }
    SUBCASE("island count off by one") {
        RestorationPlan p = base;
        p.s_count[5] += 1;
        ViolationReport rep = validate_plan(m, sc, cfg, p);
        CHECK(has(rep, "eq28a"));
        CHECK(has(rep, "eq28b"));
        CHECK(has(rep, "eq20a"));
    }
    SUBCASE("dimension mismatch throws instead of reporting") {
        RestorationPlan p = base;
        p.num_blocks += 1;
        CHECK_THROWS_AS(validate_plan(m, sc, cfg, p), std::invalid_argument);
    }
}

TEST_CASE("synchronization switch rules on the five-block chain") {
    SystemModel m = SystemModel::build(load_feeder(testutil::data_path("toy_ndmgf.fdr")));
    GridConfig cfg;
    ScenarioSpec sc = spec(8);
    const RestorationPlan base = baseline_plan(m, sc, cfg);
    int ssw = m.feeder.line_index("ssw80_90");

    SUBCASE("closing against a dead terminal") {
        RestorationPlan p = base;
        p.u_line[RestorationPlan::idx2(2, ssw, p.num_lines)] = 1;
        CHECK(has(validate_plan(m, sc, cfg, p), "eq27b"));
    }
    SUBCASE("reopening later") {
        RestorationPlan p = base;
        p.u_line[RestorationPlan::idx2(3, ssw, p.num_lines)] = 1;
        ViolationReport rep = validate_plan(m, sc, cfg, p);
        CHECK(has(rep, "eq27a")); // the open at t=4 is the fallback
    }
}

TEST_CASE("redundant closures around a parallel switch pair") {
    SystemModel m = parallel_pair();
    GridConfig cfg;
    ScenarioSpec sc = spec(4);
    int sw1 = m.feeder.line_index("swp1");
    int sw2 = m.feeder.line_index("swp2");

    SUBCASE("two switches energizing one block at once") {
        RestorationPlan p = baseline_plan(m, sc, cfg);
        p.u_bk[RestorationPlan::idx2(1, 1, p.num_blocks)] = 1;
        p.u_line[RestorationPlan::idx2(1, sw1, p.num_lines)] = 1;
        p.u_line[RestorationPlan::idx2(1, sw2, p.num_lines)] = 1;
        ViolationReport rep = validate_plan(m, sc, cfg, p);
        CHECK(has(rep, "eq25e"));
        CHECK(has(rep, "island.radial"));
    }
    SUBCASE("closing the second switch once both ends are live") {
        RestorationPlan p = RestorationPlan::sized(m, 3);
        apply_actions(m, sc, p, 0, StepActions{});
        REQUIRE(!fill_step(m, sc, cfg, p, 0));
        apply_actions(m, sc, p, 1, StepActions{{sw1}, {}, {}});
        REQUIRE(!fill_step(m, sc, cfg, p, 1));
        apply_actions(m, sc, p, 2, StepActions{});
        REQUIRE(!fill_step(m, sc, cfg, p, 2));
        CHECK(validate_plan(m, sc, cfg, p).ok());

        p.u_line[RestorationPlan::idx2(2, sw2, p.num_lines)] = 1;
        ViolationReport rep = validate_plan(m, sc, cfg, p);
        CHECK(has(rep, "eq26b"));
        CHECK(has(rep, "island.radial"));
    }
}

TEST_CASE("grid frequency pinning once the feeder has a substation") {
    SystemModel m = SystemModel::build(load_feeder(testutil::data_path("replica.fdr")));
    GridConfig cfg;
    ScenarioSpec sc = spec(8, 60); // grid back from step 4
    RestorationPlan plan = baseline_plan(m, sc, cfg);
    {
        ViolationReport rep = validate_plan(m, sc, cfg, plan);
        INFO(rep.summary());
        CHECK(rep.ok());
    }
    CHECK(plan.u_tg[3] == 0);
    CHECK(plan.u_tg[4] == 1);
    CHECK(plan.bk(4, m.sources.tg_block) == 1);
    CHECK(plan.fblk(4, m.sources.tg_block) == doctest::Approx(60.0).epsilon(1e-12));

    plan.f_block[RestorationPlan::idx2(5, m.sources.tg_block, plan.num_blocks)] = 59.0;
    CHECK(has(validate_plan(m, sc, cfg, plan), "eq13"));
}
