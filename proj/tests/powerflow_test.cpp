#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ssdmgf/powerflow.hpp"
#include "ssdmgf/topology.hpp"

using namespace ssdmgf;

namespace {

constexpr double kTol = 1e-9;

EnergizedState all_on(const Feeder& f) {
    EnergizedState st;
    st.bus_on.assign(f.buses.size(), 1);
    st.line_closed.assign(f.lines.size(), 1);
    return st;
}

/// Nodal balance residual per bus and phase: parent inflow plus injection
/// minus child outflows.
double max_kcl_residual(const Feeder& f, const Forest& forest, const TreeFlow& tf,
                        const std::vector<double>& p_inj) {
    double worst = 0.0;
    for (std::size_t b = 0; b < f.buses.size(); ++b) {
        if (forest.component[b] < 0) continue;
        for (int n = 0; n < 3; ++n) {
            if (!f.buses[b].phases.has(n)) continue;
            double acc = p_inj[b * 3 + static_cast<std::size_t>(n)];
            for (std::size_t l = 0; l < f.lines.size(); ++l) {
                const Line& ln = f.lines[l];
                if (!ln.phases.has(n)) continue;
                bool in_tree = false;
                for (std::size_t c = 0; c < f.buses.size(); ++c)
                    if (forest.parent_line[c] == static_cast<int>(l)) in_tree = true;
                if (!in_tree) continue;
                double flow = tf.p_flow[l * 3 + static_cast<std::size_t>(n)];
                if (ln.to == static_cast<int>(b)) acc += flow;   // from -> to arrives here
                if (ln.from == static_cast<int>(b)) acc -= flow; // leaves here
            }
            worst = std::max(worst, std::abs(acc));
        }
    }
    return worst;
}

} // namespace

TEST_CASE("tree flow on an energized chain satisfies balance and drop relations") {
    Feeder f = load_feeder(testutil::data_path("toy3.fdr"));
    EnergizedState st = all_on(f);
    int root = f.bus_index("10");
    Forest forest = build_forest(f, st, {root});
    REQUIRE(forest.radial);
    CHECK(forest.num_islands() == 1);
    CHECK(forest.roots[0] == root);
    CHECK(forest.extra_lines.empty());

    // demand 0.02 per phase everywhere except the root, which supplies it all
    std::vector<double> p_inj(f.buses.size() * 3, -0.02);
    std::vector<double> q_inj(f.buses.size() * 3, -0.005);
    double total_p = 0.02 * static_cast<double>(f.buses.size() - 1);
    double total_q = 0.005 * static_cast<double>(f.buses.size() - 1);
    for (int n = 0; n < 3; ++n) {
        p_inj[static_cast<std::size_t>(root) * 3 + static_cast<std::size_t>(n)] = total_p;
        q_inj[static_cast<std::size_t>(root) * 3 + static_cast<std::size_t>(n)] = total_q;
    }
    TreeFlow tf = solve_tree_flow(f, st, forest, p_inj, q_inj, 1.0);
    REQUIRE(tf.ok);

    CHECK(max_kcl_residual(f, forest, tf, p_inj) <= kTol);

    // root holds the fixed voltage, downstream buses sag under pure load
    for (int n = 0; n < 3; ++n) {
        CHECK(tf.v_sq[static_cast<std::size_t>(root) * 3 + static_cast<std::size_t>(n)] ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    for (std::size_t b = 0; b < f.buses.size(); ++b) {
        if (static_cast<int>(b) == root) continue;
        for (int n = 0; n < 3; ++n)
            CHECK(tf.v_sq[b * 3 + static_cast<std::size_t>(n)] < 1.0);
    }

    // recompute every drop from the line matrices
    for (std::size_t b = 0; b < f.buses.size(); ++b) {
        int pl = forest.parent_line[b];
        if (pl < 0) continue;
        int pb = forest.parent_bus[b];
        const Line& ln = f.lines[static_cast<std::size_t>(pl)];
        double sgn = (ln.from == pb) ? 1.0 : -1.0;
        for (int n = 0; n < 3; ++n) {
            double drop = 0.0;
            for (int m = 0; m < 3; ++m) {
                double fp = sgn * tf.p_flow[static_cast<std::size_t>(pl) * 3 +
                                            static_cast<std::size_t>(m)];
                double fq = sgn * tf.q_flow[static_cast<std::size_t>(pl) * 3 +
                                            static_cast<std::size_t>(m)];
                drop += ln.r[static_cast<std::size_t>(n * 3 + m)] * fp +
                        ln.x[static_cast<std::size_t>(n * 3 + m)] * fq;
            }
            double expect = tf.v_sq[static_cast<std::size_t>(pb) * 3 +
                                    static_cast<std::size_t>(n)] -
                            2.0 * drop;
            CHECK(tf.v_sq[b * 3 + static_cast<std::size_t>(n)] ==
                  doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("forest flags a cycle and names the redundant line") {
    std::string text =
        "[base]\n"
        "s_base_mva = 1.0\n"
        "v_base_kv = 12.47\n"
        "f_nominal = 60.0\n"
        "[buses]\n"
        "a1, abc\n"
        "b1, abc\n"
        "c1, abc\n"
        "[lines]\n" +
        testutil::switch_line("sw_ab", "a1", "b1", "ESW") + "\n" +
        testutil::switch_line("sw_bc", "b1", "c1", "ESW") + "\n" +
        testutil::switch_line("sw_ca", "c1", "a1", "ESW") + "\n";
    Feeder f = parse_feeder(text, "cycle");
    EnergizedState st = all_on(f);
    Forest forest = build_forest(f, st, {f.bus_index("a1")});
    CHECK(!forest.radial);
    CHECK(forest.extra_lines.size() == 1);
}

TEST_CASE("dead buses stay out of every island") {
    Feeder f = load_feeder(testutil::data_path("toy3.fdr"));
    EnergizedState st = all_on(f);
    // de-energize block {30, 31} along with every line touching it
    for (const char* name : {"30", "31"})
        st.bus_on[static_cast<std::size_t>(f.bus_index(name))] = 0;
    for (const char* name : {"sw20_30", "l30_31"})
        st.line_closed[static_cast<std::size_t>(f.line_index(name))] = 0;
    Forest forest = build_forest(f, st, {f.bus_index("10")});
    REQUIRE(forest.radial);
    CHECK(forest.component[static_cast<std::size_t>(f.bus_index("30"))] == -1);
    CHECK(forest.component[static_cast<std::size_t>(f.bus_index("31"))] == -1);
    CHECK(forest.component[static_cast<std::size_t>(f.bus_index("20"))] == 0);

    std::vector<double> zeros(f.buses.size() * 3, 0.0);
    TreeFlow tf = solve_tree_flow(f, st, forest, zeros, zeros, 1.0);
    REQUIRE(tf.ok);
    for (int n = 0; n < 3; ++n) {
        CHECK(tf.v_sq[static_cast<std::size_t>(f.bus_index("31")) * 3 +
                      static_cast<std::size_t>(n)] == 0.0);
        CHECK(tf.p_flow[static_cast<std::size_t>(f.line_index("sw20_30")) * 3 +
                        static_cast<std::size_t>(n)] == 0.0);
    }
}

TEST_CASE("two islands keep independent roots") {
    Feeder f = load_feeder(testutil::data_path("toy_ndmgf.fdr"));
    EnergizedState st = all_on(f);
    // open the middle merge switch so {70,71,80} and {90,91,95,99} split
    st.line_closed[static_cast<std::size_t>(f.line_index("ssw80_90"))] = 0;
    Forest forest = build_forest(f, st, {f.bus_index("70"), f.bus_index("90")});
    REQUIRE(forest.radial);
    CHECK(forest.num_islands() == 2);
    CHECK(forest.component[static_cast<std::size_t>(f.bus_index("80"))] == 0);
    CHECK(forest.component[static_cast<std::size_t>(f.bus_index("99"))] == 1);

    std::vector<double> zeros(f.buses.size() * 3, 0.0);
    TreeFlow tf = solve_tree_flow(f, st, forest, zeros, zeros, 0.98);
    REQUIRE(tf.ok);
    CHECK(tf.v_sq[static_cast<std::size_t>(f.bus_index("70")) * 3] ==
          doctest::Approx(0.98).epsilon(1e-12));
    CHECK(tf.v_sq[static_cast<std::size_t>(f.bus_index("90")) * 3] ==
          doctest::Approx(0.98).epsilon(1e-12));
    // nothing flows across the open switch
    for (int n = 0; n < 3; ++n)
        CHECK(tf.p_flow[static_cast<std::size_t>(f.line_index("ssw80_90")) * 3 +
                        static_cast<std::size_t>(n)] == 0.0);
}
