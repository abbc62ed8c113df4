#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "ssdmgf/sync.hpp"

using namespace ssdmgf;

namespace {

struct Setup {
    Feeder f;
    BlockPartition bp;
    Backbone bb;
    SourceBlocks sb;
    std::vector<SswDomain> domains;
    ModeCatalogue cat;
};

Setup replica_setup() {
    Setup s{load_feeder(testutil::data_path("replica.fdr")), {}, {}, {}, {}, {}};
    s.bp = partition_blocks(s.f);
    s.bb = build_backbone(s.f, s.bp);
    s.sb = find_source_blocks(s.f, s.bp);
    s.domains = compute_ssw_domains(s.bb, s.sb);
    s.cat = enumerate_mode_catalogue(s.f, s.bb, s.sb);
    return s;
}

using Parts = std::vector<std::vector<int>>;

/// Canonical key so partition lists compare as multisets.
std::string key_of(bool tg, const Parts& parts) {
    Parts sorted = parts;
    for (auto& p : sorted) std::sort(p.begin(), p.end());
    std::sort(sorted.begin(), sorted.end());
    std::string k = tg ? "T|" : "t|";
    for (const auto& p : sorted) {
        for (int b : p) k += std::to_string(b) + ",";
        k += ";";
    }
    return k;
}

} // namespace

TEST_CASE("replica merge domains: shared switch offers two pair choices") {
    Setup s = replica_setup();
    REQUIRE(s.domains.size() == 3);
    using P = std::vector<std::pair<int, int>>;
    CHECK(s.domains[0].pairs == P{{0, 2}, {0, 5}});
    CHECK(s.domains[1].pairs == P{{2, 8}});
    CHECK(s.domains[2].pairs == P{{5, 8}});
    // domain edges are the sync switches in backbone order
    auto ssw = s.bb.ssw_edges();
    REQUIRE(ssw.size() == 3);
    for (int i = 0; i < 3; ++i)
        CHECK(s.domains[static_cast<std::size_t>(i)].edge == ssw[static_cast<std::size_t>(i)]);
}

TEST_CASE("replica sync graph covers four mergeable pairs") {
    Setup s = replica_setup();
    SyncGraph g = build_sync_graph(s.bb, s.sb, s.domains);
    using P = std::vector<std::pair<int, int>>;
    CHECK(g.bs_blocks == std::vector<int>{0, 2, 5, 8});
    CHECK(g.edges == P{{0, 2}, {0, 5}, {2, 8}, {5, 8}});
    for (const auto& lines : g.realized_by) CHECK(lines.size() == 1);
}

TEST_CASE("replica mode catalogue: fifteen modes, exact partition table") {
    Setup s = replica_setup();
    REQUIRE(s.cat.modes.size() == 15);

    auto hist = s.cat.class_histogram();
    CHECK(hist[1] == 2);
    CHECK(hist[2] == 7);
    CHECK(hist[3] == 5);
    CHECK(hist[4] == 1);

    // expected mode table for the desk replica, independent of ordering
    std::vector<std::pair<bool, Parts>> expected = {
        // grid tie absent: storage blocks 2, 5, 8
        {false, {{2}, {5}, {8}}},
        {false, {{2, 8}, {5}}},
        {false, {{5, 8}, {2}}},
        {false, {{2, 5, 8}}},
        // grid tie present
        {true, {{0}, {2}, {5}, {8}}},
        {true, {{0, 2}, {5}, {8}}},
        {true, {{0, 5}, {2}, {8}}},
        {true, {{2, 8}, {0}, {5}}},
        {true, {{5, 8}, {0}, {2}}},
        {true, {{0, 2}, {5, 8}}},
        {true, {{0, 5}, {2, 8}}},
        {true, {{0, 2, 8}, {5}}},
        {true, {{0, 5, 8}, {2}}},
        {true, {{2, 5, 8}, {0}}},
        {true, {{0, 2, 5, 8}}},
    };
    std::vector<std::string> want, got;
    for (const auto& [tg, parts] : expected) want.push_back(key_of(tg, parts));
    for (const auto& mo : s.cat.modes) got.push_back(key_of(mo.tg_present, mo.parts));
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    CHECK(want == got);

    // partitions that would need an unavailable pair stay out
    CHECK(!s.cat.find({{2, 5}, {0}, {8}}, true).has_value());
    CHECK(!s.cat.find({{0, 2, 5}, {8}}, true).has_value());
    CHECK(s.cat.find({{0, 2, 5, 8}}, true).has_value());
    CHECK(!s.cat.find({{0, 2, 5, 8}}, false).has_value());

    // the full merge is reachable through two distinct switch configurations
    auto full = s.cat.find({{0, 2, 5, 8}}, true);
    REQUIRE(full.has_value());
    CHECK(s.cat.modes[static_cast<std::size_t>(*full)].realizations == 2);

    // class equals part count on every mode
    for (const auto& mo : s.cat.modes)
        CHECK(mo.klass == static_cast<int>(mo.parts.size()));
}

TEST_CASE("partition recovery from sync indicators") {
    SyncMatrix m(4);
    std::vector<int> all{0, 1, 2, 3};
    auto parts = partition_from_sync(m, all);
    REQUIRE(parts.has_value());
    CHECK(parts->size() == 4);

    m.set(0, 1, 1);
    m.set(2, 3, 1);
    parts = partition_from_sync(m, all);
    REQUIRE(parts.has_value());
    CHECK(parts->size() == 2);
    CHECK((*parts)[0] == std::vector<int>{0, 1});
    CHECK((*parts)[1] == std::vector<int>{2, 3});

    // 0-1 and 1-2 synced but 0-2 missing: not transitively closed
    SyncMatrix bad(3);
    bad.set(0, 1, 1);
    bad.set(1, 2, 1);
    CHECK(!partition_from_sync(bad, {0, 1, 2}).has_value());

    // subset view ignores outside indices
    auto sub = partition_from_sync(m, {0, 1});
    REQUIRE(sub.has_value());
    CHECK(sub->size() == 1);
}

TEST_CASE("transition safety: single merges pass, double absorption fails") {
    // four islands, merge 0-1 at one step
    SyncMatrix a(4);
    SyncMatrix b = a;
    b.set(0, 1, 1);
    CHECK(check_transition_safety(a, b).ok());

    // two disjoint merges in the same step are fine
    SyncMatrix c = b;
    c.set(2, 3, 1);
    CHECK(check_transition_safety(b, c).ok());

    // island 1 absorbing 0 and 2 in one step is the forbidden triple
    SyncMatrix d = a;
    d.set(0, 1, 1);
    d.set(1, 2, 1);
    d.set(0, 2, 1); // transitive closure of the double merge
    auto rep = check_transition_safety(a, d);
    CHECK(!rep.safe);
    CHECK(!rep.violations.empty());
    CHECK(rep.ok() == false);

    // indicators may never fall back
    SyncMatrix e = b;
    e.set(0, 1, 0);
    CHECK(!check_transition_safety(b, e).monotone);

    // merging two already-joined groups pairwise is one event, not a triple:
    // {0,1} + {2,3} -> one merge closing four new indicators
    SyncMatrix f = c;
    f.set(0, 2, 1);
    f.set(0, 3, 1);
    f.set(1, 2, 1);
    f.set(1, 3, 1);
    CHECK(check_transition_safety(c, f).ok());

    // but {0,1} absorbing both {2} and {3} as separate islands is not
    SyncMatrix g = b; // islands {0,1}, {2}, {3}
    SyncMatrix h = b;
    h.set(0, 2, 1);
    h.set(1, 2, 1);
    h.set(0, 3, 1);
    h.set(1, 3, 1);
    h.set(2, 3, 1);
    CHECK(!check_transition_safety(g, h).safe);
}

TEST_CASE("toy merge structures") {
    Feeder f = load_feeder(testutil::data_path("toy_ndmgf.fdr"));
    BlockPartition bp = partition_blocks(f);
    Backbone bb = build_backbone(f, bp);
    SourceBlocks sb = find_source_blocks(f, bp);
    auto domains = compute_ssw_domains(bb, sb);
    REQUIRE(domains.size() == 2);
    using P = std::vector<std::pair<int, int>>;
    CHECK(domains[0].pairs == P{{0, 2}});
    CHECK(domains[1].pairs == P{{2, 4}});
    ModeCatalogue cat = enumerate_mode_catalogue(f, bb, sb);
    // partitions over {0,2,4}: singletons, {02|4}, {24|0}, {024}
    CHECK(cat.modes.size() == 4);
    auto hist = cat.class_histogram();
    CHECK(hist[3] == 1);
    CHECK(hist[2] == 2);
    CHECK(hist[1] == 1);
}
