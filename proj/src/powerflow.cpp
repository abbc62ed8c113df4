#include "ssdmgf/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace ssdmgf {

Forest build_forest(const Feeder& f, const EnergizedState& st, const std::vector<int>& roots) {
    const int nb = static_cast<int>(f.buses.size());
    Forest fo;
    fo.component.assign(static_cast<std::size_t>(nb), -1);
    fo.parent_line.assign(static_cast<std::size_t>(nb), -1);
    fo.parent_bus.assign(static_cast<std::size_t>(nb), -1);

    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(nb)); // (line, other bus)
    for (std::size_t li = 0; li < f.lines.size(); ++li) {
        if (!st.line_closed[li]) continue;
        const auto& l = f.lines[li];
        adj[static_cast<std::size_t>(l.from)].emplace_back(static_cast<int>(li), l.to);
        adj[static_cast<std::size_t>(l.to)].emplace_back(static_cast<int>(li), l.from);
    }

    std::vector<char> line_used(f.lines.size(), 0);
    auto bfs = [&](int root, int comp) {
        std::deque<int> q{root};
        fo.component[static_cast<std::size_t>(root)] = comp;
        std::vector<int> order{root};
        while (!q.empty()) {
            int b = q.front();
            q.pop_front();
            for (auto [li, nb2] : adj[static_cast<std::size_t>(b)]) {
                if (!st.bus_on[static_cast<std::size_t>(nb2)]) continue;
                if (fo.component[static_cast<std::size_t>(nb2)] >= 0) {
                    // Seen before: the line is a cycle maker unless it is the
                    // one we arrived through.
                    if (fo.parent_line[static_cast<std::size_t>(nb2)] != li &&
                        fo.parent_line[static_cast<std::size_t>(b)] != li && !line_used[static_cast<std::size_t>(li)]) {
                        fo.radial = false;
                        fo.extra_lines.push_back(li);
                        line_used[static_cast<std::size_t>(li)] = 1;
                    }
                    continue;
                }
                fo.component[static_cast<std::size_t>(nb2)] = comp;
                fo.parent_line[static_cast<std::size_t>(nb2)] = li;
                fo.parent_bus[static_cast<std::size_t>(nb2)] = b;
                line_used[static_cast<std::size_t>(li)] = 1;
                order.push_back(nb2);
                q.push_back(nb2);
            }
        }
        fo.order.push_back(std::move(order));
    };

    int comp = 0;
    for (int r : roots) {
        if (r < 0 || r >= nb || !st.bus_on[static_cast<std::size_t>(r)]) continue;
        if (fo.component[static_cast<std::size_t>(r)] >= 0) continue;
        fo.roots.push_back(r);
        bfs(r, comp++);
    }
    // Orphan islands (no declared root): give them a deterministic fallback.
    for (int b = 0; b < nb; ++b) {
        if (!st.bus_on[static_cast<std::size_t>(b)]) continue;
        if (fo.component[static_cast<std::size_t>(b)] >= 0) continue;
        fo.roots.push_back(b);
        bfs(b, comp++);
    }
    // A closed line touching a dead bus also breaks the forest contract.
    for (std::size_t li = 0; li < f.lines.size(); ++li) {
        if (!st.line_closed[li]) continue;
        const auto& l = f.lines[li];
        if (!st.bus_on[static_cast<std::size_t>(l.from)] || !st.bus_on[static_cast<std::size_t>(l.to)])
            fo.radial = false;
    }
    return fo;
}

TreeFlow solve_tree_flow(const Feeder& f, const EnergizedState&, const Forest& forest,
                         const std::vector<double>& p_inj, const std::vector<double>& q_inj,
                         double root_v_sq) {
    const std::size_t nb = f.buses.size();
    const std::size_t nl = f.lines.size();
    TreeFlow tf;
    tf.p_flow.assign(nl * 3, 0.0);
    tf.q_flow.assign(nl * 3, 0.0);
    tf.v_sq.assign(nb * 3, 0.0);
    if (!forest.radial) {
        tf.ok = false;
        tf.error = "energized topology is not a forest";
        return tf;
    }
    if (p_inj.size() != nb * 3 || q_inj.size() != nb * 3) {
        tf.ok = false;
        tf.error = "injection vector size mismatch";
        return tf;
    }

    // Accumulate subtree sums leaf-to-root: the flow on a bus's parent line
    // carries the negated net injection of everything at or below the bus.
    std::vector<double> acc_p(nb * 3, 0.0), acc_q(nb * 3, 0.0);
    for (std::size_t b = 0; b < nb; ++b)
        for (int n = 0; n < 3; ++n) {
            acc_p[b * 3 + static_cast<std::size_t>(n)] = p_inj[b * 3 + static_cast<std::size_t>(n)];
            acc_q[b * 3 + static_cast<std::size_t>(n)] = q_inj[b * 3 + static_cast<std::size_t>(n)];
        }

    for (const auto& order : forest.order) {
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int b = *it;
            int pl = forest.parent_line[static_cast<std::size_t>(b)];
            if (pl < 0) continue;
            int pb = forest.parent_bus[static_cast<std::size_t>(b)];
            const auto& line = f.lines[static_cast<std::size_t>(pl)];
            // The parent line delivers the subtree deficit: flow in the
            // parent -> child direction equals minus the subtree injection.
            double sgn = (line.from == pb) ? 1.0 : -1.0;
            for (int n = 0; n < 3; ++n) {
                if (!line.phases.has(n)) continue;
                double fp = -acc_p[static_cast<std::size_t>(b) * 3 + static_cast<std::size_t>(n)];
                double fq = -acc_q[static_cast<std::size_t>(b) * 3 + static_cast<std::size_t>(n)];
                tf.p_flow[static_cast<std::size_t>(pl) * 3 + static_cast<std::size_t>(n)] = sgn * fp;
                tf.q_flow[static_cast<std::size_t>(pl) * 3 + static_cast<std::size_t>(n)] = sgn * fq;
            }
            // Fold the child's subtree into the parent. A nonzero residual on
            // a phase the feeding line does not carry is unservable demand.
            for (int n = 0; n < 3; ++n) {
                double rp = acc_p[static_cast<std::size_t>(b) * 3 + static_cast<std::size_t>(n)];
                double rq = acc_q[static_cast<std::size_t>(b) * 3 + static_cast<std::size_t>(n)];
                if (!line.phases.has(n) && (std::abs(rp) > 1e-12 || std::abs(rq) > 1e-12)) {
                    tf.ok = false;
                    tf.error = "injection on phase " + std::to_string(n) +
                               " below bus " + f.buses[static_cast<std::size_t>(b)].name +
                               " cannot reach a source";
                    return tf;
                }
                acc_p[static_cast<std::size_t>(pb) * 3 + static_cast<std::size_t>(n)] += rp;
                acc_q[static_cast<std::size_t>(pb) * 3 + static_cast<std::size_t>(n)] += rq;
            }
        }
    }

    // Voltage sweep root-to-leaf: v_child = v_parent - 2 (R p + X q) over the
    // line's phases, with the flow vector taken in parent -> child direction.
    for (std::size_t ci = 0; ci < forest.order.size(); ++ci) {
        for (int b : forest.order[ci]) {
            const Bus& bus = f.buses[static_cast<std::size_t>(b)];
            int pl = forest.parent_line[static_cast<std::size_t>(b)];
            if (pl < 0) {
                for (int n = 0; n < 3; ++n)
                    if (bus.phases.has(n))
                        tf.v_sq[static_cast<std::size_t>(b) * 3 + static_cast<std::size_t>(n)] = root_v_sq;
                continue;
            }
            int pb = forest.parent_bus[static_cast<std::size_t>(b)];
            const auto& line = f.lines[static_cast<std::size_t>(pl)];
            double sgn = (line.from == pb) ? 1.0 : -1.0;
            for (int n = 0; n < 3; ++n) {
                if (!bus.phases.has(n)) continue;
                if (!line.phases.has(n)) {
                    // Phase not carried by the feeding line: inherit upstream.
                    tf.v_sq[static_cast<std::size_t>(b) * 3 + static_cast<std::size_t>(n)] =
                        tf.v_sq[static_cast<std::size_t>(pb) * 3 + static_cast<std::size_t>(n)];
                    continue;
                }
                double drop = 0.0;
                for (int m = 0; m < 3; ++m) {
                    if (!line.phases.has(m)) continue;
                    double fp = sgn * tf.p_flow[static_cast<std::size_t>(pl) * 3 + static_cast<std::size_t>(m)];
                    double fq = sgn * tf.q_flow[static_cast<std::size_t>(pl) * 3 + static_cast<std::size_t>(m)];
                    drop += line.r[static_cast<std::size_t>(n * 3 + m)] * fp +
                            line.x[static_cast<std::size_t>(n * 3 + m)] * fq;
                }
                tf.v_sq[static_cast<std::size_t>(b) * 3 + static_cast<std::size_t>(n)] =
                    tf.v_sq[static_cast<std::size_t>(pb) * 3 + static_cast<std::size_t>(n)] - 2.0 * drop;
            }
        }
    }
    return tf;
}

} // namespace ssdmgf
