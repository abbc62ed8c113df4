#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssdmgf/config.hpp"
#include "ssdmgf/powerflow.hpp"
#include "ssdmgf/scenario.hpp"
#include "ssdmgf/sync.hpp"
#include "ssdmgf/topology.hpp"

namespace ssdmgf {

/// Everything derived from one feeder that plan handling needs, bundled so
/// signatures stay short. Build once per feeder, treat as immutable.
struct SystemModel {
    Feeder feeder;
    BlockPartition blocks;
    Backbone backbone;
    SourceBlocks sources;
    std::vector<SswDomain> domains;
    ModeCatalogue catalogue;

    std::vector<int> bs_blocks;  // catalogue index order: tg block first when present
    int bs_index(int block) const;

    static SystemModel build(Feeder f);
};

/// Dense per-step trajectory of every decision and operating quantity.
/// Layout is step-major; accessors take (t, entity [, phase]).
struct RestorationPlan {
    int T = 0;
    int num_blocks = 0, num_buses = 0, num_lines = 0, num_devices = 0, num_loads = 0;
    int n_bs = 0;

    // switching and status indicators
    std::vector<std::uint8_t> u_bk;   // T*blocks
    std::vector<std::uint8_t> u_line; // T*lines (all kinds; hard-wired lines mirror the block)
    std::vector<std::uint8_t> u_nlb;  // T*buses, meaningful where a non-critical load sits
    std::vector<std::uint8_t> u_tg;   // T
    std::vector<SyncMatrix> sync;     // per step, over bs_blocks order
    std::vector<int> mode_index;      // T; index into the catalogue
    std::vector<int> s_count;         // T; island count

    // operating point
    std::vector<double> f_block; // T*blocks, 0 while de-energized
    std::vector<double> f_bus;   // T*buses
    std::vector<double> p_dev;   // T*devices*3, generation positive
    std::vector<double> q_dev;
    std::vector<double> soc;     // T*devices (storage entries meaningful)
    std::vector<double> p_load;  // T*loads*3, demand actually served
    std::vector<double> q_load;
    std::vector<double> p_flow;  // T*lines*3, oriented from -> to
    std::vector<double> q_flow;
    std::vector<double> v_sq;    // T*buses*3

    static RestorationPlan sized(const SystemModel& m, int T);

    std::uint8_t bk(int t, int k) const { return u_bk[idx2(t, k, num_blocks)]; }
    std::uint8_t line(int t, int l) const { return u_line[idx2(t, l, num_lines)]; }
    std::uint8_t nlb(int t, int b) const { return u_nlb[idx2(t, b, num_buses)]; }
    double fblk(int t, int k) const { return f_block[idx2(t, k, num_blocks)]; }
    double fbus(int t, int b) const { return f_bus[idx2(t, b, num_buses)]; }
    double dev_p(int t, int d, int n) const { return p_dev[idx3(t, d, n, num_devices)]; }
    double dev_q(int t, int d, int n) const { return q_dev[idx3(t, d, n, num_devices)]; }
    double load_p(int t, int ld, int n) const { return p_load[idx3(t, ld, n, num_loads)]; }
    double load_q(int t, int ld, int n) const { return q_load[idx3(t, ld, n, num_loads)]; }
    double flow_p(int t, int l, int n) const { return p_flow[idx3(t, l, n, num_lines)]; }
    double flow_q(int t, int l, int n) const { return q_flow[idx3(t, l, n, num_lines)]; }
    double vsq(int t, int b, int n) const { return v_sq[idx3(t, b, n, num_buses)]; }
    double soc_at(int t, int d) const { return soc[idx2(t, d, num_devices)]; }

    static std::size_t idx2(int t, int e, int width) {
        return static_cast<std::size_t>(t) * static_cast<std::size_t>(width) + static_cast<std::size_t>(e);
    }
    static std::size_t idx3(int t, int e, int n, int width) {
        return (static_cast<std::size_t>(t) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(e)) * 3 + static_cast<std::size_t>(n);
    }
};

/// Nominal per-phase active demand of a load at a step (profile applied).
Vec3 nominal_load_p(const Feeder& f, const Load& ld, const ScenarioSpec& sc, int t);

/// Cold-pickup demand factor given the block/load energization history
/// encoded as "age": steps since the indicator turned 1 (0 = this step).
double clpu_multiplier(const GridConfig& cfg, int age);

/// Normalized PV output at a step (named irradiance profile, season aware).
double pv_eta(const Feeder& f, const Device& d, const ScenarioSpec& sc, int t);

/// Total weighted restored energy of a plan (the maximization objective).
double restored_value(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg,
                      const RestorationPlan& plan);

/// Weighted restored load of one step (dt-scaled contribution to the above).
double step_value(const SystemModel& m, const GridConfig& cfg, const RestorationPlan& plan, int t);

struct Violation {
    std::string constraint; // family id, e.g. "eq26b", "rule.damaged"
    int t = -1;
    std::string entity;
    double residual = 0.0;
    std::string detail;
};

struct ViolationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string summary(std::size_t max_items = 20) const;
};

/// Which rule family governs switching during validation and search.
enum class RuleSet {
    Ssdmgf,   ///< transition-safety triple inequality enforced
    Ndmgf,    ///< merges unrestricted (any number of islands at once)
    RuleBased ///< transition safety plus: no merges before the grid is back
};
std::string to_string(RuleSet r);
RuleSet rule_set_from_string(const std::string& s);

/// Check every constraint family over the whole horizon. Dimension mismatch
/// between the plan and the model throws std::invalid_argument; everything
/// else lands in the report.
ViolationReport validate_plan(const SystemModel& m, const ScenarioSpec& sc,
                              const GridConfig& cfg, const RestorationPlan& plan,
                              RuleSet rules = RuleSet::Ssdmgf);

/// Check the constraint families of one step only (given the steps before it
/// are in place); used by the search to prune as it extends a plan. Appends
/// to `out`.
void validate_step(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg,
                   const RestorationPlan& plan, int t, RuleSet rules, ViolationReport& out);

/// Binary skeleton of a step: what the search decides, before the operating
/// point is filled in.
struct StepActions {
    std::vector<int> close_esw;    // line indices
    std::vector<int> close_ssw;    // line indices
    std::vector<int> pickup_buses; // buses whose non-critical load turns on
};

/// Given the binary trajectory up to and including step t (u_bk, u_line,
/// u_nlb, u_tg already set for step t), derive the operating point of step t:
/// demands with pickup amplification, PV, proportional source dispatch per
/// sub-island, flows, voltages, frequencies, sync indicators, mode, class,
/// SoC. Returns an error string when the step cannot be completed (unservable
/// demand, no mode match, non-radial topology).
std::optional<std::string> fill_step(const SystemModel& m, const ScenarioSpec& sc,
                                     const GridConfig& cfg, RestorationPlan& plan, int t);

/// The no-action trajectory: storage blocks self-start at step 0 and serve
/// their local critical load, the grid block energizes at recovery, nothing
/// else switches and no non-critical load is picked up.
RestorationPlan baseline_plan(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg);

/// Apply the switching/pickup actions of one step onto the binary families
/// (copies step t-1 forward first). Does not fill the operating point.
void apply_actions(const SystemModel& m, const ScenarioSpec& sc, RestorationPlan& plan, int t,
                   const StepActions& act);

} // namespace ssdmgf
