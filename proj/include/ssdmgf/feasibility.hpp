#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ssdmgf/plan.hpp"
#include "ssdmgf/scenario.hpp"

namespace ssdmgf {

/// Raw per-step scores a label predictor emits: one score per block and root
/// label (dead label 0 plus the black-start blocks in ascending id), and one
/// score per synchronization switch.
struct Logits {
    int T = 0;
    int K = 0; // blocks
    int R = 0; // root labels, 1 + number of black-start blocks
    int E = 0; // synchronization switches, backbone ssw_edges() order
    std::vector<double> z_root; // T*K*R row-major
    std::vector<double> z_sync; // T*E row-major

    double root_at(int t, int k, int r) const {
        return z_root[static_cast<std::size_t>((t * K + k) * R + r)];
    }
    double& root_at(int t, int k, int r) {
        return z_root[static_cast<std::size_t>((t * K + k) * R + r)];
    }
    double sync_at(int t, int e) const {
        return z_sync[static_cast<std::size_t>(t * E + e)];
    }
    double& sync_at(int t, int e) {
        return z_sync[static_cast<std::size_t>(t * E + e)];
    }
    bool shape_ok() const;
};

Logits load_logits(const std::string& path);
void save_logits(const std::string& path, const Logits& z);

/// Deterministic built-in score source so the resolution pipeline runs
/// without an external model: roots are scored by source rating over graph
/// distance, closures follow a staggered schedule.
Logits heuristic_logits(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg);

/// Dynamic state carried across steps by the resolution operator: per-block
/// labels (0 = dead, r >= 1 indexes the root universe), cumulative switch
/// indicators, and the root-representative map.
struct ResolutionState {
    std::vector<int> labels;        // per block
    std::vector<std::uint8_t> u_e;  // per sync switch, nondecreasing
    std::vector<int> rho;           // size R, rho[0] = 0, idempotent after each step
};

/// Everything resolve needs about the instance besides the logits.
struct ResolveOptions {
    double lambda = 0.5;
    int tg_label = 0;                          // index into 1..R-1, 0 = feeder has no TG
    std::vector<std::uint8_t> tg_on;           // per step grid availability
    std::vector<std::array<int, 2>> ssw_ends;  // per sync switch, endpoint block ids
    std::vector<int> universe;                 // black-start block ids, ascending
};

ResolveOptions make_resolve_options(const SystemModel& m, const ScenarioSpec& sc,
                                    double lambda);

/// Hard decisions after resolution: per-step labels and closure events, plus
/// the per-step representative maps needed to reconstruct island partitions.
struct FeasibleOutputs {
    int T = 0;
    int K = 0;
    int R = 0;
    int E = 0;
    std::vector<int> labels;          // T*K
    std::vector<std::uint8_t> sync;   // T*E, 1 only on the closing step
    std::vector<std::vector<int>> rho_t; // per step snapshot of the map

    int label_at(int t, int k) const { return labels[static_cast<std::size_t>(t * K + k)]; }
    std::uint8_t sync_at(int t, int e) const {
        return sync[static_cast<std::size_t>(t * E + e)];
    }
};

/// Threshold rule for one block: grid root if its probability clears the
/// threshold, else dead if that clears it, else the argmax (ties to the
/// lowest label). `tg_selectable` drops the grid root from every branch.
int assign_root(const std::vector<double>& p, double lambda, int tg_label,
                bool tg_selectable);

/// Merge two root labels in the representative map. The grid root always
/// wins; otherwise the lower label absorbs the higher.
void unite(std::vector<int>& rho, int i, int j, int tg_label);

/// One step of the resolution operator. `allow_closures` is false on the
/// first step, which only assigns labels.
void resolve_step(ResolutionState& st, const Logits& z, int t, const ResolveOptions& opt,
                  bool allow_closures, FeasibleOutputs& out);

FeasibleOutputs resolve_sequence(const Logits& z, const ResolveOptions& opt,
                                 ResolutionState* final_state = nullptr);

FeasibleOutputs load_feasible(const std::string& path);
void save_feasible(const std::string& path, const FeasibleOutputs& fo);

/// Forward pass uses the hard values; the soft array is recorded untouched
/// for any downstream sensitivity consumer. Shapes must match.
struct StePair {
    std::vector<double> value;
    std::vector<double> sensitivity;
};
StePair ste_wrap(std::vector<double> hard, std::vector<double> soft);

/// Normalized discrepancy and regularizer terms between predicted and
/// reference trajectories, plus their weighted sum.
struct LossBreakdown {
    double root = 0.0;
    double sync = 0.0;
    double spar = 0.0;
    double temp = 0.0;
    double total = 0.0;
};

/// Convert supervision labels to the outputs shape so both sides of the
/// metric share a representation.
FeasibleOutputs outputs_from_labels(const Labels& lb, int R);

LossBreakdown metrics(const FeasibleOutputs& y, const FeasibleOutputs& ybar, double gamma,
                      double eta);

/// A partial fixing of the synchronization family handed to the solver:
/// cumulative switch schedule, per-step sync matrices over the root universe,
/// and per-step mode/class picks. `degraded` marks an assignment reduced to
/// the switch schedule because the predicted partition left the catalogue.
struct PartialAssignment {
    int T = 0;
    int n_ssw = 0;
    std::vector<std::uint8_t> u_ssw;  // T*n_ssw cumulative
    std::vector<SyncMatrix> sync;     // per step; empty when degraded
    std::vector<int> mode_index;      // per step; empty when degraded
    std::vector<int> klass;           // per step; empty when degraded
    bool degraded = false;
    std::string family = "WWS";

    bool empty() const { return T == 0; }
    std::uint8_t ssw_at(int t, int e) const {
        return u_ssw[static_cast<std::size_t>(t * n_ssw + e)];
    }
};

PartialAssignment extract_warm_start(const FeasibleOutputs& fo, const SystemModel& m,
                                     const ScenarioSpec& sc);

/// The oracle family: copy the synchronization variables out of a solved plan.
PartialAssignment warm_from_plan(const RestorationPlan& plan, const SystemModel& m);

/// All-zero family: nothing closes, every source stays its own island.
PartialAssignment make_azws(const SystemModel& m, const ScenarioSpec& sc);

/// Uniformly random family values with no consistency screening.
PartialAssignment make_rws(const SystemModel& m, const ScenarioSpec& sc, std::uint64_t seed);

struct WarmCheck {
    bool consistent = true;
    std::string reason;
};

/// Screen a partial assignment against the structural rules the solver
/// enforces: shape, monotone switches, transitive sync matrices with
/// catalogue-known partitions, class/mode agreement, and safe transitions.
WarmCheck check_warm(const PartialAssignment& pa, const SystemModel& m,
                     const ScenarioSpec& sc);

void save_warm(const std::string& path, const PartialAssignment& pa);
PartialAssignment load_warm(const std::string& path);

} // namespace ssdmgf
