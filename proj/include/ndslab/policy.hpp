// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ndslab/cost.hpp"
#include "ndslab/fluid.hpp"
#include "ndslab/model.hpp"
#include "ndslab/rng.hpp"
#include "ndslab/state.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ndslab
{

//---------------------------------------------------------------------------//
/*!
 * Rooted labeling of the basic-activity tree.
 *
 * Labels follow the tracking-policy convention: classes get 1..I, pools get
 * I+1..I+J, and nodes farther from the root get smaller labels. Children
 * lists are sorted by ascending label.
 */
struct TreeLabeling
{
    int root = 0;       // class index i0
    int root_pool = 0;  // j0, the max-label pool adjacent to the root
    std::vector<int> class_label;
    std::vector<int> pool_label;
    std::vector<int> class_depth;
    std::vector<int> pool_depth;
    std::vector<int> parent_pool;                  // jbar(i); -1 for root
    std::vector<std::vector<int>> child_pools;     // J(i)
    std::vector<int> parent_class;                 // ibar(j)
    std::vector<std::vector<int>> child_classes;   // I(j)
};

TreeLabeling label_tree(int classes, int pools,
                        std::vector<Activity> const& tree, int root);

struct Decision
{
    enum class Kind
    {
        route_to_pool,
        queue,
        admit_class,
        stay_idle,
    };

    Kind kind = Kind::queue;
    int index = -1;

    static Decision route(int pool) { return {Kind::route_to_pool, pool}; }
    static Decision enqueue() { return {Kind::queue, -1}; }
    static Decision admit(int cls) { return {Kind::admit_class, cls}; }
    static Decision idle() { return {Kind::stay_idle, -1}; }

    friend bool operator==(Decision const&, Decision const&) = default;
};

enum class PolicyKind
{
    tracking,
    greedy,
    random,
    fifo,
};

std::string to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string const& name);

//---------------------------------------------------------------------------//
/*!
 * Scheduling and routing rule. Decisions see the state at t- (before the
 * triggering event is applied) and must be pure functions of that state,
 * the policy's immutable parameters and the supplied stream.
 */
class Policy
{
  public:
    virtual ~Policy() = default;

    virtual Decision on_arrival(SimState const& state, int cls,
                                StreamRng& rng) const = 0;
    virtual Decision on_completion(SimState const& state, int pool,
                                   StreamRng& rng) const = 0;

    // Structural property the policy guarantees at every event time; the
    // debug run counts violations.
    virtual bool invariant_holds(SimState const& /*state*/) const
    {
        return true;
    }

    virtual PolicyKind kind() const = 0;
};

//---------------------------------------------------------------------------//
/*!
 * Tracking policy: routes arrivals down the tree and admits customers so the
 * scaled queue follows f^n(theta' X-hat).
 */
class TrackingPolicy final : public Policy
{
  public:
    TrackingPolicy(Topology const& topology, SystemInstance const& instance,
                   FluidSolution const& fluid, PerturbedMinimizer minimizer);

    Decision on_arrival(SimState const& state, int cls,
                        StreamRng& rng) const override;
    Decision on_completion(SimState const& state, int pool,
                           StreamRng& rng) const override;
    bool invariant_holds(SimState const& state) const override;
    PolicyKind kind() const override { return PolicyKind::tracking; }

    TreeLabeling const& labeling() const { return labeling_; }
    // X-check = f^n(theta' X-hat) for the given state.
    Eigen::VectorXd target(SimState const& state) const;

  private:
    TreeLabeling labeling_;
    std::vector<Activity> basic_;
    Eigen::VectorXd fluid_headcount_;
    Eigen::VectorXd theta_;
    double sqrt_n_;
    PerturbedMinimizer minimizer_;
};

// Comparison policies over the full compatibility graph.
class BaselinePolicy final : public Policy
{
  public:
    BaselinePolicy(PolicyKind kind, Topology const& topology);

    Decision on_arrival(SimState const& state, int cls,
                        StreamRng& rng) const override;
    Decision on_completion(SimState const& state, int pool,
                           StreamRng& rng) const override;
    PolicyKind kind() const override { return kind_; }

  private:
    PolicyKind kind_;
    std::vector<std::vector<int>> class_pools_;  // compatible pools per class
    std::vector<std::vector<int>> pool_classes_;  // compatible classes per pool
};

// Baseline dispatch without an object, for tests and log replay.
Decision baseline_decide(PolicyKind kind, Topology const& topology,
                         SimState const& state, bool arrival, int index,
                         StreamRng& rng);

struct PolicySettings
{
    PolicyKind kind = PolicyKind::tracking;
    std::optional<int> root;  // tracking root override
    KappaSchedule kappa;
};

std::unique_ptr<Policy> make_policy(PolicySettings const& settings,
                                    Model const& model,
                                    SystemInstance const& instance,
                                    FluidSolution const& fluid,
                                    CostSpec const& cost);

// Parameters of the f^n the tracking policy would use at this n.
MinimizerParams minimizer_params(PolicySettings const& settings,
                                 SystemInstance const& instance,
                                 FluidSolution const& fluid,
                                 CostSpec const& cost);

}  // namespace ndslab
