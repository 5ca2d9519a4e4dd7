#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "umdp/bounds.hpp"
#include "umdp/dynamics.hpp"
#include "umdp/geometry.hpp"
#include "umdp/noise.hpp"

namespace umdp {

enum class AbstractionMode { Full, SupportOnlyImdp, NaiveImdp };

const char* to_string(AbstractionMode m);
AbstractionMode parse_mode(const std::string& s);

struct ConfidenceLedger {
    double alpha = 0.0;
    double beta = 0.0;
    double beta_c = 0.0;
    std::size_t n_learn = 0; // 1 + number of learned intervals
    double eps = 0.0;        // Hoeffding half-width
    std::size_t n_samples = 0;
};

struct PairMeta {
    double eps_c = 0.0;
    double background_upper = 0.0;
    bool mass_budget = false;
    std::uint32_t learned = 0; // learned intervals charged to the ledger
};

// UMDP over the partition states (unsafe last). Rows are stored in CSR form,
// one row per (s, a) with index s * n_actions + a.
class UmdpAbstraction {
public:
    StateId n_states = 0;
    ActionId n_actions = 0;
    StateId unsafe = 0;
    BlockId unsafe_block = 0;
    AbstractionMode mode = AbstractionMode::Full;
    bool simplified = false;
    ConfidenceLedger ledger;

    std::vector<std::size_t> state_offset; // n_states * n_actions + 1
    std::vector<std::size_t> block_offset;
    std::vector<StateBound> state_entries;
    std::vector<BlockBound> block_entries;
    std::vector<PairMeta> meta;

    std::vector<BlockId> block_of;                 // per state
    std::vector<std::vector<std::string>> labels;  // per state

    std::size_t row(StateId s, ActionId a) const { return static_cast<std::size_t>(s) * n_actions + a; }
    BoundsView bounds(StateId s, ActionId a) const;
    std::vector<std::string> propositions() const;

    // Appends rows in (s, a) order.
    void push_row(const TransitionBounds& t, std::uint32_t learned);
};

// Fractions of weight whose box lies inside / meets the union of the target
// states (cells plus possibly the unsafe state), decided on the grid.
std::pair<double, double> empirical_counts(const Partition& p, const std::vector<AxisBox>& boxes,
                                           const std::vector<double>& weights, const std::vector<StateId>& target);

double hoeffding_eps(double beta, std::size_t n);

// Samples needed so that allocating alpha uniformly over n_learn learned
// quantities yields Hoeffding half-width eps and support mass eps_c.
std::size_t required_sample_size(double alpha, double eps, double eps_c, std::size_t n_learn);

struct BuildOptions {
    AbstractionMode mode = AbstractionMode::Full;
    double alpha = 0.01;
    // Forces the per-interval confidence instead of deriving it from alpha;
    // used to compare modes under identical interval widths.
    std::optional<double> beta_override;
};

UmdpAbstraction build_abstraction(const Partition& p, const DynamicsModel& f, const NoiseModel& noise,
                                  const BuildOptions& opt);

ConfidenceLedger confidence_ledger(const UmdpAbstraction& abs);
// Number of learned intervals the mode's Gamma uses for row (s, a).
std::size_t learned_intervals(const UmdpAbstraction& abs, StateId s, ActionId a);

UmdpAbstraction simplify(const UmdpAbstraction& abs);

void save_abstraction(const std::string& path, const UmdpAbstraction& abs);
UmdpAbstraction load_abstraction(const std::string& path);

} // namespace umdp
