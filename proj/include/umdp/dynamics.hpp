#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "umdp/geometry.hpp"

namespace umdp {

// Discrete-time system x' = f(x, u, w) over a finite control set.
class DynamicsModel {
public:
    DynamicsModel(std::size_t state_dim, std::size_t noise_dim, std::vector<Vec> controls);
    virtual ~DynamicsModel() = default;

    virtual std::string name() const = 0;

    std::size_t state_dim() const { return state_dim_; }
    std::size_t noise_dim() const { return noise_dim_; }
    const std::vector<Vec>& controls() const { return controls_; }
    ActionId n_actions() const { return static_cast<ActionId>(controls_.size()); }

    virtual void step(std::span<const double> x, ActionId a, std::span<const double> w,
                      std::span<double> out) const = 0;
    Vec step(std::span<const double> x, ActionId a, std::span<const double> w) const;

    // Lipschitz constants (Euclidean) of f in x and in w for a fixed control,
    // valid over the safe set and the noise range the model was configured with.
    virtual double lipschitz_x(ActionId a) const = 0;
    virtual double lipschitz_w(ActionId a) const = 0;

    // Box enclosing f(r, a, noise_box). Models without an analytic enclosure
    // return nullopt and reach_overapprox falls back to the Lipschitz bound.
    virtual std::optional<AxisBox> exact_reach(const AxisBox& r, ActionId a, const AxisBox& noise_box) const;

private:
    std::size_t state_dim_;
    std::size_t noise_dim_;
    std::vector<Vec> controls_;
};

AxisBox lipschitz_reach(const DynamicsModel& model, const AxisBox& r, ActionId a, std::span<const double> center,
                        double radius);

// Enclosure of { f(x, a, w) : x in r, |w - center| <= radius }.
AxisBox reach_overapprox(const DynamicsModel& model, const AxisBox& r, ActionId a, std::span<const double> center,
                         double radius);

} // namespace umdp
