#pragma once

#include <memory>
#include <string>
#include <vector>

#include "umdp/dynamics.hpp"
#include "json.hpp"

namespace umdp {

using Matrix = std::vector<Vec>; // row-major

// Pendulum with quadratic wind drag, state (theta, theta_dot), theta measured
// from the downward position.
struct PendulumParams {
    double dt = 0.25;
    double drag = 0.3;
    double length = 1.0;
    Vec torques;              // defaults to 5 values over [-0.8, 0.8]
    double omega_bound = 3.0; // |theta_dot| on the safe set
    double noise_bound = 1.0; // |w| range the Lipschitz constants cover
};

class PendulumModel : public DynamicsModel {
public:
    explicit PendulumModel(PendulumParams p);
    std::string name() const override { return "pendulum"; }
    using DynamicsModel::step;
    void step(std::span<const double> x, ActionId a, std::span<const double> w, std::span<double> out) const override;
    double lipschitz_x(ActionId a) const override;
    double lipschitz_w(ActionId a) const override;
    std::optional<AxisBox> exact_reach(const AxisBox& r, ActionId a, const AxisBox& noise_box) const override;
    const PendulumParams& params() const { return p_; }

private:
    PendulumParams p_;
};

// Kinematic unicycle with Coulomb friction, state (x, y, heading), controls
// (speed, yaw rate), noise (friction, heading slip).
struct Unicycle3dParams {
    double dt = 0.5;
    double drag_speed = 0.1;
    double drag_heading = 0.05;
    Vec speeds{0.21, 0.3};
    Vec yaw_rates{-2, -1, 0, 1, 2};
    double noise_bound = 1.4;
};

class Unicycle3dModel : public DynamicsModel {
public:
    explicit Unicycle3dModel(Unicycle3dParams p);
    std::string name() const override { return "unicycle3d"; }
    using DynamicsModel::step;
    void step(std::span<const double> x, ActionId a, std::span<const double> w, std::span<double> out) const override;
    double lipschitz_x(ActionId a) const override;
    double lipschitz_w(ActionId a) const override;
    std::optional<AxisBox> exact_reach(const AxisBox& r, ActionId a, const AxisBox& noise_box) const override;

private:
    Unicycle3dParams p_;
};

// Planar unicycle at fixed nominal speed with the heading as the control.
struct Unicycle2dParams {
    double dt = 0.5;
    double drag = 0.2;
    double speed = 0.3;
    Vec headings; // defaults to 8 evenly spaced headings starting at -pi
    double noise_bound = 1.4;
};

class Unicycle2dModel : public DynamicsModel {
public:
    explicit Unicycle2dModel(Unicycle2dParams p);
    std::string name() const override { return "unicycle2d"; }
    using DynamicsModel::step;
    void step(std::span<const double> x, ActionId a, std::span<const double> w, std::span<double> out) const override;
    double lipschitz_x(ActionId a) const override;
    double lipschitz_w(ActionId a) const override;
    std::optional<AxisBox> exact_reach(const AxisBox& r, ActionId a, const AxisBox& noise_box) const override;

private:
    Unicycle2dParams p_;
};

// x' = diag(1 + w) A x + b + B u. Used for the 4-room heating benchmark and
// the 2-D multiplicative-noise system.
struct MultiplicativeParams {
    std::string name = "multiplicative";
    Matrix A;
    Vec b;
    Matrix B;
    std::vector<Vec> controls;
    double noise_bound = 1.0; // |w_i| range the Lipschitz constants cover
    double state_bound = 1.0; // |x_i| on the safe set
};

class MultiplicativeLinearModel : public DynamicsModel {
public:
    explicit MultiplicativeLinearModel(MultiplicativeParams p);
    std::string name() const override { return p_.name; }
    using DynamicsModel::step;
    void step(std::span<const double> x, ActionId a, std::span<const double> w, std::span<double> out) const override;
    double lipschitz_x(ActionId a) const override;
    double lipschitz_w(ActionId a) const override;
    std::optional<AxisBox> exact_reach(const AxisBox& r, ActionId a, const AxisBox& noise_box) const override;

private:
    MultiplicativeParams p_;
    Vec bu_; // b + B u per control, flattened
};

// x' = A x + B u + E w + c.
struct AffineParams {
    Matrix A;
    Matrix B;
    Matrix E;
    Vec c;
    std::vector<Vec> controls;
};

class AffineModel : public DynamicsModel {
public:
    explicit AffineModel(AffineParams p);
    std::string name() const override { return "custom"; }
    using DynamicsModel::step;
    void step(std::span<const double> x, ActionId a, std::span<const double> w, std::span<double> out) const override;
    double lipschitz_x(ActionId a) const override;
    double lipschitz_w(ActionId a) const override;
    std::optional<AxisBox> exact_reach(const AxisBox& r, ActionId a, const AxisBox& noise_box) const override;

private:
    AffineParams p_;
    Vec offset_; // B u + c per control, flattened
};

MultiplicativeParams heating4_params();
MultiplicativeParams multiplicative2d_params();

// Builds a model from its config key and parameter block. The safe box fills
// in validity ranges (state bounds) the Lipschitz constants depend on.
std::unique_ptr<DynamicsModel> make_model(const std::string& kind, const nlohmann::json& params,
                                          const AxisBox& safe_box);

double frobenius(const Matrix& m);

} // namespace umdp
