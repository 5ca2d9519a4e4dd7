#include "umdp/dynamics.hpp"

#include <cmath>

#include "umdp/error.hpp"

namespace umdp {

DynamicsModel::DynamicsModel(std::size_t state_dim, std::size_t noise_dim, std::vector<Vec> controls)
    : state_dim_(state_dim), noise_dim_(noise_dim), controls_(std::move(controls)) {
    if (controls_.empty()) throw Error(ErrorKind::InvalidArgument, "control set is empty");
}

Vec DynamicsModel::step(std::span<const double> x, ActionId a, std::span<const double> w) const {
    Vec out(state_dim_);
    step(x, a, w, out);
    return out;
}

std::optional<AxisBox> DynamicsModel::exact_reach(const AxisBox&, ActionId, const AxisBox&) const {
    return std::nullopt;
}

AxisBox lipschitz_reach(const DynamicsModel& model, const AxisBox& r, ActionId a, std::span<const double> center,
                        double radius) {
    Vec c = r.center();
    Vec y0 = model.step(c, a, center);
    double h2 = 0.0;
    for (double h : r.half_widths()) h2 += h * h;
    double pad = model.lipschitz_x(a) * std::sqrt(h2) + model.lipschitz_w(a) * radius;
    AxisBox out(y0, y0);
    for (std::size_t i = 0; i < y0.size(); ++i) {
        out.lower[i] -= pad;
        out.upper[i] += pad;
    }
    return out;
}

AxisBox reach_overapprox(const DynamicsModel& model, const AxisBox& r, ActionId a, std::span<const double> center,
                         double radius) {
    if (r.dim() != model.state_dim() || center.size() != model.noise_dim())
        throw Error(ErrorKind::DimensionMismatch, "reach_overapprox: region or noise center dimension");
    if (radius < 0) throw Error(ErrorKind::InvalidArgument, "reach_overapprox: negative radius");
    AxisBox nb(Vec(center.begin(), center.end()), Vec(center.begin(), center.end()));
    for (std::size_t i = 0; i < nb.dim(); ++i) {
        nb.lower[i] -= radius;
        nb.upper[i] += radius;
    }
    if (auto box = model.exact_reach(r, a, nb)) return *box;
    return lipschitz_reach(model, r, a, center, radius);
}

} // namespace umdp
