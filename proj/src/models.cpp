#include "umdp/models.hpp"

#include <cmath>
#include <numbers>

#include "umdp/error.hpp"
#include "umdp/interval.hpp"

namespace umdp {

namespace {

double signed_square(double v) { return v * std::abs(v); }

Vec linspace(double lo, double hi, int n) {
    if (n == 1) return {0.5 * (lo + hi)};
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
    return out;
}

std::vector<Vec> as_controls(const Vec& scalars) {
    std::vector<Vec> out;
    for (double v : scalars) out.push_back({v});
    return out;
}

Matrix read_matrix(const nlohmann::json& j, const char* key) {
    Matrix m;
    for (const auto& row : j.at(key)) m.push_back(row.get<Vec>());
    return m;
}

void check_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
    if (m.size() != rows) throw Error(ErrorKind::DimensionMismatch, std::string(what) + " row count");
    for (const auto& r : m)
        if (r.size() != cols) throw Error(ErrorKind::DimensionMismatch, std::string(what) + " column count");
}

} // namespace

double frobenius(const Matrix& m) {
    double s = 0.0;
    for (const auto& r : m)
        for (double v : r) s += v * v;
    return std::sqrt(s);
}

// ---------------------------------------------------------------- pendulum

PendulumModel::PendulumModel(PendulumParams p)
    : DynamicsModel(2, 1, as_controls(p.torques.empty() ? linspace(-0.8, 0.8, 5) : p.torques)), p_(std::move(p)) {
    if (p_.torques.empty()) p_.torques = linspace(-0.8, 0.8, 5);
}

void PendulumModel::step(std::span<const double> x, ActionId a, std::span<const double> w,
                         std::span<double> out) const {
    const double th = x[0], om = x[1];
    const double v = p_.length * om - w[0] * std::cos(th);
    out[0] = th + p_.dt * om;
    out[1] = om + p_.dt * (-p_.drag * signed_square(v) - std::sin(th) + p_.torques[a]);
}

double PendulumModel::lipschitz_x(ActionId) const {
    const double vmax = p_.length * p_.omega_bound + p_.noise_bound;
    const double d_om_th = p_.dt * (2 * p_.drag * vmax * p_.noise_bound + 1.0);
    const double d_om_om = std::max(1.0, 2 * p_.dt * p_.drag * p_.length * vmax - 1.0);
    return std::sqrt(1.0 + p_.dt * p_.dt + d_om_th * d_om_th + d_om_om * d_om_om);
}

double PendulumModel::lipschitz_w(ActionId) const {
    const double vmax = p_.length * p_.omega_bound + p_.noise_bound;
    return 2 * p_.dt * p_.drag * vmax;
}

std::optional<AxisBox> PendulumModel::exact_reach(const AxisBox& r, ActionId a, const AxisBox& nb) const {
    const Interval th{r.lower[0], r.upper[0]}, om{r.lower[1], r.upper[1]}, w{nb.lower[0], nb.upper[0]};
    const double dt = p_.dt, cd = p_.drag, l = p_.length;
    const Interval coupling = w * cos(th);
    const Interval s = sin(th);
    const double vlo = l * om.lo - coupling.hi, vhi = l * om.hi - coupling.lo;

    // h(om, c) = om - dt*cd*g(l*om - c) is increasing in c, and in om while
    // 2*dt*cd*l*|v| <= 1; then the corners give the exact range.
    Interval h;
    if (2 * dt * cd * l * std::max(std::abs(vlo), std::abs(vhi)) <= 1.0) {
        h.lo = om.lo - dt * cd * signed_square(l * om.lo - coupling.lo);
        h.hi = om.hi - dt * cd * signed_square(l * om.hi - coupling.hi);
    } else {
        h.lo = om.lo - dt * cd * signed_square(vhi);
        h.hi = om.hi - dt * cd * signed_square(vlo);
    }
    const double u = p_.torques[a];
    AxisBox out(Vec(2), Vec(2));
    out.lower[0] = th.lo + dt * om.lo;
    out.upper[0] = th.hi + dt * om.hi;
    out.lower[1] = h.lo + dt * (-s.hi + u);
    out.upper[1] = h.hi + dt * (-s.lo + u);
    return out;
}

// ---------------------------------------------------------------- unicycle 3d

namespace {

std::vector<Vec> unicycle3d_controls(const Unicycle3dParams& p) {
    std::vector<Vec> out;
    for (double v : p.speeds)
        for (double r : p.yaw_rates) out.push_back({v, r});
    return out;
}

} // namespace

Unicycle3dModel::Unicycle3dModel(Unicycle3dParams p) : DynamicsModel(3, 2, unicycle3d_controls(p)), p_(std::move(p)) {}

void Unicycle3dModel::step(std::span<const double> x, ActionId a, std::span<const double> w,
                           std::span<double> out) const {
    const Vec& u = controls()[a];
    const double s = p_.dt * (u[0] - p_.drag_speed * w[0]);
    out[0] = x[0] + s * std::cos(x[2]);
    out[1] = x[1] + s * std::sin(x[2]);
    out[2] = x[2] + p_.dt * u[1] + p_.drag_heading * w[1];
}

double Unicycle3dModel::lipschitz_x(ActionId a) const {
    const double smax = p_.dt * (std::abs(controls()[a][0]) + p_.drag_speed * p_.noise_bound);
    return std::sqrt(3.0 + smax * smax);
}

double Unicycle3dModel::lipschitz_w(ActionId) const {
    const double k = p_.dt * p_.drag_speed;
    return std::sqrt(k * k + p_.drag_heading * p_.drag_heading);
}

std::optional<AxisBox> Unicycle3dModel::exact_reach(const AxisBox& r, ActionId a, const AxisBox& nb) const {
    const Vec& u = controls()[a];
    const Interval th{r.lower[2], r.upper[2]};
    const Interval speed{p_.dt * (u[0] - p_.drag_speed * nb.upper[0]), p_.dt * (u[0] - p_.drag_speed * nb.lower[0])};
    const Interval dx = speed * cos(th), dy = speed * sin(th);
    AxisBox out(Vec(3), Vec(3));
    out.lower[0] = r.lower[0] + dx.lo;
    out.upper[0] = r.upper[0] + dx.hi;
    out.lower[1] = r.lower[1] + dy.lo;
    out.upper[1] = r.upper[1] + dy.hi;
    const Interval slip = p_.drag_heading * Interval{nb.lower[1], nb.upper[1]};
    out.lower[2] = th.lo + p_.dt * u[1] + slip.lo;
    out.upper[2] = th.hi + p_.dt * u[1] + slip.hi;
    return out;
}

// ---------------------------------------------------------------- unicycle 2d

namespace {

Vec default_headings() {
    Vec h(8);
    for (int i = 0; i < 8; ++i) h[i] = -std::numbers::pi + 2 * std::numbers::pi * i / 8;
    return h;
}

} // namespace

Unicycle2dModel::Unicycle2dModel(Unicycle2dParams p)
    : DynamicsModel(2, 1, as_controls(p.headings.empty() ? default_headings() : p.headings)), p_(std::move(p)) {
    if (p_.headings.empty()) p_.headings = default_headings();
}

void Unicycle2dModel::step(std::span<const double> x, ActionId a, std::span<const double> w,
                           std::span<double> out) const {
    const double s = p_.dt * (p_.speed - p_.drag * w[0]);
    out[0] = x[0] + s * std::cos(p_.headings[a]);
    out[1] = x[1] + s * std::sin(p_.headings[a]);
}

double Unicycle2dModel::lipschitz_x(ActionId) const { return 1.0; }

double Unicycle2dModel::lipschitz_w(ActionId) const { return p_.dt * p_.drag; }

std::optional<AxisBox> Unicycle2dModel::exact_reach(const AxisBox& r, ActionId a, const AxisBox& nb) const {
    const Interval speed{p_.dt * (p_.speed - p_.drag * nb.upper[0]), p_.dt * (p_.speed - p_.drag * nb.lower[0])};
    const Interval dx = std::cos(p_.headings[a]) * speed, dy = std::sin(p_.headings[a]) * speed;
    AxisBox out(Vec(2), Vec(2));
    out.lower[0] = r.lower[0] + dx.lo;
    out.upper[0] = r.upper[0] + dx.hi;
    out.lower[1] = r.lower[1] + dy.lo;
    out.upper[1] = r.upper[1] + dy.hi;
    return out;
}

// ---------------------------------------------------------------- multiplicative

MultiplicativeLinearModel::MultiplicativeLinearModel(MultiplicativeParams p)
    : DynamicsModel(p.A.size(), p.A.size(), p.controls), p_(std::move(p)) {
    const std::size_t n = p_.A.size();
    check_shape(p_.A, n, n, "A");
    if (p_.b.empty()) p_.b.assign(n, 0.0);
    if (p_.b.size() != n) throw Error(ErrorKind::DimensionMismatch, "b length");
    const std::size_t m = p_.controls.front().size();
    check_shape(p_.B, n, m, "B");
    bu_.assign(p_.controls.size() * n, 0.0);
    for (std::size_t a = 0; a < p_.controls.size(); ++a) {
        if (p_.controls[a].size() != m) throw Error(ErrorKind::DimensionMismatch, "control length");
        for (std::size_t i = 0; i < n; ++i) {
            double v = p_.b[i];
            for (std::size_t k = 0; k < m; ++k) v += p_.B[i][k] * p_.controls[a][k];
            bu_[a * n + i] = v;
        }
    }
}

void MultiplicativeLinearModel::step(std::span<const double> x, ActionId a, std::span<const double> w,
                                     std::span<double> out) const {
    const std::size_t n = p_.A.size();
    for (std::size_t i = 0; i < n; ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < n; ++j) ax += p_.A[i][j] * x[j];
        out[i] = (1.0 + w[i]) * ax + bu_[a * n + i];
    }
}

double MultiplicativeLinearModel::lipschitz_x(ActionId) const { return (1.0 + p_.noise_bound) * frobenius(p_.A); }

double MultiplicativeLinearModel::lipschitz_w(ActionId) const {
    double worst = 0.0;
    for (const auto& row : p_.A) {
        double s = 0.0;
        for (double v : row) s += std::abs(v);
        worst = std::max(worst, s);
    }
    return worst * p_.state_bound;
}

std::optional<AxisBox> MultiplicativeLinearModel::exact_reach(const AxisBox& r, ActionId a, const AxisBox& nb) const {
    const std::size_t n = p_.A.size();
    AxisBox out{Vec(n), Vec(n)};
    for (std::size_t i = 0; i < n; ++i) {
        Interval ax{0.0};
        for (std::size_t j = 0; j < n; ++j) ax = ax + p_.A[i][j] * Interval{r.lower[j], r.upper[j]};
        Interval y = Interval{1.0 + nb.lower[i], 1.0 + nb.upper[i]} * ax;
        out.lower[i] = y.lo + bu_[a * n + i];
        out.upper[i] = y.hi + bu_[a * n + i];
    }
    return out;
}

// ---------------------------------------------------------------- affine

AffineModel::AffineModel(AffineParams p)
    : DynamicsModel(p.A.size(), p.E.empty() ? 0 : p.E.front().size(), p.controls), p_(std::move(p)) {
    const std::size_t n = p_.A.size();
    check_shape(p_.A, n, n, "A");
    check_shape(p_.E, n, noise_dim(), "E");
    if (p_.c.empty()) p_.c.assign(n, 0.0);
    if (p_.c.size() != n) throw Error(ErrorKind::DimensionMismatch, "c length");
    const std::size_t m = p_.controls.front().size();
    if (p_.B.empty()) p_.B.assign(n, Vec(m, 0.0));
    check_shape(p_.B, n, m, "B");
    offset_.assign(p_.controls.size() * n, 0.0);
    for (std::size_t a = 0; a < p_.controls.size(); ++a) {
        if (p_.controls[a].size() != m) throw Error(ErrorKind::DimensionMismatch, "control length");
        for (std::size_t i = 0; i < n; ++i) {
            double v = p_.c[i];
            for (std::size_t k = 0; k < m; ++k) v += p_.B[i][k] * p_.controls[a][k];
            offset_[a * n + i] = v;
        }
    }
}

void AffineModel::step(std::span<const double> x, ActionId a, std::span<const double> w, std::span<double> out) const {
    const std::size_t n = p_.A.size();
    for (std::size_t i = 0; i < n; ++i) {
        double v = offset_[a * n + i];
        for (std::size_t j = 0; j < n; ++j) v += p_.A[i][j] * x[j];
        for (std::size_t k = 0; k < w.size(); ++k) v += p_.E[i][k] * w[k];
        out[i] = v;
    }
}

double AffineModel::lipschitz_x(ActionId) const { return frobenius(p_.A); }

double AffineModel::lipschitz_w(ActionId) const { return frobenius(p_.E); }

std::optional<AxisBox> AffineModel::exact_reach(const AxisBox& r, ActionId a, const AxisBox& nb) const {
    const std::size_t n = p_.A.size();
    AxisBox out{Vec(n), Vec(n)};
    for (std::size_t i = 0; i < n; ++i) {
        Interval y{offset_[a * n + i]};
        for (std::size_t j = 0; j < n; ++j) y = y + p_.A[i][j] * Interval{r.lower[j], r.upper[j]};
        for (std::size_t k = 0; k < nb.dim(); ++k) y = y + p_.E[i][k] * Interval{nb.lower[k], nb.upper[k]};
        out.lower[i] = y.lo;
        out.upper[i] = y.hi;
    }
    return out;
}

// ---------------------------------------------------------------- factory

MultiplicativeParams heating4_params() {
    MultiplicativeParams p;
    p.name = "heating4";
    p.A = {{0.901, 0.0625, 0, 0}, {0.0625, 0.839, 0.0625, 0}, {0, 0.0625, 0.839, 0.0625}, {0, 0, 0.0625, 0.901}};
    p.b = {0.219, 0.219, 0.219, 0.219};
    p.B = {{0.7, 0, 0, 0}, {0, 0.7, 0, 0}, {0, 0, 0.7, 0}, {0, 0, 0, 0.7}};
    for (int m = 0; m < 16; ++m) p.controls.push_back({double(m & 1), double((m >> 1) & 1), double((m >> 2) & 1), double((m >> 3) & 1)});
    p.noise_bound = 0.05;
    p.state_bound = 23.5;
    return p;
}

MultiplicativeParams multiplicative2d_params() {
    MultiplicativeParams p;
    p.name = "multiplicative";
    p.A = {{0.8, 0.3}, {-0.3, 0.8}};
    p.b = {0.0, 0.0};
    p.B = {{0.0}, {0.0}};
    p.controls = {{0.0}};
    p.noise_bound = 1.0;
    p.state_bound = 1.0;
    return p;
}

namespace {

template <class T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

double max_abs(const AxisBox& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < b.dim(); ++i) m = std::max({m, std::abs(b.lower[i]), std::abs(b.upper[i])});
    return m;
}

Vec control_grid(const nlohmann::json& j, const char* list_key, double lo, double hi, int n) {
    if (j.contains(list_key)) return j.at(list_key).get<Vec>();
    maybe(j, "u_min", lo);
    maybe(j, "u_max", hi);
    maybe(j, "n_controls", n);
    return linspace(lo, hi, n);
}

} // namespace

std::unique_ptr<DynamicsModel> make_model(const std::string& kind, const nlohmann::json& j,
                                          const AxisBox& safe_box) {
    const nlohmann::json params = j.is_null() ? nlohmann::json::object() : j;
    if (kind == "pendulum") {
        PendulumParams p;
        maybe(params, "dt", p.dt);
        maybe(params, "drag", p.drag);
        maybe(params, "length", p.length);
        maybe(params, "noise_bound", p.noise_bound);
        p.torques = control_grid(params, "torques", -0.8, 0.8, 5);
        if (safe_box.dim() != 2) throw Error(ErrorKind::DimensionMismatch, "pendulum needs a 2-D safe box");
        p.omega_bound = std::max(std::abs(safe_box.lower[1]), std::abs(safe_box.upper[1]));
        return std::make_unique<PendulumModel>(p);
    }
    if (kind == "unicycle3d") {
        Unicycle3dParams p;
        maybe(params, "dt", p.dt);
        maybe(params, "drag_speed", p.drag_speed);
        maybe(params, "drag_heading", p.drag_heading);
        maybe(params, "speeds", p.speeds);
        maybe(params, "yaw_rates", p.yaw_rates);
        maybe(params, "noise_bound", p.noise_bound);
        if (safe_box.dim() != 3) throw Error(ErrorKind::DimensionMismatch, "unicycle3d needs a 3-D safe box");
        return std::make_unique<Unicycle3dModel>(p);
    }
    if (kind == "unicycle2d") {
        Unicycle2dParams p;
        maybe(params, "dt", p.dt);
        maybe(params, "drag", p.drag);
        maybe(params, "speed", p.speed);
        maybe(params, "headings", p.headings);
        maybe(params, "noise_bound", p.noise_bound);
        if (safe_box.dim() != 2) throw Error(ErrorKind::DimensionMismatch, "unicycle2d needs a 2-D safe box");
        return std::make_unique<Unicycle2dModel>(p);
    }
    if (kind == "multiplicative" || kind == "heating4") {
        MultiplicativeParams p = kind == "heating4" ? heating4_params() : multiplicative2d_params();
        if (params.contains("A")) p.A = read_matrix(params, "A");
        if (params.contains("B")) p.B = read_matrix(params, "B");
        maybe(params, "b", p.b);
        maybe(params, "controls", p.controls);
        maybe(params, "noise_bound", p.noise_bound);
        p.state_bound = max_abs(safe_box);
        if (safe_box.dim() != p.A.size()) throw Error(ErrorKind::DimensionMismatch, kind + ": safe box dimension");
        return std::make_unique<MultiplicativeLinearModel>(p);
    }
    if (kind == "custom") {
        AffineParams p;
        p.A = read_matrix(params, "A");
        p.E = read_matrix(params, "E");
        if (params.contains("B")) p.B = read_matrix(params, "B");
        maybe(params, "c", p.c);
        p.controls = params.at("controls").get<std::vector<Vec>>();
        if (safe_box.dim() != p.A.size()) throw Error(ErrorKind::DimensionMismatch, "custom: safe box dimension");
        return std::make_unique<AffineModel>(p);
    }
    throw Error(ErrorKind::ConfigError, "unknown model '" + kind + "'");
}

} // namespace umdp
