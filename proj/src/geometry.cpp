#include "umdp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "umdp/error.hpp"

namespace umdp {

namespace {

constexpr double kAlignTol = 1e-12;

} // namespace

AxisBox::AxisBox(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size())
        throw Error(ErrorKind::DimensionMismatch, "box bounds have different dimensions");
}

Vec AxisBox::center() const {
    Vec c(dim());
    for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lower[i] + upper[i]);
    return c;
}

Vec AxisBox::half_widths() const {
    Vec h(dim());
    for (std::size_t i = 0; i < dim(); ++i) h[i] = 0.5 * (upper[i] - lower[i]);
    return h;
}

double AxisBox::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) v *= upper[i] - lower[i];
    return v;
}

bool AxisBox::contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < dim(); ++i)
        if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
}

Partition::Partition(AxisBox safe_box, std::vector<int> cells_per_dim, std::vector<LabeledRegion> regions,
                     std::vector<int> block_shape, std::vector<bool> periodic)
    : safe_(std::move(safe_box)), cells_(std::move(cells_per_dim)), regions_(std::move(regions)),
      block_shape_(std::move(block_shape)), periodic_(std::move(periodic)) {
    const std::size_t n = safe_.dim();
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "safe box has dimension 0");
    if (cells_.size() != n) throw Error(ErrorKind::DimensionMismatch, "cells_per_dim does not match safe box");
    if (block_shape_.empty()) block_shape_.assign(n, 1);
    if (block_shape_.size() != n)
        throw Error(ErrorKind::DimensionMismatch, "coarse_block_shape does not match safe box");
    if (periodic_.empty()) periodic_.assign(n, false);
    if (periodic_.size() != n) throw Error(ErrorKind::DimensionMismatch, "periodic flags do not match safe box");

    long total = 1, blocks_total = 1;
    stride_.resize(n);
    block_stride_.resize(n);
    blocks_.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
        if (!(safe_.lower[d] < safe_.upper[d]))
            throw Error(ErrorKind::InvalidArgument, "safe box has empty interior");
        if (cells_[d] < 1) throw Error(ErrorKind::InvalidArgument, "cells_per_dim entries must be >= 1");
        if (block_shape_[d] < 1 || cells_[d] % block_shape_[d] != 0)
            throw Error(ErrorKind::IndivisibleBlocks, "dimension " + std::to_string(d) + ": " +
                                                          std::to_string(cells_[d]) + " cells not divisible by " +
                                                          std::to_string(block_shape_[d]));
        stride_[d] = total;
        total *= cells_[d];
        blocks_[d] = cells_[d] / block_shape_[d];
        block_stride_[d] = blocks_total;
        blocks_total *= blocks_[d];
    }
    if (total >= (1L << 30)) throw Error(ErrorKind::InvalidArgument, "grid too large");
    n_cells_ = static_cast<StateId>(total);
    n_blocks_ = static_cast<BlockId>(blocks_total);

    auto aligned = [&](std::size_t d, double v) {
        double k = std::round((v - safe_.lower[d]) / cell_width(d));
        return std::abs(grid_line(d, static_cast<long>(k)) - v) <= kAlignTol;
    };
    for (std::size_t r = 0; r < regions_.size(); ++r) {
        const AxisBox& b = regions_[r].box;
        if (b.dim() != n) throw Error(ErrorKind::DimensionMismatch, "region " + std::to_string(r) + " dimension");
        for (std::size_t d = 0; d < n; ++d) {
            if (b.lower[d] < safe_.lower[d] - kAlignTol || b.upper[d] > safe_.upper[d] + kAlignTol ||
                !(b.lower[d] < b.upper[d]))
                throw Error(ErrorKind::InvalidArgument,
                            "region " + std::to_string(r) + " is not a nonempty box inside the safe box");
            if (!aligned(d, b.lower[d]) || !aligned(d, b.upper[d]))
                throw Error(ErrorKind::MisalignedRegion, "region " + std::to_string(r) + " boundary in dimension " +
                                                             std::to_string(d) + " is not on a grid line");
        }
    }

    labels_.assign(n_cells_ + 1, {});
    for (StateId s = 0; s < n_cells_; ++s) {
        Vec c = cell_box(s).center();
        std::set<std::string> props;
        for (const auto& reg : regions_)
            if (reg.box.contains(c)) props.insert(reg.labels.begin(), reg.labels.end());
        labels_[s].assign(props.begin(), props.end());
    }
    labels_[n_cells_] = {kUnsafeProp};
}

double Partition::cell_width(std::size_t d) const {
    return (safe_.upper[d] - safe_.lower[d]) / cells_[d];
}

double Partition::grid_line(std::size_t d, long k) const {
    if (k == cells_[d]) return safe_.upper[d];
    return safe_.lower[d] + (safe_.upper[d] - safe_.lower[d]) * static_cast<double>(k) / cells_[d];
}

AxisBox Partition::cell_box(StateId s) const {
    auto c = cell_coords(s);
    AxisBox b{Vec(dim()), Vec(dim())};
    for (std::size_t d = 0; d < dim(); ++d) {
        b.lower[d] = grid_line(d, c[d]);
        b.upper[d] = grid_line(d, c[d] + 1);
    }
    return b;
}

std::vector<int> Partition::cell_coords(StateId s) const {
    std::vector<int> c(dim());
    long r = s;
    for (std::size_t d = 0; d < dim(); ++d) {
        c[d] = static_cast<int>(r % cells_[d]);
        r /= cells_[d];
    }
    return c;
}

StateId Partition::cell_at(std::span<const int> coords) const {
    long idx = 0;
    for (std::size_t d = 0; d < dim(); ++d) idx += stride_[d] * coords[d];
    return static_cast<StateId>(idx);
}

int Partition::index_along(std::size_t d, double x) const {
    const int n = cells_[d];
    long k = static_cast<long>(std::floor((x - safe_.lower[d]) / cell_width(d)));
    k = std::clamp<long>(k, 0, n - 1);
    while (k > 0 && x < grid_line(d, k)) --k;
    while (k < n - 1 && x >= grid_line(d, k + 1)) ++k;
    return static_cast<int>(k);
}

long Partition::unwrapped_index(std::size_t d, double x) const {
    long k = static_cast<long>(std::floor((x - safe_.lower[d]) / cell_width(d)));
    while (x < grid_line(d, k)) --k;
    while (x >= grid_line(d, k + 1)) ++k;
    return k;
}

void Partition::wrap(std::span<double> x) const {
    for (std::size_t d = 0; d < dim(); ++d) {
        if (!periodic_[d]) continue;
        double period = safe_.upper[d] - safe_.lower[d];
        double r = std::fmod(x[d] - safe_.lower[d], period);
        if (r < 0) r += period;
        if (r >= period) r = 0.0;
        x[d] = safe_.lower[d] + r;
    }
}

StateId Partition::locate(std::span<const double> x) const {
    long idx = 0;
    for (std::size_t d = 0; d < dim(); ++d) {
        double v = x[d];
        if (std::isnan(v)) return unsafe_index();
        if (periodic_[d]) {
            double tmp = v;
            double period = safe_.upper[d] - safe_.lower[d];
            double r = std::fmod(tmp - safe_.lower[d], period);
            if (r < 0) r += period;
            if (r >= period) r = 0.0;
            v = safe_.lower[d] + r;
        } else if (!(v >= safe_.lower[d] && v <= safe_.upper[d])) {
            return unsafe_index();
        }
        idx += stride_[d] * index_along(d, v);
    }
    return static_cast<StateId>(idx);
}

CellRange Partition::touched(const AxisBox& box) const {
    CellRange out;
    out.lo.resize(dim());
    out.hi.resize(dim());
    for (std::size_t d = 0; d < dim(); ++d) {
        const double lo = box.lower[d], hi = box.upper[d];
        if (periodic_[d]) {
            const double period = safe_.upper[d] - safe_.lower[d];
            if (hi - lo >= period) {
                out.lo[d] = 0;
                out.hi[d] = cells_[d] - 1;
                continue;
            }
            long a = unwrapped_index(d, lo);
            long b = unwrapped_index(d, hi);
            if (b - a + 1 >= cells_[d]) {
                out.lo[d] = 0;
                out.hi[d] = cells_[d] - 1;
            } else {
                long shift = a >= 0 ? (a / cells_[d]) * cells_[d] : -((-a + cells_[d] - 1) / cells_[d]) * cells_[d];
                out.lo[d] = static_cast<int>(a - shift);
                out.hi[d] = static_cast<int>(b - shift);
            }
            continue;
        }
        if (hi < safe_.lower[d] || lo > safe_.upper[d]) {
            out.outside = true;
            out.escapes = true;
            out.lo[d] = 0;
            out.hi[d] = -1;
            continue;
        }
        if (lo < safe_.lower[d] || hi > safe_.upper[d]) out.escapes = true;
        out.lo[d] = index_along(d, std::max(lo, safe_.lower[d]));
        out.hi[d] = index_along(d, std::min(hi, safe_.upper[d]));
    }
    return out;
}

bool Partition::has_label(StateId s, const std::string& prop) const {
    const auto& l = labels_[s];
    return std::find(l.begin(), l.end(), prop) != l.end();
}

std::vector<std::string> Partition::propositions() const {
    std::set<std::string> props{kUnsafeProp};
    for (const auto& r : regions_) props.insert(r.labels.begin(), r.labels.end());
    return {props.begin(), props.end()};
}

BlockId Partition::block_of(StateId s) const {
    if (s == n_cells_) return n_blocks_;
    long r = s, idx = 0;
    for (std::size_t d = 0; d < dim(); ++d) {
        int c = static_cast<int>(r % cells_[d]);
        r /= cells_[d];
        idx += block_stride_[d] * (c / block_shape_[d]);
    }
    return static_cast<BlockId>(idx);
}

BlockId Partition::block_at(std::span<const int> block_coords) const {
    long idx = 0;
    for (std::size_t d = 0; d < dim(); ++d) idx += block_stride_[d] * block_coords[d];
    return static_cast<BlockId>(idx);
}

std::vector<StateId> Partition::block_members(BlockId q) const {
    if (q == n_blocks_) return {n_cells_};
    std::vector<int> bc(dim());
    long r = q;
    for (std::size_t d = 0; d < dim(); ++d) {
        bc[d] = static_cast<int>(r % blocks_[d]);
        r /= blocks_[d];
    }
    std::vector<StateId> out;
    std::vector<int> off(dim(), 0), c(dim());
    while (true) {
        for (std::size_t d = 0; d < dim(); ++d) c[d] = bc[d] * block_shape_[d] + off[d];
        out.push_back(cell_at(c));
        std::size_t d = 0;
        for (; d < dim(); ++d) {
            if (++off[d] < block_shape_[d]) break;
            off[d] = 0;
        }
        if (d == dim()) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

Partition build_grid(const AxisBox& safe_box, const std::vector<int>& cells_per_dim,
                     const std::vector<LabeledRegion>& regions, const std::vector<int>& block_shape,
                     const std::vector<bool>& periodic) {
    return Partition(safe_box, cells_per_dim, regions, block_shape, periodic);
}

std::vector<std::vector<StateId>> coarse_clusters(const Partition& p) {
    std::vector<std::vector<StateId>> out(p.n_blocks());
    for (BlockId q = 0; q < p.n_blocks(); ++q) out[q] = p.block_members(q);
    return out;
}

} // namespace umdp
