#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace umdp {

using Vec = std::vector<double>;
using StateId = std::int32_t;
using BlockId = std::int32_t;
using ActionId = std::int32_t;

inline const std::string kUnsafeProp = "unsafe";

struct AxisBox {
    Vec lower;
    Vec upper;

    AxisBox() = default;
    AxisBox(Vec lo, Vec hi);

    std::size_t dim() const { return lower.size(); }
    Vec center() const;
    Vec half_widths() const;
    double volume() const;
    // Closed-box membership.
    bool contains(std::span<const double> x) const;
};

struct LabeledRegion {
    AxisBox box;
    std::vector<std::string> labels;
};

// Per-dimension cell index range touched by a box. Indices for periodic
// dimensions are unwrapped and must be reduced modulo the cell count.
struct CellRange {
    std::vector<int> lo;
    std::vector<int> hi;
    bool escapes = false; // part of the box lies outside the safe box
    bool outside = false; // the whole box lies outside the safe box
};

class Partition {
public:
    Partition(AxisBox safe_box, std::vector<int> cells_per_dim, std::vector<LabeledRegion> regions,
              std::vector<int> block_shape, std::vector<bool> periodic = {});

    std::size_t dim() const { return safe_.dim(); }
    const AxisBox& safe_box() const { return safe_; }
    const std::vector<int>& cells_per_dim() const { return cells_; }
    const std::vector<int>& block_shape() const { return block_shape_; }
    const std::vector<int>& blocks_per_dim() const { return blocks_; }
    const std::vector<LabeledRegion>& regions() const { return regions_; }
    bool periodic(std::size_t d) const { return periodic_[d]; }
    const std::vector<bool>& periodic_dims() const { return periodic_; }

    StateId n_cells() const { return n_cells_; }
    StateId n_states() const { return n_cells_ + 1; }
    StateId unsafe_index() const { return n_cells_; }
    bool is_unsafe(StateId s) const { return s == n_cells_; }

    double cell_width(std::size_t d) const;
    // Coordinate of grid line k along dimension d; k may leave [0, n] for periodic dims.
    double grid_line(std::size_t d, long k) const;
    AxisBox cell_box(StateId s) const;
    std::vector<int> cell_coords(StateId s) const;
    StateId cell_at(std::span<const int> coords) const;

    StateId locate(std::span<const double> x) const;
    // Maps periodic coordinates into [lower, upper).
    void wrap(std::span<double> x) const;
    CellRange touched(const AxisBox& box) const;

    const std::vector<std::string>& labels(StateId s) const { return labels_[s]; }
    bool has_label(StateId s, const std::string& prop) const;
    std::vector<std::string> propositions() const;

    BlockId n_blocks() const { return n_blocks_ + 1; }
    BlockId unsafe_block() const { return n_blocks_; }
    BlockId block_of(StateId s) const;
    BlockId block_at(std::span<const int> block_coords) const;
    std::vector<StateId> block_members(BlockId q) const;

private:
    int index_along(std::size_t d, double x) const;
    long unwrapped_index(std::size_t d, double x) const;

    AxisBox safe_;
    std::vector<int> cells_;
    std::vector<LabeledRegion> regions_;
    std::vector<int> block_shape_;
    std::vector<int> blocks_;
    std::vector<bool> periodic_;
    std::vector<long> stride_;
    std::vector<long> block_stride_;
    StateId n_cells_ = 0;
    BlockId n_blocks_ = 0;
    std::vector<std::vector<std::string>> labels_;
};

Partition build_grid(const AxisBox& safe_box, const std::vector<int>& cells_per_dim,
                     const std::vector<LabeledRegion>& regions, const std::vector<int>& block_shape,
                     const std::vector<bool>& periodic = {});

// Blocks indexed by BlockId; the last entry is the unsafe singleton.
std::vector<std::vector<StateId>> coarse_clusters(const Partition& p);

} // namespace umdp
