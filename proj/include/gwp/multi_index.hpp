#pragma once

#include <compare>
#include <string>
#include <vector>

namespace gwp {

/// Hagedorn excitation index (n_1, ..., n_d), all entries >= 0.
class MultiIndex {
public:
    explicit MultiIndex(int dim);
    MultiIndex(std::initializer_list<int> entries);
    explicit MultiIndex(std::vector<int> entries);

    static MultiIndex unit(int dim, int axis);

    int dim() const { return static_cast<int>(n_.size()); }
    int order() const;
    int operator[](int i) const { return n_[i]; }
    const std::vector<int>& entries() const { return n_; }

    MultiIndex raised(int axis) const;
    /// Throws std::out_of_range when entry `axis` is already 0.
    MultiIndex lowered(int axis) const;

    /// prod_i n_i!
    double factorial() const;
    std::string str() const;

    auto operator<=>(const MultiIndex&) const = default;
    bool operator==(const MultiIndex&) const = default;

private:
    std::vector<int> n_;
};

/// All indices with |n| == order, descending lexicographic: (2,0), (1,1), (0,2).
std::vector<MultiIndex> indices_of_order(int dim, int order);

/// All indices with |n| <= max_order, breadth-first in |n|.
std::vector<MultiIndex> indices_up_to(int dim, int max_order);

} // namespace gwp
