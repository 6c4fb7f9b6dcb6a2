#include "gwp/multi_index.hpp"

#include <numeric>
#include <stdexcept>

#include "gwp/errors.hpp"

namespace gwp {

MultiIndex::MultiIndex(int dim) : n_(static_cast<std::size_t>(dim), 0) {
    if (dim < 1) throw ValidationError("multi-index: dimension must be >= 1");
}

MultiIndex::MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

MultiIndex::MultiIndex(std::vector<int> entries) : n_(std::move(entries)) {
    if (n_.empty()) throw ValidationError("multi-index: dimension must be >= 1");
    for (int v : n_)
        if (v < 0) throw ValidationError("multi-index: negative entry");
}

MultiIndex MultiIndex::unit(int dim, int axis) { return MultiIndex(dim).raised(axis); }

int MultiIndex::order() const { return std::accumulate(n_.begin(), n_.end(), 0); }

MultiIndex MultiIndex::raised(int axis) const {
    MultiIndex m = *this;
    ++m.n_.at(axis);
    return m;
}

MultiIndex MultiIndex::lowered(int axis) const {
    if (n_.at(axis) == 0) throw std::out_of_range("multi-index: cannot lower zero entry of " + str());
    MultiIndex m = *this;
    --m.n_[axis];
    return m;
}

double MultiIndex::factorial() const {
    double f = 1.0;
    for (int v : n_)
        for (int k = 2; k <= v; ++k) f *= k;
    return f;
}

std::string MultiIndex::str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < n_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(n_[i]);
    }
    return s + ")";
}

namespace {

void fill(std::vector<int>& cur, int pos, int left, std::vector<MultiIndex>& out) {
    const int d = static_cast<int>(cur.size());
    if (pos == d - 1) {
        cur[pos] = left;
        out.emplace_back(cur);
        return;
    }
    for (int v = left; v >= 0; --v) {
        cur[pos] = v;
        fill(cur, pos + 1, left - v, out);
    }
}

} // namespace

std::vector<MultiIndex> indices_of_order(int dim, int order) {
    if (dim < 1) throw ValidationError("indices_of_order: dimension must be >= 1");
    std::vector<MultiIndex> out;
    if (order < 0) return out;
    std::vector<int> cur(static_cast<std::size_t>(dim), 0);
    fill(cur, 0, order, out);
    return out;
}

std::vector<MultiIndex> indices_up_to(int dim, int max_order) {
    std::vector<MultiIndex> out;
    for (int k = 0; k <= max_order; ++k) {
        auto level = indices_of_order(dim, k);
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

} // namespace gwp
