#ifndef QUANTREP_ISOTONIC_HPP
#define QUANTREP_ISOTONIC_HPP

#include "core.hpp"

#include <span>
#include <vector>

namespace quantrep {

/// Pool-adjacent-violators: the nondecreasing sequence minimizing
/// sum_i w_i (f_i - y_i)^2 for values already ordered by their covariate.
inline std::vector<double> pool_adjacent_violators(std::span<const double> y, std::span<const double> w = {}) {
    struct Block {
        double sum;
        double weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    blocks.reserve(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        blocks.push_back({wi * y[i], wi, 1});
        while (blocks.size() > 1) {
            const Block& b = blocks.back();
            const Block& a = blocks[blocks.size() - 2];
            if (a.sum / a.weight <= b.sum / b.weight) break;
            Block merged{a.sum + b.sum, a.weight + b.weight, a.count + b.count};
            blocks.pop_back();
            blocks.back() = merged;
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const auto& b : blocks) {
        out.insert(out.end(), b.count, b.sum / b.weight);
    }
    return out;
}

}  // namespace quantrep

#endif
