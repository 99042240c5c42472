#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace anx {

/// Sparse document over feature columns [0, dim). `cols` strictly increasing.
/// Empty `vals` means every listed column has value 1 (presence features).
struct SparseDoc {
    std::vector<std::uint32_t> cols;
    std::vector<double> vals;

    double value(std::size_t k) const { return vals.empty() ? 1.0 : vals[k]; }
};

/// Labeled sparse design matrix; y[i] is 1 for the positive class.
struct Dataset {
    std::size_t dim{0};
    std::vector<SparseDoc> docs;
    std::vector<int> y;

    std::size_t size() const { return docs.size(); }
};

}  // namespace anx
