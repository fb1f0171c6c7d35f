#ifndef GCNREF_SPARSE_HPP
#define GCNREF_SPARSE_HPP

#include <cstdint>
#include <vector>

namespace gcnref {

// Compressed-row sparse matrix, column indices sorted within each row.
struct CsrMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<std::int64_t> row_offsets;  // size rows+1, monotone
    std::vector<std::int32_t> col_indices;  // size nnz, in [0, cols)
    std::vector<double> values;             // size nnz, finite

    std::int64_t nnz() const {
        return row_offsets.empty() ? 0 : row_offsets.back();
    }

    static CsrMatrix identity(int n);

    // Assemble from an undirected edge list (i<j pairs); every edge is stored
    // in both directions with the same value, diagonal stays empty.
    static CsrMatrix from_undirected_edges(
        int n, const std::vector<std::pair<std::int32_t, std::int32_t>>& edges,
        const std::vector<double>& weights);

    // Entry lookup by binary search; 0 when absent.
    double at(int i, int j) const;

    bool operator==(const CsrMatrix&) const = default;
};

// Throws ValidationError on malformed structure (offsets, index range,
// non-finite values).
void validate(const CsrMatrix& m);

// y = A * x for dense row-major x with `width` columns per node.
// Single-threaded and deterministic.
void spmm(const CsrMatrix& a, const std::vector<double>& x, int width,
          std::vector<double>& y);

bool is_symmetric(const CsrMatrix& m);

}  // namespace gcnref

#endif
