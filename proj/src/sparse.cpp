#include "gcnref/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gcnref/errors.hpp"

namespace gcnref {

CsrMatrix CsrMatrix::identity(int n) {
    CsrMatrix m;
    m.rows = m.cols = n;
    m.row_offsets.resize(static_cast<std::size_t>(n) + 1);
    m.col_indices.resize(static_cast<std::size_t>(n));
    m.values.assign(static_cast<std::size_t>(n), 1.0);
    for (int i = 0; i <= n; ++i) m.row_offsets[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < n; ++i) m.col_indices[static_cast<std::size_t>(i)] = i;
    return m;
}

CsrMatrix CsrMatrix::from_undirected_edges(
    int n, const std::vector<std::pair<std::int32_t, std::int32_t>>& edges,
    const std::vector<double>& weights) {
    if (edges.size() != weights.size())
        throw ValidationError("edge and weight counts differ");

    CsrMatrix m;
    m.rows = m.cols = n;
    m.row_offsets.assign(static_cast<std::size_t>(n) + 1, 0);

    for (const auto& [i, j] : edges) {
        if (i < 0 || j < 0 || i >= n || j >= n)
            throw ValidationError("edge endpoint out of range");
        if (i == j) throw ValidationError("self loops are not allowed");
        ++m.row_offsets[static_cast<std::size_t>(i) + 1];
        ++m.row_offsets[static_cast<std::size_t>(j) + 1];
    }
    for (int r = 0; r < n; ++r)
        m.row_offsets[static_cast<std::size_t>(r) + 1] +=
            m.row_offsets[static_cast<std::size_t>(r)];

    const std::size_t nnz = static_cast<std::size_t>(m.row_offsets.back());
    m.col_indices.resize(nnz);
    m.values.resize(nnz);
    std::vector<std::int64_t> cursor(m.row_offsets.begin(), m.row_offsets.end() - 1);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [i, j] = edges[e];
        const double w = weights[e];
        auto& ci = cursor[static_cast<std::size_t>(i)];
        m.col_indices[static_cast<std::size_t>(ci)] = j;
        m.values[static_cast<std::size_t>(ci)] = w;
        ++ci;
        auto& cj = cursor[static_cast<std::size_t>(j)];
        m.col_indices[static_cast<std::size_t>(cj)] = i;
        m.values[static_cast<std::size_t>(cj)] = w;
        ++cj;
    }

    // sort each row by column and reject duplicates
    for (int r = 0; r < n; ++r) {
        const auto lo = static_cast<std::size_t>(m.row_offsets[static_cast<std::size_t>(r)]);
        const auto hi = static_cast<std::size_t>(m.row_offsets[static_cast<std::size_t>(r) + 1]);
        std::vector<std::pair<std::int32_t, double>> row;
        row.reserve(hi - lo);
        for (std::size_t k = lo; k < hi; ++k) row.emplace_back(m.col_indices[k], m.values[k]);
        std::sort(row.begin(), row.end());
        for (std::size_t k = 1; k < row.size(); ++k)
            if (row[k].first == row[k - 1].first)
                throw ValidationError("duplicate undirected edge " + std::to_string(r) + "-" +
                                      std::to_string(row[k].first));
        for (std::size_t k = 0; k < row.size(); ++k) {
            m.col_indices[lo + k] = row[k].first;
            m.values[lo + k] = row[k].second;
        }
    }
    validate(m);
    return m;
}

double CsrMatrix::at(int i, int j) const {
    const auto lo = col_indices.begin() + row_offsets[static_cast<std::size_t>(i)];
    const auto hi = col_indices.begin() + row_offsets[static_cast<std::size_t>(i) + 1];
    const auto it = std::lower_bound(lo, hi, j);
    if (it == hi || *it != j) return 0.0;
    return values[static_cast<std::size_t>(it - col_indices.begin())];
}

void validate(const CsrMatrix& m) {
    if (m.rows < 0 || m.cols < 0) throw ValidationError("negative matrix shape");
    if (m.row_offsets.size() != static_cast<std::size_t>(m.rows) + 1)
        throw ValidationError("row_offsets size must be rows+1");
    if (m.row_offsets.front() != 0) throw ValidationError("row_offsets must start at 0");
    for (std::size_t r = 1; r < m.row_offsets.size(); ++r)
        if (m.row_offsets[r] < m.row_offsets[r - 1])
            throw ValidationError("row_offsets must be monotone");
    const auto nnz = static_cast<std::size_t>(m.row_offsets.back());
    if (m.col_indices.size() != nnz || m.values.size() != nnz)
        throw ValidationError("nnz arrays do not match row_offsets");
    for (std::size_t r = 0; r + 1 < m.row_offsets.size(); ++r)
        for (auto k = m.row_offsets[r]; k < m.row_offsets[r + 1]; ++k) {
            const auto col = m.col_indices[static_cast<std::size_t>(k)];
            if (col < 0 || col >= m.cols) throw ValidationError("column index out of range");
            if (k > m.row_offsets[r] &&
                m.col_indices[static_cast<std::size_t>(k - 1)] >= col)
                throw ValidationError("columns must be strictly increasing within a row");
        }
    for (double v : m.values)
        if (!std::isfinite(v)) throw ValidationError("matrix values must be finite");
}

void spmm(const CsrMatrix& a, const std::vector<double>& x, int width,
          std::vector<double>& y) {
    if (x.size() != static_cast<std::size_t>(a.cols) * static_cast<std::size_t>(width))
        throw ValidationError("spmm operand size mismatch");
    y.assign(static_cast<std::size_t>(a.rows) * static_cast<std::size_t>(width), 0.0);
    for (int i = 0; i < a.rows; ++i) {
        double* out = y.data() + static_cast<std::size_t>(i) * width;
        for (auto k = a.row_offsets[static_cast<std::size_t>(i)];
             k < a.row_offsets[static_cast<std::size_t>(i) + 1]; ++k) {
            const double w = a.values[static_cast<std::size_t>(k)];
            const double* in =
                x.data() +
                static_cast<std::size_t>(a.col_indices[static_cast<std::size_t>(k)]) * width;
            for (int c = 0; c < width; ++c) out[c] += w * in[c];
        }
    }
}

bool is_symmetric(const CsrMatrix& m) {
    if (m.rows != m.cols) return false;
    for (int i = 0; i < m.rows; ++i)
        for (auto k = m.row_offsets[static_cast<std::size_t>(i)];
             k < m.row_offsets[static_cast<std::size_t>(i) + 1]; ++k) {
            const int j = m.col_indices[static_cast<std::size_t>(k)];
            if (m.at(j, i) != m.values[static_cast<std::size_t>(k)]) return false;
        }
    return true;
}

}  // namespace gcnref
