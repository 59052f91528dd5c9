#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <random>
#include <vector>

#include "novikov/series.hpp"

namespace novikov {

/// Dense matrix of series over one ring (group + coefficient field).
class SeriesMatrix {
public:
    SeriesMatrix() = default;
    SeriesMatrix(std::size_t rows, std::size_t cols, GroupPtr group, std::int64_t order = 1)
        : rows_(rows), cols_(cols), group_(std::move(group)), order_(order),
          data_(rows * cols, NovikovSeries(group_, order_)) {}

    static SeriesMatrix identity(std::size_t n, const GroupPtr& group, std::int64_t order = 1) {
        SeriesMatrix m(n, n, group, order);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = NovikovSeries::one(group, order);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const GroupPtr& group() const { return group_; }
    std::int64_t coeff_order() const { return order_; }

    NovikovSeries& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const NovikovSeries& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    NovikovSeries zero() const { return NovikovSeries(group_, order_); }

    friend SeriesMatrix operator*(const SeriesMatrix& a, const SeriesMatrix& b) {
        if (a.cols_ != b.rows_) throw MathError("matrix dimension mismatch in product");
        SeriesMatrix out(a.rows_, b.cols_, a.group_, a.order_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < b.cols_; ++j) {
                NovikovSeries acc = out.zero();
                for (std::size_t k = 0; k < a.cols_; ++k) {
                    if (a(i, k).is_zero() && a(i, k).is_exact()) continue;
                    if (b(k, j).is_zero() && b(k, j).is_exact()) continue;
                    acc += a(i, k) * b(k, j);
                }
                out(i, j) = std::move(acc);
            }
        return out;
    }
    friend SeriesMatrix operator+(SeriesMatrix a, const SeriesMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw MathError("matrix dimension mismatch in sum");
        for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
        return a;
    }
    friend SeriesMatrix operator-(SeriesMatrix a, const SeriesMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw MathError("matrix dimension mismatch in difference");
        for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
        return a;
    }

    SeriesMatrix submatrix(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) const {
        SeriesMatrix out(rows.size(), cols.size(), group_, order_);
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = (*this)(rows[i], cols[j]);
        return out;
    }

    /// Applies f to every entry.
    template <class F>
    SeriesMatrix map(F&& f) const {
        SeriesMatrix out = *this;
        for (auto& e : out.data_) e = f(e);
        if (!out.data_.empty()) {
            out.group_ = out.data_.front().group();
            out.order_ = out.data_.front().coeff_order();
        }
        return out;
    }
    SeriesMatrix with_ring(GroupPtr group, std::int64_t order) const {
        SeriesMatrix out = *this;
        out.group_ = std::move(group);
        out.order_ = order;
        return out;
    }

    /// Every entry agrees with the other matrix below the common truncation.
    bool agrees_with(const SeriesMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) return false;
        for (std::size_t i = 0; i < data_.size(); ++i)
            if (!agree(data_[i], o.data_[i])) return false;
        return true;
    }

    void erase_row(std::size_t r) {
        std::vector<NovikovSeries> d;
        d.reserve((rows_ - 1) * cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            if (i != r)
                for (std::size_t j = 0; j < cols_; ++j) d.push_back((*this)(i, j));
        data_ = std::move(d);
        --rows_;
    }
    void erase_col(std::size_t c) {
        std::vector<NovikovSeries> d;
        d.reserve(rows_ * (cols_ - 1));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                if (j != c) d.push_back((*this)(i, j));
        data_ = std::move(d);
        --cols_;
    }
    void append_row(const std::vector<NovikovSeries>& row) {
        if (row.size() != cols_) throw MathError("row length mismatch");
        data_.insert(data_.end(), row.begin(), row.end());
        ++rows_;
    }
    void append_col(const std::vector<NovikovSeries>& col) {
        if (col.size() != rows_) throw MathError("column length mismatch");
        std::vector<NovikovSeries> d;
        d.reserve(rows_ * (cols_ + 1));
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) d.push_back((*this)(i, j));
            d.push_back(col[i]);
        }
        data_ = std::move(d);
        ++cols_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    GroupPtr group_;
    std::int64_t order_ = 1;
    std::vector<NovikovSeries> data_;
};

inline int permutation_sign(std::vector<std::size_t> p) {
    int sign = 1;
    for (std::size_t i = 0; i < p.size(); ++i)
        while (p[i] != i) {
            std::swap(p[i], p[p[i]]);
            sign = -sign;
        }
    return sign;
}

/// Result of column elimination with full pivoting.
struct Elimination {
    struct Pivot {
        std::size_t row, col;
        NovikovSeries value;
    };
    std::vector<Pivot> pivots;  // in elimination order
    bool complete = false;      // every column received a pivot
    bool precision_lost = false;

    /// Determinant of the square submatrix on the pivot rows and all columns,
    /// both taken in increasing index order. Requires `complete`.
    NovikovSeries determinant(const GroupPtr& group, std::int64_t order) const {
        NovikovSeries det = NovikovSeries::one(group, order);
        std::vector<std::size_t> rows, cols;
        for (const auto& p : pivots) {
            det *= p.value;
            rows.push_back(p.row);
            cols.push_back(p.col);
        }
        // pivot k sits at (rank of row_k, rank of col_k); the triangular form is in pivot order
        auto ranks = [](const std::vector<std::size_t>& v) {
            std::vector<std::size_t> sorted = v, r(v.size());
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t i = 0; i < v.size(); ++i)
                r[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v[i]) - sorted.begin());
            return r;
        };
        if (permutation_sign(ranks(rows)) * permutation_sign(ranks(cols)) < 0) det = -det;
        return det;
    }
};

/// How the next pivot is chosen among the nonzero entries.
struct PivotRule {
    /// Tie-break keys for rows and columns; smaller wins. Defaults to the index.
    std::vector<std::string> row_keys, col_keys;
    /// When set, ties in leading grade are broken by a random ranking of rows
    /// and columns instead of the keys.
    std::optional<std::uint64_t> random_seed;
};

/// Gaussian elimination of all columns of m with full pivoting.
///
/// Pivots of minimal leading grade are preferred. Each pivot eliminates its
/// column from the rows not yet used, so the pivot submatrix becomes triangular
/// in pivot order. Inverses are capped at `cap`. Stops at the first column that
/// has no nonzero entry left.
inline Elimination eliminate(SeriesMatrix m, const Truncation& cap, const PivotRule& rule = {}) {
    Elimination out;
    const std::size_t R = m.rows(), C = m.cols();
    std::vector<bool> row_used(R, false), col_used(C, false);
    std::vector<std::size_t> row_rank(R), col_rank(C);
    std::iota(row_rank.begin(), row_rank.end(), 0);
    std::iota(col_rank.begin(), col_rank.end(), 0);
    if (rule.random_seed) {
        std::mt19937_64 rng(*rule.random_seed);
        std::shuffle(row_rank.begin(), row_rank.end(), rng);
        std::shuffle(col_rank.begin(), col_rank.end(), rng);
    }
    Truncation reference = cap;
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < C; ++j) reference = min(reference, m(i, j).truncation());

    auto key_less = [&](std::size_t r1, std::size_t c1, std::size_t r2, std::size_t c2) {
        const auto& a = m(r1, c1);
        const auto& b = m(r2, c2);
        auto g = a.leading().grade <=> b.leading().grade;
        if (g != 0) return g < 0;
        if (rule.random_seed) {
            if (col_rank[c1] != col_rank[c2]) return col_rank[c1] < col_rank[c2];
            return row_rank[r1] < row_rank[r2];
        }
        auto ck1 = rule.col_keys.empty() ? std::to_string(c1) : rule.col_keys[c1];
        auto ck2 = rule.col_keys.empty() ? std::to_string(c2) : rule.col_keys[c2];
        if (ck1 != ck2) return rule.col_keys.empty() ? c1 < c2 : ck1 < ck2;
        auto rk1 = rule.row_keys.empty() ? std::to_string(r1) : rule.row_keys[r1];
        auto rk2 = rule.row_keys.empty() ? std::to_string(r2) : rule.row_keys[r2];
        return rule.row_keys.empty() ? r1 < r2 : rk1 < rk2;
    };

    for (std::size_t step = 0; step < C; ++step) {
        std::vector<std::pair<std::size_t, std::size_t>> candidates;
        for (std::size_t j = 0; j < C; ++j) {
            if (col_used[j]) continue;
            for (std::size_t i = 0; i < R; ++i)
                if (!row_used[i] && !m(i, j).is_zero()) candidates.emplace_back(i, j);
        }
        if (candidates.empty()) {
            for (std::size_t j = 0; j < C; ++j) {
                if (col_used[j]) continue;
                for (std::size_t i = 0; i < R; ++i)
                    if (!row_used[i] && m(i, j).truncation() < reference) out.precision_lost = true;
            }
            return out;
        }
        std::pair<std::size_t, std::size_t> best = candidates.front();
        for (const auto& c : candidates)
            if (key_less(c.first, c.second, best.first, best.second)) best = c;
        auto [pr, pc] = best;
        NovikovSeries pivot = m(pr, pc);
        NovikovSeries inv = series_invert(pivot, cap).series();
        for (std::size_t i = 0; i < R; ++i) {
            if (row_used[i] || i == pr || m(i, pc).is_zero()) continue;
            NovikovSeries f = m(i, pc) * inv;
            for (std::size_t j = 0; j < C; ++j) {
                if (col_used[j]) continue;
                if (j == pc) {
                    m(i, j) = NovikovSeries(m.group(), m.coeff_order());
                    continue;
                }
                if (m(pr, j).is_zero() && m(pr, j).is_exact()) continue;
                m(i, j) -= f * m(pr, j);
            }
        }
        row_used[pr] = true;
        col_used[pc] = true;
        out.pivots.push_back({pr, pc, std::move(pivot)});
    }
    out.complete = true;
    return out;
}

/// Determinant of a square matrix by elimination; zero (at the working truncation)
/// when some column cannot be pivoted.
inline NovikovSeries determinant(const SeriesMatrix& m, const Truncation& cap = {}) {
    if (m.rows() != m.cols()) throw MathError("determinant of a non-square matrix");
    if (m.rows() == 0) return NovikovSeries::one(m.group(), m.coeff_order());
    Elimination e = eliminate(m, cap);
    if (!e.complete) {
        if (e.precision_lost) throw TruncationError("determinant undecided at the working truncation");
        Truncation r = cap;
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) r = min(r, m(i, j).truncation());
        return NovikovSeries(m.group(), m.coeff_order(), r);
    }
    return e.determinant(m.group(), m.coeff_order());
}

/// Determinant by the Leibniz expansion; no divisions, so exact inputs stay exact.
inline NovikovSeries leibniz_determinant(const SeriesMatrix& m) {
    if (m.rows() != m.cols()) throw MathError("determinant of a non-square matrix");
    const std::size_t n = m.rows();
    NovikovSeries acc(m.group(), m.coeff_order());
    if (n == 0) return NovikovSeries::one(m.group(), m.coeff_order());
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        NovikovSeries term = NovikovSeries::one(m.group(), m.coeff_order());
        bool zero = false;
        for (std::size_t i = 0; i < n && !zero; ++i) {
            const auto& e = m(i, perm[i]);
            if (e.is_zero() && e.is_exact()) zero = true;
            else term *= e;
        }
        if (zero) continue;
        acc = permutation_sign(perm) > 0 ? acc + term : acc - term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return acc;
}

/// Inverse by Gauss-Jordan elimination with minimal-leading-grade pivots.
inline SeriesMatrix inverse(const SeriesMatrix& a, const Truncation& cap = {}) {
    if (a.rows() != a.cols()) throw MathError("inverse of a non-square matrix");
    const std::size_t n = a.rows();
    SeriesMatrix m = a;
    SeriesMatrix inv = SeriesMatrix::identity(n, a.group(), a.coeff_order());
    for (std::size_t c = 0; c < n; ++c) {
        std::optional<std::size_t> best;
        for (std::size_t r = c; r < n; ++r) {
            if (m(r, c).is_zero()) continue;
            if (!best || m(r, c).leading().grade < m(*best, c).leading().grade) best = r;
        }
        if (!best) throw MathError("matrix is not invertible at the working truncation");
        if (*best != c) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(m(c, j), m(*best, j));
                std::swap(inv(c, j), inv(*best, j));
            }
        }
        NovikovSeries p = series_invert(m(c, c), cap).series();
        for (std::size_t j = 0; j < n; ++j) {
            m(c, j) = m(c, j) * p;
            inv(c, j) = inv(c, j) * p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || m(r, c).is_zero()) continue;
            NovikovSeries f = m(r, c);
            for (std::size_t j = 0; j < n; ++j) {
                if (!m(c, j).is_zero() || !m(c, j).is_exact()) m(r, j) -= f * m(c, j);
                if (!inv(c, j).is_zero() || !inv(c, j).is_exact()) inv(r, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

}  // namespace novikov
