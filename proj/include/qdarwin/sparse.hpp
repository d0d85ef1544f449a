// sparse.hpp — SparseOperator on the joint space and the embedding of
// site-local operators: E acting on site j, identity elsewhere.

#pragma once

#include <Eigen/Sparse>

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "qdarwin/layout.hpp"
#include "qdarwin/linalg.hpp"

namespace qdarwin {

class SparseOperator {
public:
    using Triplet = Eigen::Triplet<cplx>;

    SparseOperator() = default;

    explicit SparseOperator(std::int64_t dim) : mat_(dim, dim) {}

    // Duplicate (row, col) entries are rejected rather than summed so that the
    // triplet list is a faithful description of the stored operator.
    SparseOperator(std::int64_t dim, const std::vector<Triplet>& entries)
        : mat_(dim, dim) {
        for (const auto& t : entries) {
            if (t.row() < 0 || t.col() < 0 || t.row() >= dim || t.col() >= dim) {
                throw std::out_of_range("SparseOperator: index out of range");
            }
        }
        auto sorted = entries;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
            return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
        });
        for (std::size_t i = 1; i < sorted.size(); ++i) {
            if (sorted[i].row() == sorted[i - 1].row() &&
                sorted[i].col() == sorted[i - 1].col()) {
                throw std::invalid_argument(
                    "SparseOperator: duplicate (row, col) entry");
            }
        }
        mat_.setFromTriplets(sorted.begin(), sorted.end());
        mat_.makeCompressed();
    }

    explicit SparseOperator(Eigen::SparseMatrix<cplx> m) : mat_(std::move(m)) {
        if (mat_.rows() != mat_.cols()) {
            throw std::invalid_argument("SparseOperator: must be square");
        }
        mat_.makeCompressed();
    }

    static SparseOperator from_dense(const Matrix& m, double drop_tol = 0.0) {
        if (m.rows() != m.cols()) {
            throw std::invalid_argument("SparseOperator: must be square");
        }
        std::vector<Triplet> ts;
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                if (std::abs(m(i, j)) > drop_tol) ts.emplace_back(i, j, m(i, j));
            }
        }
        return SparseOperator(m.rows(), ts);
    }

    static SparseOperator identity(std::int64_t dim) {
        Eigen::SparseMatrix<cplx> m(dim, dim);
        m.setIdentity();
        return SparseOperator(std::move(m));
    }

    static SparseOperator zero(std::int64_t dim) { return SparseOperator(dim); }

    std::int64_t dim() const { return mat_.rows(); }
    std::int64_t nnz() const { return mat_.nonZeros(); }
    const Eigen::SparseMatrix<cplx>& matrix() const { return mat_; }

    Matrix to_dense() const { return Matrix(mat_); }

    Vector apply(const Vector& v) const { return mat_ * v; }

    SparseOperator operator*(const SparseOperator& o) const {
        return SparseOperator(Eigen::SparseMatrix<cplx>(mat_ * o.mat_));
    }

    SparseOperator operator+(const SparseOperator& o) const {
        return SparseOperator(Eigen::SparseMatrix<cplx>(mat_ + o.mat_));
    }

    SparseOperator scaled(cplx a) const {
        return SparseOperator(Eigen::SparseMatrix<cplx>(a * mat_));
    }

    bool is_hermitian(double tol = 1e-12) const {
        Eigen::SparseMatrix<cplx> d = mat_ - Eigen::SparseMatrix<cplx>(mat_.adjoint());
        double scale = 1.0;
        for (int k = 0; k < mat_.outerSize(); ++k) {
            for (Eigen::SparseMatrix<cplx>::InnerIterator it(mat_, k); it; ++it) {
                scale = std::max(scale, std::abs(it.value()));
            }
        }
        for (int k = 0; k < d.outerSize(); ++k) {
            for (Eigen::SparseMatrix<cplx>::InnerIterator it(d, k); it; ++it) {
                if (std::abs(it.value()) > tol * scale) return false;
            }
        }
        return true;
    }

    bool is_diagonal() const {
        for (int k = 0; k < mat_.outerSize(); ++k) {
            for (Eigen::SparseMatrix<cplx>::InnerIterator it(mat_, k); it; ++it) {
                if (it.row() != it.col()) return false;
            }
        }
        return true;
    }

    Vector diagonal() const { return mat_.diagonal(); }

    // Largest row-sum of absolute values: cheap upper bound on the spectral
    // radius, used to pick Krylov substeps.
    double norm_bound() const {
        std::vector<double> row_sums(static_cast<std::size_t>(mat_.rows()), 0.0);
        for (int k = 0; k < mat_.outerSize(); ++k) {
            for (Eigen::SparseMatrix<cplx>::InnerIterator it(mat_, k); it; ++it) {
                row_sums[static_cast<std::size_t>(it.row())] += std::abs(it.value());
            }
        }
        double b = 0.0;
        for (double s : row_sums) b = std::max(b, s);
        return b;
    }

private:
    Eigen::SparseMatrix<cplx> mat_;
};

// --------------------------- embeddings -------------------------------------

// Operator acting as `local` on `site` and identity on every other site.
inline SparseOperator embed(const Matrix& local, int site,
                            const SubsystemLayout& layout) {
    if (site < 0 || site >= layout.num_sites()) {
        throw std::out_of_range("embed: site out of range");
    }
    if (local.rows() != local.cols() || local.rows() != layout.dim(site)) {
        throw std::invalid_argument("embed: operator does not match site dimension");
    }
    const std::int64_t stride = layout.stride(site);
    const std::int64_t d_site = layout.dim(site);
    const std::int64_t outer = layout.joint_dim() / (stride * d_site);

    std::vector<SparseOperator::Triplet> ts;
    for (Eigen::Index a = 0; a < local.rows(); ++a) {
        for (Eigen::Index b = 0; b < local.cols(); ++b) {
            const cplx v = local(a, b);
            if (v == cplx(0, 0)) continue;
            for (std::int64_t p = 0; p < outer; ++p) {
                const std::int64_t base = p * d_site * stride;
                for (std::int64_t q = 0; q < stride; ++q) {
                    ts.emplace_back(base + a * stride + q, base + b * stride + q, v);
                }
            }
        }
    }
    return SparseOperator(layout.joint_dim(), ts);
}

// Product of site-local factors acting on distinct sites (identity elsewhere):
// realizes terms of the form S ⊗ E_j without intermediate sparse products.
inline SparseOperator embed_product(
    const std::vector<std::pair<int, Matrix>>& factors,
    const SubsystemLayout& layout) {
    if (factors.empty()) return SparseOperator::identity(layout.joint_dim());

    std::vector<int> sites;
    for (const auto& [site, op] : factors) {
        if (site < 0 || site >= layout.num_sites()) {
            throw std::out_of_range("embed_product: site out of range");
        }
        if (op.rows() != op.cols() || op.rows() != layout.dim(site)) {
            throw std::invalid_argument(
                "embed_product: operator does not match site dimension");
        }
        sites.push_back(site);
    }
    std::sort(sites.begin(), sites.end());
    if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) {
        throw std::invalid_argument("embed_product: repeated site");
    }

    // Enumerate joint indices site by site: involved sites run over their
    // operator's nonzero (row, col) pairs, free sites run diagonally.
    struct Hop {
        std::int64_t stride;
        Eigen::Index a, b;  // row/col local indices
        cplx v;
    };
    std::vector<std::vector<Hop>> site_hops;
    for (const auto& [site, op] : factors) {
        std::vector<Hop> hops;
        for (Eigen::Index a = 0; a < op.rows(); ++a) {
            for (Eigen::Index b = 0; b < op.cols(); ++b) {
                if (op(a, b) != cplx(0, 0)) {
                    hops.push_back({layout.stride(site), a, b, op(a, b)});
                }
            }
        }
        if (hops.empty()) return SparseOperator::zero(layout.joint_dim());
        site_hops.push_back(std::move(hops));
    }

    // Free-site enumeration: all joint indices with involved-site digits zero.
    std::vector<std::int64_t> free_base;
    {
        std::vector<int> free_sites;
        for (int s = 0; s < layout.num_sites(); ++s) {
            if (!std::binary_search(sites.begin(), sites.end(), s)) {
                free_sites.push_back(s);
            }
        }
        free_base.push_back(0);
        for (int s : free_sites) {
            std::vector<std::int64_t> next;
            next.reserve(free_base.size() * static_cast<std::size_t>(layout.dim(s)));
            for (std::int64_t base : free_base) {
                for (int x = 0; x < layout.dim(s); ++x) {
                    next.push_back(base + x * layout.stride(s));
                }
            }
            free_base = std::move(next);
        }
    }

    std::vector<SparseOperator::Triplet> ts;
    std::vector<std::size_t> pick(site_hops.size(), 0);
    while (true) {
        std::int64_t row_off = 0, col_off = 0;
        cplx v = 1.0;
        for (std::size_t i = 0; i < site_hops.size(); ++i) {
            const Hop& h = site_hops[i][pick[i]];
            row_off += h.a * h.stride;
            col_off += h.b * h.stride;
            v *= h.v;
        }
        for (std::int64_t base : free_base) {
            ts.emplace_back(base + row_off, base + col_off, v);
        }
        std::size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < site_hops[i].size()) break;
            pick[i] = 0;
        }
        if (i == pick.size()) break;
    }
    return SparseOperator(layout.joint_dim(), ts);
}

// --------------------------- SiteOperatorEmbedding ---------------------------

// A site-indexed family of local operators over one layout; embedding any of
// them lands in the same joint space.
class SiteOperatorEmbedding {
public:
    explicit SiteOperatorEmbedding(SubsystemLayout layout)
        : layout_(std::move(layout)) {}

    void set(int site, Matrix op) {
        if (site < 0 || site >= layout_.num_sites()) {
            throw std::out_of_range("SiteOperatorEmbedding: site out of range");
        }
        if (op.rows() != op.cols() || op.rows() != layout_.dim(site)) {
            throw std::invalid_argument(
                "SiteOperatorEmbedding: operator does not match site dimension");
        }
        ops_.emplace_back(site, std::move(op));
    }

    const SubsystemLayout& layout() const { return layout_; }

    // Joint-space embedding of the operator registered for `site`.
    SparseOperator embedded(int site) const {
        for (const auto& [s, op] : ops_) {
            if (s == site) return embed(op, s, layout_);
        }
        throw std::out_of_range("SiteOperatorEmbedding: no operator for site");
    }

    const std::vector<std::pair<int, Matrix>>& entries() const { return ops_; }

private:
    SubsystemLayout layout_;
    std::vector<std::pair<int, Matrix>> ops_;
};

}  // namespace qdarwin
