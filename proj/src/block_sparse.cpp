#include "hybridmg/block_sparse.hpp"

#include "hybridmg/error.hpp"

#include <algorithm>
#include <ostream>

namespace hybridmg {

BlockSparseMatrix::BlockSparseMatrix(std::vector<int> block_sizes) : sizes_(std::move(block_sizes)) {
    for (int s : sizes_) {
        if (s < 0) throw Error("negative block size");
        offsets_.push_back(offsets_.back() + s);
    }
    row_ptr_.assign(sizes_.size() + 1, 0);
}

const Eigen::MatrixXd* BlockSparseMatrix::find(int r, int c) const {
    const auto begin = col_.begin() + row_ptr_[r];
    const auto end = col_.begin() + row_ptr_[r + 1];
    const auto it = std::lower_bound(begin, end, c);
    if (it == end || *it != c) return nullptr;
    return &values_[it - col_.begin()];
}

Eigen::VectorXd BlockSparseMatrix::matvec(const Eigen::VectorXd& x) const {
    if (x.size() != cols()) throw Error("matvec: dimension mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(rows());
    for (int r = 0; r < num_blocks(); ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            const int c = col_[k];
            y.segment(offsets_[r], sizes_[r]).noalias() += values_[k] * x.segment(offsets_[c], sizes_[c]);
        }
    return y;
}

Eigen::VectorXd BlockSparseMatrix::diagonal() const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(rows());
    for (int b = 0; b < num_blocks(); ++b)
        if (const auto* blk = find(b, b)) d.segment(offsets_[b], sizes_[b]) = blk->diagonal();
    return d;
}

Eigen::MatrixXd BlockSparseMatrix::diagonal_block(int b) const {
    if (const auto* blk = find(b, b)) return *blk;
    return Eigen::MatrixXd::Zero(sizes_[b], sizes_[b]);
}

Eigen::MatrixXd BlockSparseMatrix::densify() const {
    if (rows() > 5000) throw Error("densify: dimension " + std::to_string(rows()) + " exceeds 5000");
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows(), cols());
    for (int r = 0; r < num_blocks(); ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            d.block(offsets_[r], offsets_[col_[k]], sizes_[r], sizes_[col_[k]]) = values_[k];
    return d;
}

SparseMatrix BlockSparseMatrix::to_sparse() const {
    std::vector<Eigen::Triplet<double>> trips;
    for (int r = 0; r < num_blocks(); ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            const auto& v = values_[k];
            for (int i = 0; i < v.rows(); ++i)
                for (int j = 0; j < v.cols(); ++j)
                    trips.emplace_back(offsets_[r] + i, offsets_[col_[k]] + j, v(i, j));
        }
    SparseMatrix s(rows(), cols());
    s.setFromTriplets(trips.begin(), trips.end());
    return s;
}

BlockSparseMatrix BlockSparseMatrix::from_sparse(const SparseMatrix& a, std::vector<int> block_sizes) {
    BlockSparseBuilder builder(block_sizes);
    std::vector<int> block_of, offset;
    for (std::size_t b = 0; b < block_sizes.size(); ++b)
        for (int i = 0; i < block_sizes[b]; ++i) {
            block_of.push_back(static_cast<int>(b));
            offset.push_back(i);
        }
    if (static_cast<int>(block_of.size()) != a.rows() || a.rows() != a.cols())
        throw Error("from_sparse: block sizes do not match the matrix");
    std::map<std::pair<int, int>, Eigen::MatrixXd> blocks;
    for (int i = 0; i < a.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
            const int r = block_of[it.row()];
            const int c = block_of[it.col()];
            auto [pos, fresh] = blocks.try_emplace({r, c});
            if (fresh) pos->second = Eigen::MatrixXd::Zero(block_sizes[r], block_sizes[c]);
            pos->second(offset[it.row()], offset[it.col()]) += it.value();
        }
    for (const auto& [key, blk] : blocks) builder.add(key.first, key.second, blk);
    return builder.build();
}

bool BlockSparseMatrix::is_symmetric(double rel_tol) const {
    double scale = 0.0;
    for (const auto& v : values_) scale = std::max(scale, v.cwiseAbs().maxCoeff());
    for (int r = 0; r < num_blocks(); ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            const auto* t = find(col_[k], r);
            const Eigen::MatrixXd other = t ? Eigen::MatrixXd(t->transpose())
                                            : Eigen::MatrixXd::Zero(values_[k].rows(), values_[k].cols());
            if ((values_[k] - other).cwiseAbs().maxCoeff() > rel_tol * scale) return false;
        }
    return true;
}

void BlockSparseMatrix::write_triplets(std::ostream& out) const {
    const auto old = out.precision(17);
    for (int r = 0; r < num_blocks(); ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            const auto& v = values_[k];
            for (int i = 0; i < v.rows(); ++i)
                for (int j = 0; j < v.cols(); ++j)
                    out << offsets_[r] + i << ' ' << offsets_[col_[k]] + j << ' ' << v(i, j) << '\n';
        }
    out.precision(old);
}

// ---------------------------------------------------------------------------

BlockSparseBuilder::BlockSparseBuilder(std::vector<int> block_sizes) : sizes_(std::move(block_sizes)) {}

void BlockSparseBuilder::add(int r, int c, const Eigen::MatrixXd& block) {
    if (r < 0 || c < 0 || r >= static_cast<int>(sizes_.size()) || c >= static_cast<int>(sizes_.size()))
        throw Error("BlockSparseBuilder: block index out of range");
    if (block.rows() != sizes_[r] || block.cols() != sizes_[c]) throw Error("BlockSparseBuilder: block shape mismatch");
    auto [it, fresh] = blocks_.try_emplace({r, c}, block);
    if (!fresh) it->second += block;
}

BlockSparseMatrix BlockSparseBuilder::build() const {
    BlockSparseMatrix m(sizes_);
    m.row_ptr_.assign(sizes_.size() + 1, 0);
    for (const auto& [key, blk] : blocks_) {
        ++m.row_ptr_[key.first + 1];
        m.col_.push_back(key.second);
        m.values_.push_back(blk);
    }
    for (std::size_t r = 0; r < sizes_.size(); ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
}

// ---------------------------------------------------------------------------

namespace {

SparseMatrix extract(const SparseMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
    std::vector<int> col_pos(a.cols(), -1);
    for (std::size_t j = 0; j < cols.size(); ++j) col_pos[cols[j]] = static_cast<int>(j);
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (SparseMatrix::InnerIterator it(a, rows[i]); it; ++it)
            if (col_pos[it.col()] >= 0) trips.emplace_back(static_cast<int>(i), col_pos[it.col()], it.value());
    SparseMatrix s(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    s.setFromTriplets(trips.begin(), trips.end());
    return s;
}

} // namespace

Partition partition(const BlockSparseMatrix& a, const std::vector<int>& interior_blocks,
                    const std::vector<int>& boundary_blocks) {
    std::vector<int> mark(a.num_blocks(), 0);
    for (int b : interior_blocks) {
        if (b < 0 || b >= a.num_blocks() || mark[b]++) throw Error("partition: interior block repeated or invalid");
    }
    for (int b : boundary_blocks) {
        if (b < 0 || b >= a.num_blocks() || mark[b]++) throw Error("partition: block in both sets or invalid");
    }
    for (int b = 0; b < a.num_blocks(); ++b)
        if (!mark[b]) throw Error("partition: block " + std::to_string(b) + " is in neither set");

    Partition p;
    p.interior_blocks = interior_blocks;
    p.boundary_blocks = boundary_blocks;
    for (int b : interior_blocks)
        for (int i = 0; i < a.block_size(b); ++i) p.interior_dofs.push_back(a.block_offset(b) + i);
    for (int b : boundary_blocks)
        for (int i = 0; i < a.block_size(b); ++i) p.boundary_dofs.push_back(a.block_offset(b) + i);
    const SparseMatrix s = a.to_sparse();
    p.A_II = extract(s, p.interior_dofs, p.interior_dofs);
    p.A_IB = extract(s, p.interior_dofs, p.boundary_dofs);
    p.A_BI = extract(s, p.boundary_dofs, p.interior_dofs);
    p.A_BB = extract(s, p.boundary_dofs, p.boundary_dofs);
    return p;
}

SparseMatrix Partition::reassemble() const {
    const int n = static_cast<int>(interior_dofs.size() + boundary_dofs.size());
    std::vector<Eigen::Triplet<double>> trips;
    auto scatter = [&](const SparseMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
        for (int i = 0; i < m.outerSize(); ++i)
            for (SparseMatrix::InnerIterator it(m, i); it; ++it)
                trips.emplace_back(rows[it.row()], cols[it.col()], it.value());
    };
    scatter(A_II, interior_dofs, interior_dofs);
    scatter(A_IB, interior_dofs, boundary_dofs);
    scatter(A_BI, boundary_dofs, interior_dofs);
    scatter(A_BB, boundary_dofs, boundary_dofs);
    SparseMatrix s(n, n);
    s.setFromTriplets(trips.begin(), trips.end());
    return s;
}

} // namespace hybridmg
