#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <iosfwd>
#include <map>
#include <vector>

namespace hybridmg {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Block CSR matrix whose block rows/columns are edges (or macro-edges).
class BlockSparseMatrix {
public:
    BlockSparseMatrix() = default;
    /// Square matrix with the given block sizes and no stored blocks.
    explicit BlockSparseMatrix(std::vector<int> block_sizes);

    int num_blocks() const { return static_cast<int>(sizes_.size()); }
    int rows() const { return offsets_.empty() ? 0 : offsets_.back(); }
    int cols() const { return rows(); }
    int block_size(int b) const { return sizes_[b]; }
    int block_offset(int b) const { return offsets_[b]; }
    const std::vector<int>& block_sizes() const { return sizes_; }
    const std::vector<int>& block_offsets() const { return offsets_; }

    // CSR access: blocks of block-row r are row_ptr()[r] .. row_ptr()[r+1]-1.
    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_index() const { return col_; }
    const Eigen::MatrixXd& block_value(int k) const { return values_[k]; }
    int num_stored_blocks() const { return static_cast<int>(values_.size()); }

    /// Stored block (r, c), or nullptr.
    const Eigen::MatrixXd* find(int r, int c) const;

    Eigen::VectorXd matvec(const Eigen::VectorXd& x) const;
    Eigen::VectorXd diagonal() const;
    Eigen::MatrixXd diagonal_block(int b) const;

    /// Dense copy; refuses dimensions above 5000.
    Eigen::MatrixXd densify() const;
    SparseMatrix to_sparse() const;
    static BlockSparseMatrix from_sparse(const SparseMatrix& a, std::vector<int> block_sizes);

    bool is_symmetric(double rel_tol = 1e-10) const;

    /// "row col value" triplets, one per line, zero-based.
    void write_triplets(std::ostream& out) const;

private:
    friend class BlockSparseBuilder;
    std::vector<int> sizes_;
    std::vector<int> offsets_{0};
    std::vector<int> row_ptr_{0};
    std::vector<int> col_;
    std::vector<Eigen::MatrixXd> values_;
};

/// Accumulates blocks (duplicates are summed) and emits a sorted block CSR matrix.
class BlockSparseBuilder {
public:
    explicit BlockSparseBuilder(std::vector<int> block_sizes);
    void add(int r, int c, const Eigen::MatrixXd& block);
    BlockSparseMatrix build() const;

private:
    std::vector<int> sizes_;
    std::map<std::pair<int, int>, Eigen::MatrixXd> blocks_;
};

/// Two-way split of a matrix into interior (I) and boundary (B) block sets.
struct Partition {
    std::vector<int> interior_blocks;
    std::vector<int> boundary_blocks;
    std::vector<int> interior_dofs; // scalar indices into the original matrix
    std::vector<int> boundary_dofs;
    SparseMatrix A_II, A_IB, A_BI, A_BB;

    /// Inverse permutation: reassembles the original matrix.
    SparseMatrix reassemble() const;
};

/// Errors when the block sets overlap or miss a block.
Partition partition(const BlockSparseMatrix& a, const std::vector<int>& interior_blocks,
                    const std::vector<int>& boundary_blocks);

} // namespace hybridmg
