#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace corrnet::nnls {

/// Linear map A (rows x cols) seen only through products and Gram entries,
/// so structured design matrices never have to be stored densely.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;
    /// y = A x
    virtual Eigen::VectorXd apply(const Eigen::VectorXd& x) const = 0;
    /// g = A^T r
    virtual Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const = 0;
    /// (A^T A)(i, j)
    virtual double gram(std::size_t i, std::size_t j) const = 0;
};

/// Plain dense matrix behind the operator interface.
class DenseOperator final : public LinearOperator {
public:
    explicit DenseOperator(Eigen::MatrixXd a) : a_(std::move(a)) {}

    std::size_t rows() const override { return static_cast<std::size_t>(a_.rows()); }
    std::size_t cols() const override { return static_cast<std::size_t>(a_.cols()); }
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const override { return a_ * x; }
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const override { return a_.transpose() * r; }
    double gram(std::size_t i, std::size_t j) const override
    {
        return a_.col(static_cast<Eigen::Index>(i)).dot(a_.col(static_cast<Eigen::Index>(j)));
    }

private:
    Eigen::MatrixXd a_;
};

struct Options {
    /// Dual feasibility: stop once every A^T(b - Ax) entry outside the passive
    /// set is <= tolerance * max(1, |A^T b|_inf).
    double tolerance = 1e-10;
    /// 0 selects 10 * cols.
    std::size_t max_iterations = 0;
};

struct Result {
    Eigen::VectorXd x;
    std::size_t iterations = 0;
    bool converged = false;
    /// Largest positive dual entry outside the passive set at exit.
    double dual_violation = 0.0;
};

/// Lawson-Hanson active-set NNLS: min |Ax - b|_2 subject to x >= 0.
/// Passive-set subproblems are solved through an incrementally updated
/// Cholesky factor of the Gram submatrix, with one refinement step that uses
/// the exact operator products. Deterministic; ties go to the lowest index.
Result solve(const LinearOperator& a, const Eigen::VectorXd& b, const Options& options = {});

} // namespace corrnet::nnls
