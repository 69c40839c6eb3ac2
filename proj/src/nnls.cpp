#include "corrnet/nnls.hpp"

#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace corrnet::nnls {

namespace {

/// Upper-triangular R with R^T R equal to the Gram matrix of the passive
/// columns, in insertion order.
class PassiveFactor {
public:
    explicit PassiveFactor(const LinearOperator& a) : a_(a), r_(16, 16) {}

    std::size_t size() const { return index_.size(); }
    const std::vector<std::size_t>& index() const { return index_; }

    /// False when column j is numerically dependent on the passive columns.
    bool append(std::size_t j)
    {
        const auto p = static_cast<Eigen::Index>(index_.size());
        reserve(p + 1);
        Eigen::VectorXd col(p);
        for (Eigen::Index k = 0; k < p; ++k)
            col(k) = a_.gram(index_[static_cast<std::size_t>(k)], j);
        if (p > 0)
            r_.topLeftCorner(p, p).transpose().triangularView<Eigen::Lower>().solveInPlace(col);
        const double gjj = a_.gram(j, j);
        const double diag2 = gjj - col.squaredNorm();
        if (!(diag2 > 1e-13 * gjj))
            return false;
        r_.col(p).head(p) = col;
        r_.row(p).head(p + 1).setZero();
        r_(p, p) = std::sqrt(diag2);
        index_.push_back(j);
        return true;
    }

    /// Drops the column at position k and restores the triangle with Givens rotations.
    void remove(std::size_t k)
    {
        const auto p = static_cast<Eigen::Index>(index_.size());
        const auto kk = static_cast<Eigen::Index>(k);
        for (Eigen::Index c = kk; c + 1 < p; ++c)
            r_.col(c).head(p) = r_.col(c + 1).head(p);
        for (Eigen::Index i = kk; i + 1 < p; ++i) {
            Eigen::JacobiRotation<double> g;
            g.makeGivens(r_(i, i), r_(i + 1, i));
            r_.block(0, 0, p, p - 1).applyOnTheLeft(i, i + 1, g.adjoint());
            r_(i + 1, i) = 0.0;
        }
        index_.erase(index_.begin() + static_cast<std::ptrdiff_t>(k));
    }

    /// Solves R^T R z = rhs.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const
    {
        const auto p = static_cast<Eigen::Index>(index_.size());
        Eigen::VectorXd z = rhs;
        r_.topLeftCorner(p, p).transpose().triangularView<Eigen::Lower>().solveInPlace(z);
        r_.topLeftCorner(p, p).triangularView<Eigen::Upper>().solveInPlace(z);
        return z;
    }

private:
    void reserve(Eigen::Index p)
    {
        if (p <= r_.rows())
            return;
        const Eigen::Index cap = std::max<Eigen::Index>(2 * r_.rows(), p);
        Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(cap, cap);
        const auto used = static_cast<Eigen::Index>(index_.size());
        grown.topLeftCorner(used, used) = r_.topLeftCorner(used, used);
        r_.swap(grown);
    }

    const LinearOperator& a_;
    Eigen::MatrixXd r_;
    std::vector<std::size_t> index_;
};

} // namespace

Result solve(const LinearOperator& a, const Eigen::VectorXd& b, const Options& options)
{
    const std::size_t n = a.cols();
    const Eigen::VectorXd atb = a.apply_transpose(b);
    const double scale = std::max(1.0, n ? atb.cwiseAbs().maxCoeff() : 0.0);
    const double tol = options.tolerance * scale;
    const std::size_t cap = options.max_iterations ? options.max_iterations : 10 * n;

    Result result;
    result.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd& x = result.x;
    std::vector<bool> passive(n, false), blocked(n, false);
    PassiveFactor factor(a);
    Eigen::VectorXd w = atb;

    // Passive-set least squares with one step of iterative refinement.
    auto subsolve = [&]() {
        const auto& idx = factor.index();
        const auto p = static_cast<Eigen::Index>(idx.size());
        Eigen::VectorXd rhs(p);
        for (Eigen::Index k = 0; k < p; ++k)
            rhs(k) = atb(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(k)]));
        Eigen::VectorXd z = factor.solve(rhs);
        Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (Eigen::Index k = 0; k < p; ++k)
            full(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(k)])) = z(k);
        const Eigen::VectorXd g = a.apply_transpose(b - a.apply(full));
        for (Eigen::Index k = 0; k < p; ++k)
            rhs(k) = g(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(k)]));
        z += factor.solve(rhs);
        return z;
    };

    while (true) {
        std::size_t j = n;
        double best = tol;
        for (std::size_t k = 0; k < n; ++k)
            if (!passive[k] && !blocked[k] && w(static_cast<Eigen::Index>(k)) > best) {
                best = w(static_cast<Eigen::Index>(k));
                j = k;
            }
        if (j == n) {
            result.converged = true;
            break;
        }
        if (++result.iterations > cap)
            break;

        if (!factor.append(j)) {
            blocked[j] = true;
            continue;
        }
        passive[j] = true;
        Eigen::VectorXd z = subsolve();
        if (!(z(z.size() - 1) > 0.0)) {
            // Roundoff made the new column useless; skip it until x moves.
            factor.remove(factor.size() - 1);
            passive[j] = false;
            blocked[j] = true;
            continue;
        }

        while (true) {
            const auto& idx = factor.index();
            double alpha = std::numeric_limits<double>::infinity();
            std::size_t hit = idx.size();
            for (std::size_t k = 0; k < idx.size(); ++k) {
                const auto zk = z(static_cast<Eigen::Index>(k));
                if (zk <= 0.0) {
                    const double xk = x(static_cast<Eigen::Index>(idx[k]));
                    const double t = xk / (xk - zk);
                    if (t < alpha) {
                        alpha = t;
                        hit = k;
                    }
                }
            }
            if (hit == idx.size())
                break;
            for (std::size_t k = 0; k < idx.size(); ++k) {
                auto& xk = x(static_cast<Eigen::Index>(idx[k]));
                xk += alpha * (z(static_cast<Eigen::Index>(k)) - xk);
            }
            x(static_cast<Eigen::Index>(idx[hit])) = 0.0;
            for (std::size_t k = idx.size(); k-- > 0;) {
                const std::size_t col = factor.index()[k];
                if (x(static_cast<Eigen::Index>(col)) <= 0.0) {
                    x(static_cast<Eigen::Index>(col)) = 0.0;
                    passive[col] = false;
                    factor.remove(k);
                }
            }
            if (factor.size() == 0) {
                z.resize(0);
                break;
            }
            z = subsolve();
        }
        const auto& idx = factor.index();
        for (std::size_t k = 0; k < idx.size(); ++k)
            x(static_cast<Eigen::Index>(idx[k])) = z(static_cast<Eigen::Index>(k));
        std::fill(blocked.begin(), blocked.end(), false);
        w = a.apply_transpose(b - a.apply(x));
    }

    result.dual_violation = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (!passive[k])
            result.dual_violation = std::max(result.dual_violation, w(static_cast<Eigen::Index>(k)));
    return result;
}

} // namespace corrnet::nnls
