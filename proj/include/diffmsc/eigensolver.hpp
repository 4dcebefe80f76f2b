#pragma once

// Smallest eigenpairs of the symmetric-definite pencil (W, A), W symmetric positive
// semidefinite and A symmetric positive definite.
//
// Large problems use shift-invert with a negative shift sigma (so W - sigma*A is positive
// definite even though W is singular) and a thick-restarted block Krylov iteration on
// Op = (W - sigma*A)^-1 A, which is self-adjoint in the A-inner product. Every restart
// performs an explicit Rayleigh-Ritz projection and checks true residuals. Blocks keep
// exactly degenerate eigenvalues (symmetric meshes) from being missed.

#include <diffmsc/error.hpp>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>

namespace diffmsc {

struct EigensolverOptions {
    std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
    int max_restarts = 200;
    /// Relative residual target on the shift-inverted operator.
    double tolerance = 1e-10;
    Eigen::Index block_size = 8;
    /// Problems up to this size (or asking for more than a third of the spectrum) are solved densely.
    Eigen::Index dense_threshold = 400;
};

struct EigenDecomposition {
    Eigen::VectorXd values;  ///< ascending
    Eigen::MatrixXd vectors; ///< A-orthonormal columns
    int restarts = 0;
};

namespace detail {

/// First entry with magnitude above 1e-10 of the column maximum is made positive.
inline void canonicalize_signs(Eigen::MatrixXd& vectors)
{
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        const double cutoff = 1e-10 * vectors.col(c).cwiseAbs().maxCoeff();
        for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
            if (std::abs(vectors(r, c)) > cutoff) {
                if (vectors(r, c) < 0.0) vectors.col(c) *= -1.0;
                break;
            }
        }
    }
}

class BlockKrylovSolver {
public:
    BlockKrylovSolver(const Eigen::SparseMatrix<double>& W, const Eigen::SparseMatrix<double>& A,
                      const EigensolverOptions& options)
        : W_(W), A_(A), opt_(options), rng_(options.seed), n_(W.rows())
    {
        const double mass = Eigen::VectorXd::Ones(n_).dot(A_ * Eigen::VectorXd::Ones(n_));
        sigma_ = -1.0 / mass;
        Eigen::SparseMatrix<double> K = W_ - sigma_ * A_;
        ldlt_.compute(K);
        if (ldlt_.info() != Eigen::Success) {
            throw NumericalError("factorization of the shifted stiffness matrix failed");
        }
    }

    EigenDecomposition solve(Eigen::Index k)
    {
        using Eigen::Index;
        using Eigen::MatrixXd;
        using Eigen::VectorXd;

        const Index b = std::max<Index>(1, std::min(opt_.block_size, k));
        const Index m = std::min(n_, std::max(2 * k + b, k + 4 * b));
        const Index keep = std::min(m - b, k + (m - k) / 2);

        MatrixXd V(n_, m), Z(n_, m);
        Index used = 0;
        MatrixXd candidate = random_block(b);
        double worst = 0.0;

        for (int restart = 0; restart <= opt_.max_restarts; ++restart) {
            while (used < m) {
                const Index bb = std::min(b, m - used);
                MatrixXd C = candidate.leftCols(std::min(bb, candidate.cols()));
                if (C.cols() < bb) {
                    MatrixXd padded(n_, bb);
                    padded << C, random_block(bb - C.cols());
                    C = std::move(padded);
                }
                orthonormalize(C, V.leftCols(used));
                V.middleCols(used, bb) = C;
                MatrixXd ZC = ldlt_.solve(MatrixXd(A_ * C));
                Z.middleCols(used, bb) = ZC;
                used += bb;
                candidate = std::move(ZC);
            }

            MatrixXd T = V.leftCols(used).transpose() * (A_ * Z.leftCols(used));
            T = 0.5 * (T + T.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(T);
            if (es.info() != Eigen::Success) throw NumericalError("projected eigenproblem failed");
            const VectorXd theta = es.eigenvalues().reverse();
            const MatrixXd S = es.eigenvectors().rowwise().reverse();

            const bool exhausted = used == n_;
            const Index l = exhausted ? k : keep;
            MatrixXd Y = V.leftCols(used) * S.leftCols(l);
            MatrixXd ZY = Z.leftCols(used) * S.leftCols(l);
            MatrixXd R = ZY - Y * theta.head(l).asDiagonal();
            const MatrixXd AR = A_ * R;

            std::vector<Index> unconverged;
            worst = 0.0;
            for (Index i = 0; i < l; ++i) {
                const double res = std::sqrt(std::max(0.0, R.col(i).dot(AR.col(i)))) /
                                   std::abs(theta(i));
                if (i < k) worst = std::max(worst, res);
                if (res > opt_.tolerance) unconverged.push_back(i);
            }

            if (exhausted || worst <= opt_.tolerance) return finish(Y.leftCols(k), restart);

            V.leftCols(l) = Y;
            Z.leftCols(l) = ZY;
            used = l;
            // residuals of the leading unconverged Ritz pairs continue the Krylov sequence
            candidate.resize(n_, std::min<Index>(b, static_cast<Index>(unconverged.size())));
            for (Index c = 0; c < candidate.cols(); ++c) candidate.col(c) = R.col(unconverged[c]);
        }
        throw NumericalError("eigensolver did not converge after " +
                                 std::to_string(opt_.max_restarts) +
                                 " restarts (worst relative residual " + std::to_string(worst) + ")",
                             worst);
    }

private:
    Eigen::MatrixXd random_block(Eigen::Index cols)
    {
        std::normal_distribution<double> g(0.0, 1.0);
        Eigen::MatrixXd X(n_, cols);
        for (Eigen::Index c = 0; c < cols; ++c) {
            for (Eigen::Index r = 0; r < n_; ++r) X(r, c) = g(rng_);
        }
        return X;
    }

    double a_norm(const Eigen::VectorXd& x) const
    {
        return std::sqrt(std::max(0.0, x.dot(A_ * x)));
    }

    /// Makes the columns of C A-orthonormal and A-orthogonal to `basis` (assumed A-orthonormal).
    void orthonormalize(Eigen::MatrixXd& C, const Eigen::Ref<const Eigen::MatrixXd>& basis)
    {
        Eigen::VectorXd reference(C.cols());
        for (Eigen::Index j = 0; j < C.cols(); ++j) reference(j) = a_norm(C.col(j));
        if (basis.cols() > 0) {
            for (int pass = 0; pass < 2; ++pass) {
                C -= basis * (basis.transpose() * (A_ * C));
            }
        }
        for (Eigen::Index j = 0; j < C.cols(); ++j) {
            Eigen::VectorXd c = C.col(j);
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index i = 0; i < j; ++i) c -= C.col(i).dot(A_ * c) * C.col(i);
            }
            double norm = a_norm(c);
            int attempts = 0;
            while (!(norm > 1e-10 * reference(j)) || reference(j) == 0.0) {
                // direction lies in the current subspace: replace it with a fresh random one
                if (++attempts > 8) throw NumericalError("unable to extend the Krylov subspace");
                c = random_block(1).col(0);
                reference(j) = a_norm(c);
                for (int pass = 0; pass < 2; ++pass) {
                    if (basis.cols() > 0) c -= basis * (basis.transpose() * (A_ * c));
                    for (Eigen::Index i = 0; i < j; ++i) c -= C.col(i).dot(A_ * c) * C.col(i);
                }
                norm = a_norm(c);
            }
            C.col(j) = c / norm;
        }
    }

    EigenDecomposition finish(const Eigen::MatrixXd& Y, int restarts) const
    {
        const Eigen::Index k = Y.cols();
        const Eigen::MatrixXd WY = W_ * Y;
        Eigen::VectorXd rayleigh(k);
        for (Eigen::Index i = 0; i < k; ++i) rayleigh(i) = Y.col(i).dot(WY.col(i));
        std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return rayleigh(a) < rayleigh(b); });
        EigenDecomposition out;
        out.values.resize(k);
        out.vectors.resize(n_, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            out.values(i) = rayleigh(order[static_cast<std::size_t>(i)]);
            out.vectors.col(i) = Y.col(order[static_cast<std::size_t>(i)]);
        }
        out.restarts = restarts;
        return out;
    }

    const Eigen::SparseMatrix<double>& W_;
    const Eigen::SparseMatrix<double>& A_;
    EigensolverOptions opt_;
    std::mt19937_64 rng_;
    Eigen::Index n_;
    double sigma_ = 0.0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

} // namespace detail

/// The k smallest eigenpairs of W x = lambda A x, ascending, A-orthonormal, with the sign
/// convention of `detail::canonicalize_signs`. Deterministic for a fixed seed.
inline EigenDecomposition smallest_generalized_eigenpairs(const Eigen::SparseMatrix<double>& W,
                                                          const Eigen::SparseMatrix<double>& A,
                                                          Eigen::Index k,
                                                          const EigensolverOptions& options = {})
{
    const Eigen::Index n = W.rows();
    if (W.cols() != n || A.rows() != n || A.cols() != n) {
        throw InvalidInput("stiffness and mass matrices must be square and of equal size");
    }
    if (k < 1 || k > n) {
        throw InvalidInput("requested " + std::to_string(k) + " eigenpairs for a problem of size " +
                           std::to_string(n));
    }

    EigenDecomposition out;
    if (n <= options.dense_threshold || 3 * k > n) {
        const Eigen::MatrixXd Wd(W), Ad(A);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
            Wd, Ad, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
        if (es.info() != Eigen::Success) {
            throw NumericalError("dense generalized eigensolver failed (is A positive definite?)");
        }
        out.values = es.eigenvalues().head(k);
        out.vectors = es.eigenvectors().leftCols(k);
    } else {
        detail::BlockKrylovSolver solver(W, A, options);
        out = solver.solve(k);
    }
    detail::canonicalize_signs(out.vectors);
    return out;
}

} // namespace diffmsc
