#include "dmri/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace dmri::num {

namespace {

Eigen::MatrixXcd normal_matrix(const ComplexMatrix& p, double alpha) {
    Eigen::MatrixXcd n = p.adjoint() * p;
    n.diagonal().array() += alpha;
    return n;
}

}  // namespace

TikhonovFactorization solve_tikhonov_factored(const ComplexMatrix& p, const ComplexMatrix& t,
                                              double alpha) {
    if (p.rows() != t.rows())
        throw DimensionMismatch("solve_tikhonov: P and T row counts differ");
    if (p.rows() < 1 || p.cols() < 1 || t.cols() < 1)
        throw DimensionMismatch("solve_tikhonov: empty system");
    if (alpha < 0.0) throw Error("solve_tikhonov: alpha must be nonnegative");

    TikhonovFactorization fac;
    fac.llt.compute(normal_matrix(p, alpha));
    if (fac.llt.info() != Eigen::Success)
        throw SingularSystem("solve_tikhonov: normal matrix factorization failed");
    fac.w = fac.llt.solve(Eigen::MatrixXcd(p.adjoint() * t));
    if (!fac.w.allFinite())
        throw SingularSystem("solve_tikhonov: non-finite solution (singular normal matrix)");
    return fac;
}

ComplexMatrix solve_tikhonov(const ComplexMatrix& p, const ComplexMatrix& t, double alpha) {
    return solve_tikhonov_factored(p, t, alpha).w;
}

TikhonovGrads solve_tikhonov_grad(const ComplexMatrix& p, const ComplexMatrix& t,
                                  const TikhonovFactorization& fac, const ComplexMatrix& g) {
    if (g.rows() != fac.w.rows() || g.cols() != fac.w.cols())
        throw DimensionMismatch("solve_tikhonov_grad: G shape must match W");
    const Eigen::MatrixXcd mg = fac.llt.solve(Eigen::MatrixXcd(g));
    TikhonovGrads out;
    out.dt = p * mg;
    out.dp = (t - p * fac.w) * mg.adjoint() - out.dt * fac.w.adjoint();
    return out;
}

TikhonovGrads solve_tikhonov_grad(const ComplexMatrix& p, const ComplexMatrix& t, double alpha,
                                  const ComplexMatrix& w, const ComplexMatrix& g) {
    if (p.rows() != t.rows())
        throw DimensionMismatch("solve_tikhonov_grad: P and T row counts differ");
    TikhonovFactorization fac;
    fac.llt.compute(normal_matrix(p, alpha));
    if (fac.llt.info() != Eigen::Success)
        throw SingularSystem("solve_tikhonov_grad: normal matrix factorization failed");
    fac.w = w;
    return solve_tikhonov_grad(p, t, fac, g);
}

double normal_matrix_min_eigenvalue(const ComplexMatrix& p, double alpha) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(normal_matrix(p, alpha),
                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace dmri::num
