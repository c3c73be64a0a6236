#pragma once

#include <Eigen/Cholesky>

#include "dmri/tensor.hpp"

namespace dmri::num {

// Ridge-regularized complex least squares
//
//   W = argmin ||P W - T||_2^2 + alpha ||W||_2^2
//
// solved through the normal equations (P^H P + alpha I) W = P^H T with a
// Cholesky factorization. alpha > 0 makes the normal matrix positive
// definite; alpha == 0 requires P to have full column rank.
ComplexMatrix solve_tikhonov(const ComplexMatrix& p, const ComplexMatrix& t, double alpha);

// Solve and keep the factorization so gradients can reuse it.
struct TikhonovFactorization {
    ComplexMatrix w;
    Eigen::LLT<Eigen::MatrixXcd> llt;  // of (P^H P + alpha I)
};
TikhonovFactorization solve_tikhonov_factored(const ComplexMatrix& p, const ComplexMatrix& t,
                                              double alpha);

// Gradients of a real scalar loss through the solve. g holds
// dL/dRe(W) + i dL/dIm(W) entrywise, and the returned dp/dt follow the same
// convention, so chaining with a real-channel tape is exact. Derivation from
// W = M P^H T with M = (P^H P + alpha I)^{-1}:
//
//   dT = P M G
//   dP = (T - P W)(M G)^H - (P M G) W^H
struct TikhonovGrads {
    ComplexMatrix dp;
    ComplexMatrix dt;
};
TikhonovGrads solve_tikhonov_grad(const ComplexMatrix& p, const ComplexMatrix& t, double alpha,
                                  const ComplexMatrix& w, const ComplexMatrix& g);

// Same, reusing a factorization from solve_tikhonov_factored.
TikhonovGrads solve_tikhonov_grad(const ComplexMatrix& p, const ComplexMatrix& t,
                                  const TikhonovFactorization& fac, const ComplexMatrix& g);

// Smallest eigenvalue of (P^H P + alpha I); conditioning diagnostic.
double normal_matrix_min_eigenvalue(const ComplexMatrix& p, double alpha);

}  // namespace dmri::num
