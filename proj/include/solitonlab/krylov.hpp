#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <vector>

namespace solitonlab {

template <class Vec>
struct KrylovResult {
  Vec x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// Restarted GMRES with right preconditioning, Euclidean inner product.
// A(v) and M(v) are callables returning Vec.
template <class Vec, class Op, class Prec>
KrylovResult<Vec> gmres(const Op& A, const Vec& b, const Prec& M, Vec x, double tol, int restart, int max_iter) {
  using Scalar = typename Vec::Scalar;
  using std::abs;
  using std::sqrt;
  KrylovResult<Vec> res;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x = Vec::Zero(b.size());
    res.converged = true;
    return res;
  }
  if (x.size() != b.size()) x = Vec::Zero(b.size());
  int total = 0;
  Vec r = b - A(x);
  double rnorm = r.norm();
  while (total < max_iter) {
    if (rnorm <= tol * bnorm) break;
    const int m = restart;
    std::vector<Vec> V;
    V.reserve(static_cast<std::size_t>(m) + 1);
    std::vector<Vec> Z;
    Z.reserve(static_cast<std::size_t>(m));
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> H = Eigen::Matrix<Scalar, -1, -1>::Zero(m + 1, m);
    std::vector<Scalar> cs(static_cast<std::size_t>(m)), sn(static_cast<std::size_t>(m));
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g = Eigen::Matrix<Scalar, -1, 1>::Zero(m + 1);
    g[0] = Scalar(rnorm);
    V.push_back(r / rnorm);
    int k = 0;
    for (; k < m && total < max_iter; ++k, ++total) {
      Z.push_back(M(V[static_cast<std::size_t>(k)]));
      Vec w = A(Z.back());
      for (int i = 0; i <= k; ++i) {
        H(i, k) = V[static_cast<std::size_t>(i)].dot(w);
        w -= H(i, k) * V[static_cast<std::size_t>(i)];
      }
      // second Gram-Schmidt pass keeps the basis orthogonal at tight tolerances
      for (int i = 0; i <= k; ++i) {
        const Scalar c = V[static_cast<std::size_t>(i)].dot(w);
        H(i, k) += c;
        w -= c * V[static_cast<std::size_t>(i)];
      }
      const double hn = w.norm();
      H(k + 1, k) = Scalar(hn);
      for (int i = 0; i < k; ++i) {
        const Scalar t = cs[static_cast<std::size_t>(i)] * H(i, k) + sn[static_cast<std::size_t>(i)] * H(i + 1, k);
        H(i + 1, k) = -Eigen::numext::conj(sn[static_cast<std::size_t>(i)]) * H(i, k) +
                      Eigen::numext::conj(cs[static_cast<std::size_t>(i)]) * H(i + 1, k);
        H(i, k) = t;
      }
      const Scalar a = H(k, k), bb = H(k + 1, k);
      const double den = sqrt(std::norm(a) + std::norm(bb));
      Scalar c, s;
      if (den == 0.0) {
        c = Scalar(1);
        s = Scalar(0);
      } else if (abs(a) == 0.0) {
        c = Scalar(0);
        s = Scalar(1);
      } else {
        c = Scalar(abs(a) / den);
        s = (a / Scalar(abs(a))) * Eigen::numext::conj(bb) / Scalar(den);
      }
      cs[static_cast<std::size_t>(k)] = c;
      sn[static_cast<std::size_t>(k)] = s;
      H(k, k) = c * a + s * bb;
      H(k + 1, k) = Scalar(0);
      g[k + 1] = -Eigen::numext::conj(s) * g[k];
      g[k] = c * g[k];
      if (hn > 0.0) V.push_back(w / hn);
      if (abs(g[k + 1]) <= tol * bnorm || hn == 0.0) {
        ++k;
        ++total;
        break;
      }
    }
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y =
        H.topLeftCorner(k, k).template triangularView<Eigen::Upper>().solve(g.head(k));
    for (int i = 0; i < k; ++i) x += y[i] * Z[static_cast<std::size_t>(i)];
    r = b - A(x);
    const double new_norm = r.norm();
    if (new_norm >= rnorm * (1.0 - 1e-12) && k > 0 && new_norm > tol * bnorm) {
      rnorm = new_norm;
      break;  // stagnation
    }
    rnorm = new_norm;
  }
  res.x = std::move(x);
  res.iterations = total;
  res.relative_residual = rnorm / bnorm;
  res.converged = res.relative_residual <= tol;
  return res;
}

// Preconditioned conjugate gradients for symmetric positive definite operators.
template <class Vec, class Op, class Prec>
KrylovResult<Vec> pcg(const Op& A, const Vec& b, const Prec& M, Vec x, double tol, int max_iter) {
  KrylovResult<Vec> res;
  const double bnorm = b.norm();
  if (x.size() != b.size()) x = Vec::Zero(b.size());
  if (bnorm == 0.0) {
    res.x = Vec::Zero(b.size());
    res.converged = true;
    return res;
  }
  Vec r = b - A(x);
  Vec z = M(r);
  Vec p = z;
  auto rz = r.dot(z);
  int it = 0;
  for (; it < max_iter && r.norm() > tol * bnorm; ++it) {
    const Vec Ap = A(p);
    const auto alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    z = M(r);
    const auto rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  res.x = std::move(x);
  res.iterations = it;
  res.relative_residual = (b - A(res.x)).norm() / bnorm;
  res.converged = res.relative_residual <= tol * 10.0;
  return res;
}

}  // namespace solitonlab
