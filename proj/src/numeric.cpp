// Apache License, Version 2.0, refer to LICENSE.txt
#include "rome/numeric.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "rome/random.hpp"

namespace rome {

namespace {
constexpr Real kInf = std::numeric_limits<Real>::infinity();
constexpr Real kLog2Pi = 1.8378770664093454836;
}  // namespace

Real log_add_exp(Real a, Real b) {
  if (a < b) std::swap(a, b);
  if (a == -kInf) return -kInf;  // both
  if (a == kInf) return kInf;
  const Real d = b - a;
  if (d < -745.0) return a;
  return a + std::log1p(std::exp(d));
}

Real log_sum_exp(const ArrayX& v) {
  Real acc = -kInf;
  for (Index i = 0; i < v.size(); ++i) acc = log_add_exp(acc, v(i));
  return acc;
}

Real unit_ball_log_volume(int m) {
  return 0.5 * m * std::log(std::numbers::pi_v<Real>) -
         std::lgamma(0.5 * m + 1.0);
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
Real beta_cf(Real a, Real b, Real x) {
  constexpr int kMaxIter = 300;
  constexpr Real kEps = std::numeric_limits<Real>::epsilon();
  constexpr Real kTiny = 1e-300;

  const Real qab = a + b;
  const Real qap = a + 1.0;
  const Real qam = a - 1.0;
  Real c = 1.0;
  Real d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  Real h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const Real m2 = 2.0 * m;
    Real aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const Real del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

Real regularized_incomplete_beta(Real a, Real b, Real x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const Real ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                        a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(ln_front) * beta_cf(a, b, x) / a;
  }
  return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b;
}

Real student_t_sf(Real t, Real dof) {
  const Real x = dof / (dof + t * t);
  const Real tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, x);
  return t >= 0.0 ? tail : 1.0 - tail;
}

Real mvn_log_pdf(const RowVector& x, const RowVector& mean,
                 const Eigen::LLT<Matrix>& chol) {
  const Index m = x.size();
  const Vector diff = (x - mean).transpose();
  const Vector y = chol.matrixL().solve(diff);
  const Real log_det =
      2.0 * chol.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (m * kLog2Pi + log_det + y.squaredNorm());
}

std::uint64_t content_hash(const Matrix& values) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto absorb = [&h](std::uint64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (v >> (8 * byte)) & 0xffull;
      h *= 0x100000001b3ull;
    }
  };
  absorb(static_cast<std::uint64_t>(values.rows()));
  absorb(static_cast<std::uint64_t>(values.cols()));
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      std::uint64_t bits;
      const Real v = values(i, j);
      std::memcpy(&bits, &v, sizeof(bits));
      absorb(bits);
    }
  }
  return h;
}

}  // namespace rome
