// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Cholesky>

#include "rome/types.hpp"

namespace rome {

Real log_add_exp(Real a, Real b);
Real log_sum_exp(const ArrayX& v);

/// ln of the volume of the M-dimensional unit ball.
Real unit_ball_log_volume(int m);

/// I_x(a, b), evaluated with the Lentz continued fraction.
Real regularized_incomplete_beta(Real a, Real b, Real x);

/// Upper tail P(T > t) of Student's t with `dof` degrees of freedom.
Real student_t_sf(Real t, Real dof);

/// Multivariate normal log-density given a Cholesky factor of the covariance.
Real mvn_log_pdf(const RowVector& x, const RowVector& mean,
                 const Eigen::LLT<Matrix>& chol);

}  // namespace rome
