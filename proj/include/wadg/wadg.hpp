#pragma once

#include "wadg/refelem.hpp"

namespace wadg {

/// Core weight-adjusted primitive.  U holds per-element nodal coefficients
/// (Np x K) already premultiplied by the reference inverse mass; diag holds
/// pointwise factors at volume quadrature points (Nq x K).  Computes
/// P_q diag(.) V_q U column by column in two GEMMs and one pointwise product.
inline MatX wadg_apply(const ReferenceElement& re, const MatX& diag, const MatX& U) {
  return re.project * (diag.array() * (re.interp_vol * U).array()).matrix();
}

/// Weight-adjusted inverse of the 1/c^2-weighted mass: multiply pointwise by
/// c^2.  c2 > 0 is validated at setup via check_positive_weight.
inline MatX apply_wadg_scalar(const ReferenceElement& re, const MatX& c2, const MatX& U) {
  return wadg_apply(re, c2, U);
}

inline void check_positive_weight(const MatX& w, const char* what) {
  if (w.size() > 0 && !(w.minCoeff() > 0))
    throw std::runtime_error(std::string(what) + ": nonpositive weight at a quadrature point");
}

/// Weight-adjusted inverse of the C^{-1}-weighted block mass: pointwise 3x3
/// multiply by C at quadrature points.  C entries ordered C11,C12,C13,C22,
/// C23,C33, each Nq x K; S1..S3 are the three stress fields, Np x K each.
inline void apply_wadg_matrix(const ReferenceElement& re, const std::array<MatX, 6>& C,
                              const MatX& S1, const MatX& S2, const MatX& S3, MatX& R1,
                              MatX& R2, MatX& R3) {
  MatX q1 = re.interp_vol * S1, q2 = re.interp_vol * S2, q3 = re.interp_vol * S3;
  R1 = re.project *
       (C[0].array() * q1.array() + C[1].array() * q2.array() + C[2].array() * q3.array())
           .matrix();
  R2 = re.project *
       (C[1].array() * q1.array() + C[3].array() * q2.array() + C[4].array() * q3.array())
           .matrix();
  R3 = re.project *
       (C[2].array() * q1.array() + C[4].array() * q2.array() + C[5].array() * q3.array())
           .matrix();
}

/// Curved-element inverse-mass surrogate: M^{-1} M_{1/J} M^{-1} b, applied to
/// a premultiplied U = M^{-1} b as P_q diag(1/J) V_q U.
inline MatX apply_wadg_geometric(const ReferenceElement& re, const MatX& J, const MatX& U) {
  check_positive_weight(J, "apply_wadg_geometric");
  return wadg_apply(re, J.cwiseInverse(), U);
}

}  // namespace wadg
