#pragma once

#include <Eigen/Dense>

#include "harvest/quadrature.hpp"
#include "harvest/types.hpp"

namespace harvest {

struct HarvestingResult {
  double L_AA = 0.0, L_BB = 0.0;
  cplx L_AB, K_A, K_B, M;
  double negativity = 0.0;
  double comm_estimate = 0.0;
  double comm_ratio = 0.0;  // comm_estimate / |M|, 0 when M = 0
  double err_L_AA = 0.0, err_L_BB = 0.0, err_L_AB = 0.0;
  double err_K_A = 0.0, err_K_B = 0.0, err_M = 0.0, err_comm = 0.0;
  bool converged = true;
  double worst_ratio = 0.0;  // max error/target over components
  long evaluations = 0;
};

// 9x9 state in the basis |n_A n_B> = (00,01,02,10,11,12,20,21,22).
struct DetectorPairState {
  Eigen::Matrix<cplx, 9, 9> rho = Eigen::Matrix<cplx, 9, 9>::Zero();
};

// Single-detector leading-order state in the basis (0,1,2).
struct DetectorState {
  Eigen::Matrix3cd rho = Eigen::Matrix3cd::Zero();
};

// All scalars in one radial pass. Never throws on non-convergence; check
// `converged`. Throws GapMismatch / InvalidArgument on bad pairs.
HarvestingResult harvest(const DetectorSpec& dA, const DetectorSpec& dB, const TargetFieldSpec& f,
                         const QuadratureSettings& q);

// The single-quantity operations throw ToleranceNotMet when the
// quadrature misses its target.
QuadResult<cplx> compute_L(const DetectorSpec& dI, const DetectorSpec& dJ, const TargetFieldSpec& f,
                           const QuadratureSettings& q);
QuadResult<cplx> compute_M(const DetectorSpec& dA, const DetectorSpec& dB, const TargetFieldSpec& f,
                           const QuadratureSettings& q);
QuadResult<cplx> compute_K(const DetectorSpec& d, const TargetFieldSpec& f, const QuadratureSettings& q);

struct CommEstimate {
  double value = 0.0;
  double ratio = 0.0;
  double error = 0.0;
};
CommEstimate communication_estimate(const DetectorSpec& dA, const DetectorSpec& dB,
                                    const TargetFieldSpec& f, const QuadratureSettings& q);

DetectorPairState assemble_rho(const HarvestingResult& r);
DetectorState single_detector_state(double L, cplx K);

double negativity_closed(double L_AA, double L_BB, cplx M);
double negativity_from_rho(const DetectorPairState& s);

// Partial transpose on B of a 9x9 operator.
Eigen::Matrix<cplx, 9, 9> partial_transpose_B(const Eigen::Matrix<cplx, 9, 9>& m);

}  // namespace harvest
