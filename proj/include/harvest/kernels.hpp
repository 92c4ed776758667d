#pragma once

#include "harvest/quadrature.hpp"
#include "harvest/types.hpp"

namespace harvest {

void validate(const TargetFieldSpec& f);

double omega_k(double k, const TargetFieldSpec& f);

// |χ̃(Ω+ω)|², shares its implementation with switching_fourier_sq.
double local_time_kernel(double Omega, double omega, const SwitchingSpec& s);

// Time-ordered kernel J(Ω,ω;T) = ∫∫dt dt' ζζ' e^{iΩ(t+t')} e^{-iω|t-t'|}.
// Uses the Dawson closed form when enabled and self-checked, else the
// [0,8T] v-quadrature.
cplx feynman_time_kernel(double Omega, double omega, const SwitchingSpec& s,
                         const QuadratureSettings& q);

// Always the quadrature path; error estimate returned.
QuadResult<cplx> feynman_time_kernel_quadrature(double Omega, double omega, const SwitchingSpec& s,
                                                const QuadratureSettings& q);

// θ-free symmetrized counterpart (real part of the v-integral).
cplx symmetric_time_kernel(double Omega, double omega, const SwitchingSpec& s);

// Dawson integral D(x) = e^{-x²}∫_0^x e^{t²}dt.
double dawson(double x);

// True once the closed form passed its self-check (runs it on first call).
bool closed_form_kernel_verified();

}  // namespace harvest
