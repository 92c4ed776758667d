#pragma once

#include "harvest/types.hpp"

namespace harvest {

void validate(const SwitchingSpec& s);
void validate(const DetectorSpec& d);

// Gap Ω of a detector: the override if set, else the mode eigenfrequency.
double detector_gap(const DetectorSpec& d);

double switching_value(const SwitchingSpec& s, double t);

// |∫dt ζ(t) e^{iωt}|² = 2T² e^{-ω²T²/π}
double switching_fourier_sq(const SwitchingSpec& s, double omega);

// ∫d³x Φ_N(x) e^{-ik·x}, trap center phase included.
cplx spatial_fourier(const DetectorSpec& d, const Vec3& k);

// Same transform with the center phase removed (about the trap center for
// harmonic modes, about the box corner for boxes).
cplx spatial_fourier_local(const DetectorSpec& d, const Vec3& k);

// Per-axis transform of the unit-normalized box factor sqrt(2/d) sin(πnu/d)
// on [0,d]: ∫_0^d f_n(u) e^{-iqu} du.
cplx box_axis_fourier(int n, double d, double q);

// Per-axis transform of the unit-normalized Hermite factor about its center.
cplx harmonic_axis_fourier(int n, double ell, double q);

// True when |F̃(k)| depends on |k| only (harmonic ground mode).
bool radially_symmetric(const DetectorSpec& d);

// Radial |F̃| for radially symmetric detectors (no phase).
double radial_fourier(const DetectorSpec& d, double k);

// |k| beyond which |F̃(k)|² is negligible for the radial integrals.
double fourier_cutoff(const DetectorSpec& d);

}  // namespace harvest
