#pragma once

#include "perf/volume.hpp"

namespace perf {

/*
 * Unitary 2D DFT of one nx*ny frame (x fastest), scaled by 1/sqrt(nx*ny) in
 * both directions. Backed by FFTW with cached FFTW_ESTIMATE plans, which keeps
 * results bit-stable across runs.
 */
void fft2(Eigen::Ref<Eigen::VectorXcd const> in, Eigen::Ref<Eigen::VectorXcd> out, int nx, int ny);
void ifft2(Eigen::Ref<Eigen::VectorXcd const> in, Eigen::Ref<Eigen::VectorXcd> out, int nx, int ny);

Eigen::VectorXcd fft2(Eigen::VectorXcd const &in, int nx, int ny);
Eigen::VectorXcd ifft2(Eigen::VectorXcd const &in, int nx, int ny);

} // namespace perf
