#pragma once

#include "perf/volume.hpp"

#include <cstdint>

namespace perf {

struct NoiseSpec {
    double variance = 1e-10; // total complex variance sigma^2 (sigma^2/2 per component)
    std::uint64_t seed = 0;
};

/// Golden-angle increment between consecutive radial spokes, degrees.
inline constexpr double kGoldenAngleDeg = 111.246;

/*
 * Time-varying variable-density Cartesian mask: per frame ceil(ny/R) ky lines,
 * the central max(1, round(0.04 ny)) always included, the rest drawn without
 * replacement from a zero-mean Gaussian over ky (std ny/6). Frame f is seeded
 * from (seed, f). Each selected line is sampled at all kx.
 */
SamplingMask make_cartesian_vd_mask(int nx, int ny, int t, double R, std::uint64_t seed);

/*
 * Pseudo-radial mask: golden-angle spokes through the k-space center, nearest
 * neighbour rasterized. Spoke counts per frame are chosen so the running
 * sampled fraction tracks 1/R; the angle sequence continues across frames.
 */
SamplingMask make_radial_mask(int nx, int ny, int t, double R, std::uint64_t seed);

SamplingMask make_mask(SamplingScheme scheme, int nx, int ny, int t, double R, std::uint64_t seed);

/// Frame-0 mask densified to about 2-fold for the reference-image bootstrap.
SamplingMask densify_first_frame(SamplingMask const &mask);

/// y_t = A_t (F x_t + eta); noise streams are keyed by frame index.
KSpaceSeries forward_encode(ImageSeries const &x, SamplingMask const &mask, NoiseSpec const &noise);

/*
 * Frame 0 of x encoded through densify_first_frame(mask), with its own noise
 * stream. Feeds the reference-image bootstrap of the reconstruction.
 */
KSpaceSeries encode_reference_frame(ImageSeries const &x, SamplingMask const &mask, NoiseSpec const &noise);

/// Zero-filled reconstruction: per-frame inverse unitary DFT.
ImageSeries adjoint(KSpaceSeries const &y);

/*
 * Double-precision partial Fourier operator F_u = diag(A_t F). Used by the
 * solvers; the float-typed forward_encode/adjoint above wrap it.
 */
class Encoder {
public:
    Encoder(SamplingMask mask);

    Shape const &shape() const { return mask_.shape; }
    SamplingMask const &mask() const { return mask_; }

    WorkSeries forward(WorkSeries const &x) const;
    WorkSeries adjoint(WorkSeries const &y) const;
    /// F_u^H F_u x
    WorkSeries normal(WorkSeries const &x) const;

    void forward_frame(int f, Eigen::Ref<Eigen::VectorXcd const> x, Eigen::Ref<Eigen::VectorXcd> y) const;
    void adjoint_frame(int f, Eigen::Ref<Eigen::VectorXcd const> y, Eigen::Ref<Eigen::VectorXcd> x) const;
    void apply_mask(int f, Eigen::Ref<Eigen::VectorXcd> k) const;

private:
    SamplingMask mask_;
};

} // namespace perf
