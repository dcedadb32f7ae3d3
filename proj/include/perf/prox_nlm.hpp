#pragma once

#include "perf/sampler.hpp"
#include "perf/volume.hpp"

namespace perf {

struct NlmConfig {
    int search = 7;         // cubic search window edge (x, y, t)
    int patch = 5;          // cubic patch edge
    double h = 0.0;         // decay; <= 0 means h_factor * estimate_sigma(input)
    double h_factor = 0.2;
    int block_step = 2;     // lattice stride of block centers
    int pocs_iters = 3;
    double lambda2 = 0.25;  // relaxation alpha = 2 * lambda2

    double alpha() const { return 2.0 * lambda2; }
    void validate() const;
};

/*
 * Robust noise level from in-plane residuals of the magnitude,
 * eps = u - median3x3(u), sigma = 1.158 * 1.4826 MAD(eps). Floored at 1e-6.
 */
double estimate_sigma(WorkSeries const &x);
double estimate_sigma(ImageSeries const &x);

/*
 * Squared Euclidean distance between the patches centered at p and q. Offsets
 * falling outside the volume for either patch are skipped and the sum is
 * rescaled to the full patch size.
 */
double patch_distance(WorkSeries const &x, int px, int py, int pt, int qx, int qy, int qt, int patch);

/*
 * Blockwise 3D nonlocal means. Block centers sit on a stride-block_step
 * lattice; each center's weights phi(p, q) = exp(-D(p, q) / h^2) over its
 * (clipped) search window produce an estimate for the whole block of radius
 * block_step / 2, and overlapping block estimates are averaged. With
 * block_step = 1 the block is the center voxel alone, which is the plain
 * per-voxel filter.
 */
WorkSeries nlm_filter_3d(WorkSeries const &x, NlmConfig const &cfg, double h);
ImageSeries nlm_filter_3d(ImageSeries const &x, NlmConfig const &cfg);

/// Resolves cfg.h, deriving it from the noise estimate of x when unset.
double resolve_h(WorkSeries const &x, NlmConfig const &cfg);

/*
 * POCS for the nonlocal subproblem in k-space form: data-consistency
 * projection, NLM of the projection with freshly estimated h, then
 * X <- X + alpha (X_nlm - X).
 */
WorkSeries prox_nlm_pocs(WorkSeries const &y, Encoder const &enc, WorkSeries const &x0, NlmConfig const &cfg);
ImageSeries prox_nlm_pocs(KSpaceSeries const &y, SamplingMask const &mask, ImageSeries const &x0,
                          NlmConfig const &cfg);

/*
 * Same iteration with identity encoding: every projection returns u, so the
 * iterate approaches NLM(u) geometrically at rate (1 - alpha).
 */
WorkSeries prox_nlm_denoise(WorkSeries const &u, NlmConfig const &cfg, double alpha, double *h_used = nullptr);

/// sum_p sum_q phi(p, q) D(p, q) over lattice centers p (stride block_step).
double nonlocal_penalty(WorkSeries const &x, NlmConfig const &cfg, double h);

} // namespace perf
