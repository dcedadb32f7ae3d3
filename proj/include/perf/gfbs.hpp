#pragma once

#include "perf/prox_dtv.hpp"
#include "perf/prox_nlm.hpp"
#include "perf/sampler.hpp"
#include "perf/volume.hpp"

#include <optional>
#include <string>
#include <vector>

namespace perf {

struct GfbsConfig {
    double w1 = 0.7;
    double w2 = 0.3;
    double alpha0 = 0.9;
    double gamma = 1.0;
    int max_iters = 50;
    double rel_tol = 1e-6;
    bool adaptive = true; // false keeps alpha_k = alpha0
    bool concurrent_prox = true;
    DtvConfig dtv;
    NlmConfig nlm;

    void validate() const;
};

enum class StopReason { Tolerance, MaxIters };

std::string to_string(StopReason r);

struct IterationRecord {
    int iter = 0;
    double objective = 0.0;
    double rmse = 0.0; // NaN without truth
    double psnr = 0.0;
    double alpha = 0.0;
};

struct ReconHistory {
    std::vector<IterationRecord> records;
    StopReason stop = StopReason::MaxIters;
    int iterations = 0;

    void write_csv(std::string const &path) const;
};

struct ReconState {
    WorkSeries z1;
    WorkSeries z2;
    WorkSeries x;
    int k = 0;
    double alpha_k = 1.0;
    ReferenceImage xbar;
    ReconHistory history;
};

/// grad f = F_u^H (F_u x - Y)
WorkSeries data_gradient(WorkSeries const &x, WorkSeries const &y, Encoder const &enc);
ImageSeries data_gradient(ImageSeries const &x, KSpaceSeries const &y, SamplingMask const &mask);

ReferenceImage temporal_mean(WorkSeries const &x);

/// Zero-filled image of a single-frame measurement (the densified frame-0 data).
ReferenceImage zero_filled_reference(KSpaceSeries const &y0);

/// k = 0: the bootstrap image; afterwards the temporal mean of state.x.
ReferenceImage update_reference(ReconState const &state, ReferenceImage const &bootstrap);

/*
 * Over-relaxation schedule: alpha_k = 1 - (1 - alpha0)(1 - (t_{k-1} - 1) / t_k)
 * with the FISTA sequence t_0 = 1, t_k = (1 + sqrt(1 + 4 t_{k-1}^2)) / 2.
 * alpha_1 = alpha0, nondecreasing, tends to 1.
 */
double adaptive_alpha(int k, double alpha0);

/// 0.5 ||F_u x - Y||^2 + lambda1 sum_t TV(x_t - xbar) + lambda2 R_NL(x)
double gfbs_objective(WorkSeries const &x, WorkSeries const &y, Encoder const &enc, GfbsConfig const &cfg,
                      ReferenceImage const &xbar, double h);

struct ReconInputs {
    std::optional<ImageSeries> truth;
    /// Densified frame-0 k-space (t = 1) for the reference bootstrap. Absent: zero-filled frame 0 of y.
    std::optional<KSpaceSeries> reference_kspace;
};

struct ReconResult {
    ImageSeries image;
    ReconHistory history;
};

/*
 * Generalized forward-backward splitting with two proximal maps:
 *   u_i = 2x - z_i - gamma grad f(x)
 *   z_i <- z_i + alpha_k (prox_{gamma lambda_i / w_i R_i}(u_i) - x)
 *   x   <- w1 z1 + w2 z2
 * R_1 is the dynamic TV (denoising form), R_2 the nonlocal term.
 */
ReconResult reconstruct(KSpaceSeries const &y, SamplingMask const &mask, GfbsConfig const &cfg,
                        ReconInputs const &inputs = {});

} // namespace perf
