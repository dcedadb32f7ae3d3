#pragma once

#include "perf/volume.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace perf {

struct DscConfig {
    double te = 0.030;
    int baseline_frames = 8;
    double svd_threshold = 0.10; // fraction of the largest singular value
    int pad_factor = 2;

    void validate() const;
};

/// C(t) = k (t - t0)^a exp(-(t - t0) / b) for t > t0, else 0.
struct GammaVariateFit {
    double k_scale = 0.0;
    double t0 = 0.0;
    double a = 1.0;
    double b = 1.0;
    double residual = 0.0; // sum of squares over the fitted samples
    int iterations = 0;

    double operator()(double t) const;
    TimeCurve sample(std::size_t n, double dt) const;
};

struct DscMaps {
    ParameterMap cbf;
    ParameterMap cbv;
    ParameterMap mtt;
    std::size_t invalid_voxels = 0; // non-positive baseline, set to 0
};

/// C(t) = -(1/TE) ln(S(t) / S0), S0 the baseline mean; S floored at 1e-6 S0.
TimeCurve signal_to_concentration(TimeCurve const &S, DscConfig const &cfg);

/*
 * Levenberg-Marquardt fit of the gamma variate to samples before twice the
 * peak time. Throws "AIF peak not found" without a clear peak and reports
 * the residual when 200 iterations are not enough.
 */
GammaVariateFit fit_gamma_variate(TimeCurve const &C);

/*
 * Block-circulant truncated SVD deconvolution. The convolution matrix is the
 * (pad_factor T) circulant of dt Ca with its first column halved, i.e. the
 * trapezoid rule for int Ca(tau) R(t - tau) dtau. The pseudo-inverse is
 * built once and reused for every tissue curve.
 */
class CsvdDeconvolver {
public:
    CsvdDeconvolver(TimeCurve const &ca, DscConfig const &cfg);

    /// k(t) = CBF R(t), T samples.
    TimeCurve apply(TimeCurve const &ct) const;
    std::size_t kept_singular_values() const { return kept_; }

private:
    std::size_t n_;
    std::size_t padded_;
    double dt_;
    Eigen::MatrixXd pinv_;
    std::size_t kept_ = 0;
};

TimeCurve csvd_deconvolve(TimeCurve const &ct, TimeCurve const &ca, DscConfig const &cfg);

/// Mean concentration over the region, fitted by a gamma variate and resampled on the series grid.
TimeCurve dsc_arterial_input(ImageSeries const &series, std::vector<std::uint8_t> const &region, DscConfig const &cfg,
                             GammaVariateFit *fit = nullptr);

/*
 * Per voxel: CBF = max k(t), CBV = sum Ct / sum Ca, MTT = CBV / CBF
 * (0 where CBF <= 1e-6). Region is an nx*ny mask.
 */
DscMaps compute_dsc_maps(ImageSeries const &series, std::vector<std::uint8_t> const &aif_region, DscConfig const &cfg);

} // namespace perf
