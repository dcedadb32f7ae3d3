#pragma once

#include "perf/volume.hpp"

#include <cstdint>
#include <vector>

namespace perf {

/// Per-angle 2D magnitude images of a variable flip angle acquisition.
struct VfaSeries {
    int nx = 0;
    int ny = 0;
    std::vector<double> angles_deg{2, 5, 10, 15, 20, 30};
    double tr = 0.006;
    std::vector<std::vector<float>> images; // one nx*ny image per angle

    void validate() const;
};

struct DceConfig {
    double r1 = 4.5; // 1/(s mM)
    double dynamic_angle = 10.0;
    int baseline_frames = 5;
    double tr = 0.006;

    void validate() const;
};

struct PatlakFit {
    double ktrans = 0.0; // 1/min
    double vp = 0.0;
    double residual = 0.0;
};

/// Spoiled gradient echo: S = M sin(a) (1 - E) / (1 - E cos(a)), E = exp(-TR / T1).
double spgr_signal(double m, double t1, double angle_deg, double tr);

struct T1Fit {
    double m = 0.0;
    double t1 = 0.0;
    bool ok = false;
};

/// DESPOT1 linear estimate refined by Levenberg-Marquardt (<= 50 iterations).
T1Fit fit_t1_voxel(std::vector<double> const &signal, std::vector<double> const &angles_deg, double tr);

struct T1Maps {
    ParameterMap t1;
    ParameterMap m;
    std::vector<double> t1_values; // double-precision copies used downstream
    std::vector<double> m_values;
    std::size_t flagged = 0;
};

T1Maps fit_t1_vfa(VfaSeries const &vfa);

struct DceConcentration {
    TimeCurve c;
    std::size_t clamped = 0;     // samples whose E left (0, 1)
    bool baseline_mismatch = false; // baseline signal more than 20% off the (m, T1_0) prediction
};

/*
 * Inverts the SPGR equation per sample, E = (S - m sin a) / (S cos a - m sin a),
 * T1(t) = -TR / ln E, then C = (1/r1)(1/T1(t) - 1/T1_0).
 */
DceConcentration dynamic_signal_to_concentration(TimeCurve const &S, double m, double t1_0, DceConfig const &cfg);

/// Running trapezoid integral, int_0^{t_i} c(t) dt in seconds.
std::vector<double> cumulative_trapezoid(TimeCurve const &c);

/// Ct = vp Cp + (Ktrans / 60) int Cp dt, solved through the 2x2 normal equations; clamped afterwards.
PatlakFit patlak_fit(TimeCurve const &ct, TimeCurve const &cp);

struct DceMaps {
    ParameterMap ktrans;
    ParameterMap vp;
    ParameterMap t1;
    ParameterMap m;
    std::size_t flagged_voxels = 0;
    std::size_t clamped_samples = 0;
    std::size_t baseline_warnings = 0;
};

/// Region-mean plasma concentration.
TimeCurve dce_arterial_input(ImageSeries const &series, T1Maps const &t1, std::vector<std::uint8_t> const &region,
                             DceConfig const &cfg);

DceMaps compute_dce_maps(ImageSeries const &series, VfaSeries const &vfa, std::vector<std::uint8_t> const &aif_region,
                         DceConfig const &cfg);

} // namespace perf
