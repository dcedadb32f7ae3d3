#pragma once

#include "perf/kinetics_dce.hpp"
#include "perf/kinetics_dsc.hpp"
#include "perf/volume.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace perf {

enum class Tissue : std::uint8_t { Background = 0, WM = 1, GM = 2, Vessel = 3, Tumor = 4 };

std::string to_string(Tissue t);
Tissue parse_tissue(std::string const &s);

enum class PhantomMode { DSC, DCE };

/// Ellipse in normalized coordinates: the grid spans [-1, 1] on both axes.
struct Ellipse {
    double cx = 0.0;
    double cy = 0.0;
    double rx = 0.5;
    double ry = 0.5;
};

struct LabelSpec {
    Tissue tissue = Tissue::Background;
    Ellipse shape;
    double s0 = 1.0;     // DSC baseline signal
    double cbf = 0.0;    // DSC
    double mtt = 1.0;    // DSC, s
    double vp = 0.0;     // DCE
    double ktrans = 0.0; // DCE, 1/min
    double t1_0 = 1.4;   // DCE, s
    double m = 1.0;      // DCE equilibrium magnetization
};

struct PhantomSpec {
    int nx = 32;
    int ny = 32;
    int t = 24;
    double dt = 1.5;
    PhantomMode mode = PhantomMode::DSC;
    /// Painted in order; later labels overwrite earlier ones.
    std::vector<LabelSpec> labels;
    GammaVariateFit aif;        // concentration units (DSC: 1/s via TE, DCE: mM)
    double te = 0.030;          // DSC
    DceConfig dce;              // DCE acquisition (dynamic angle, TR, r1)
    std::vector<double> vfa_angles{2, 5, 10, 15, 20, 30};
    int frame_average = 1;      // DCE: average this many sub-frames per output frame
    double noise_sigma = 0.0;   // real Gaussian noise added to the signal
    std::uint64_t seed = 1;

    void validate() const;
};

/// 32x32x24 DSC phantom at dt = 1.5 s.
PhantomSpec default_dsc_spec();
/// 32x32x20 DCE phantom at dt = 1.5 s.
PhantomSpec default_dce_spec();

PhantomSpec phantom_spec_from_json(nlohmann::json const &j);
nlohmann::json to_json(PhantomSpec const &s);

struct Phantom {
    ImageSeries series;
    std::vector<ParameterMap> truth_maps; // DSC: CBF, CBV, MTT; DCE: KTRANS, VP, T1, M
    std::vector<std::uint8_t> aif_region; // nx*ny
    std::vector<Tissue> labels;           // nx*ny
    TimeCurve aif;                        // arterial concentration on the output grid
    std::optional<VfaSeries> vfa;         // DCE only
    double scale = 1.0;                   // signal normalization applied (peak magnitude -> 1)
};

std::vector<Tissue> label_map(PhantomSpec const &spec);

/*
 * Ct_i = CBF dt sum_j w_j Ca_{i-j} R(t_j), R(t) = exp(-t / MTT), trapezoid
 * weights (1/2 at both ends).
 */
TimeCurve dsc_tissue_curve(TimeCurve const &ca, double cbf, double mtt);

/// Ct = vp Cp + (Ktrans / 60) int Cp dt
TimeCurve dce_tissue_curve(TimeCurve const &cp, double vp, double ktrans);

Phantom generate(PhantomSpec const &spec);

} // namespace perf
