#include "perf/kinetics_dce.hpp"

#include "perf/parallel.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace perf {

namespace {

double rad(double deg) { return deg * std::numbers::pi / 180.0; }

constexpr double kEps = 1e-12;

} // namespace

void VfaSeries::validate() const {
    if (nx < 1 || ny < 1) {
        throw std::invalid_argument("VFA: empty grid");
    }
    if (std::set<double>(angles_deg.begin(), angles_deg.end()).size() < 3) {
        throw std::invalid_argument("VFA: need at least 3 distinct flip angles");
    }
    for (double a : angles_deg) {
        if (!(a > 0.0 && a <= 90.0)) {
            throw std::invalid_argument("VFA: flip angles must lie in (0, 90] degrees");
        }
    }
    if (!(tr > 0.0)) {
        throw std::invalid_argument("VFA: TR must be positive");
    }
    if (images.size() != angles_deg.size()) {
        throw std::invalid_argument("VFA: one image per angle required");
    }
    for (auto const &im : images) {
        if (im.size() != static_cast<std::size_t>(nx) * ny) {
            throw std::invalid_argument("VFA: image size mismatch");
        }
    }
}

void DceConfig::validate() const {
    if (!(r1 > 0.0)) {
        throw std::invalid_argument("r1 must be positive");
    }
    if (!(dynamic_angle > 0.0 && dynamic_angle <= 90.0) || !(tr > 0.0) || baseline_frames < 1) {
        throw std::invalid_argument("invalid DCE acquisition parameters");
    }
}

double spgr_signal(double m, double t1, double angle_deg, double tr) {
    double const a = rad(angle_deg);
    double const e = std::exp(-tr / t1);
    return m * std::sin(a) * (1.0 - e) / (1.0 - e * std::cos(a));
}

namespace {

struct SpgrFunctor : Eigen::DenseFunctor<double> {
    std::vector<double> const &s;
    std::vector<double> sin_a;
    std::vector<double> cos_a;
    double tr;

    SpgrFunctor(std::vector<double> const &signal, std::vector<double> const &angles, double tr_)
        : Eigen::DenseFunctor<double>(2, static_cast<int>(signal.size())), s(signal), tr(tr_) {
        for (double a : angles) {
            sin_a.push_back(std::sin(rad(a)));
            cos_a.push_back(std::cos(rad(a)));
        }
    }

    int operator()(InputType const &p, ValueType &f) const {
        double const e = std::exp(-tr / p[1]);
        for (std::size_t i = 0; i < s.size(); ++i) {
            f[static_cast<Eigen::Index>(i)] = p[0] * sin_a[i] * (1.0 - e) / (1.0 - e * cos_a[i]) - s[i];
        }
        return 0;
    }

    int df(InputType const &p, JacobianType &J) const {
        double const e = std::exp(-tr / p[1]);
        double const de = e * tr / (p[1] * p[1]);
        for (std::size_t i = 0; i < s.size(); ++i) {
            auto const r = static_cast<Eigen::Index>(i);
            double const den = 1.0 - e * cos_a[i];
            J(r, 0) = sin_a[i] * (1.0 - e) / den;
            J(r, 1) = p[0] * sin_a[i] * (cos_a[i] - 1.0) / (den * den) * de;
        }
        return 0;
    }
};

} // namespace

T1Fit fit_t1_voxel(std::vector<double> const &signal, std::vector<double> const &angles_deg, double tr) {
    auto const n = signal.size();
    if (n != angles_deg.size() || n < 3) {
        throw std::invalid_argument("VFA: signal/angle count mismatch");
    }
    if (std::all_of(signal.begin(), signal.end(), [](double v) { return v <= 0.0; })) {
        return {};
    }
    // S / sin a = E (S / tan a) + M (1 - E)
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double const a = rad(angles_deg[i]);
        double const x = signal[i] / std::tan(a);
        double const y = signal[i] / std::sin(a);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double const dn = static_cast<double>(n);
    double const det = dn * sxx - sx * sx;
    if (std::abs(det) < kEps * std::max(1.0, sxx * dn)) {
        return {};
    }
    double const e = (dn * sxy - sx * sy) / det;
    double const icpt = (sy - e * sx) / dn;
    if (!(e > 0.0 && e < 1.0)) {
        return {};
    }
    Eigen::VectorXd p(2);
    p << icpt / (1.0 - e), -tr / std::log(e);

    SpgrFunctor functor(signal, angles_deg, tr);
    Eigen::LevenbergMarquardt<SpgrFunctor> lm(functor);
    lm.setXtol(1e-10);
    lm.setFtol(1e-10);
    auto status = lm.minimizeInit(p);
    for (int it = 0; it < 50 && status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters; ++it) {
        status = lm.minimizeOneStep(p);
        if (status != Eigen::LevenbergMarquardtSpace::Running) {
            break;
        }
    }
    if (!p.allFinite() || !(p[0] > 0.0) || !(p[1] > 0.0)) {
        return {};
    }
    return {p[0], p[1], true};
}

T1Maps fit_t1_vfa(VfaSeries const &vfa) {
    vfa.validate();
    auto const nvox = static_cast<std::size_t>(vfa.nx) * vfa.ny;
    T1Maps maps{ParameterMap(vfa.nx, vfa.ny, MapKind::T1, "s"), ParameterMap(vfa.nx, vfa.ny, MapKind::M, "a.u."),
                std::vector<double>(nvox, 0.0), std::vector<double>(nvox, 0.0), 0};
    std::vector<std::uint8_t> flagged(nvox, 0);
    parallel_for(nvox, [&](std::size_t v) {
        std::vector<double> s;
        s.reserve(vfa.images.size());
        for (auto const &im : vfa.images) {
            s.push_back(im[v]);
        }
        auto const fit = fit_t1_voxel(s, vfa.angles_deg, vfa.tr);
        if (!fit.ok) {
            flagged[v] = 1;
            return;
        }
        maps.t1_values[v] = fit.t1;
        maps.m_values[v] = fit.m;
        maps.t1.data[v] = static_cast<float>(fit.t1);
        maps.m.data[v] = static_cast<float>(fit.m);
    });
    maps.flagged = static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), std::uint8_t{1}));
    return maps;
}

DceConcentration dynamic_signal_to_concentration(TimeCurve const &S, double m, double t1_0, DceConfig const &cfg) {
    cfg.validate();
    if (!(m > 0.0) || !(t1_0 > 0.0)) {
        throw std::invalid_argument("m and T1_0 must be positive");
    }
    double const a = rad(cfg.dynamic_angle);
    double const sa = std::sin(a);
    double const ca = std::cos(a);
    DceConcentration out;
    out.c.dt = S.dt;
    out.c.values.resize(S.size());

    auto const nb = std::min<std::size_t>(static_cast<std::size_t>(cfg.baseline_frames), S.size());
    double base = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
        base += S.values[i];
    }
    base /= static_cast<double>(nb);
    double const expected = spgr_signal(m, t1_0, cfg.dynamic_angle, cfg.tr);
    out.baseline_mismatch = std::abs(base - expected) > 0.2 * expected;

    constexpr double lo = 1e-12;
    constexpr double hi = 1.0 - 1e-12;
    for (std::size_t i = 0; i < S.size(); ++i) {
        double e = (S.values[i] - m * sa) / (S.values[i] * ca - m * sa);
        if (!(e > lo && e < hi)) {
            e = std::isnan(e) ? hi : std::clamp(e, lo, hi);
            ++out.clamped;
        }
        double const t1 = -cfg.tr / std::log(e);
        out.c.values[i] = (1.0 / t1 - 1.0 / t1_0) / cfg.r1;
    }
    return out;
}

std::vector<double> cumulative_trapezoid(TimeCurve const &c) {
    std::vector<double> out(c.size(), 0.0);
    for (std::size_t i = 1; i < c.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * c.dt * (c.values[i - 1] + c.values[i]);
    }
    return out;
}

PatlakFit patlak_fit(TimeCurve const &ct, TimeCurve const &cp) {
    if (ct.size() != cp.size() || std::abs(ct.dt - cp.dt) > 1e-12 * cp.dt) {
        throw std::invalid_argument("tissue and plasma curves must share the time grid");
    }
    auto const integral = cumulative_trapezoid(cp);
    // Regressors: x1 = Cp, x2 = int Cp / 60 so the slope is per minute.
    double s11 = 0.0, s12 = 0.0, s22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < ct.size(); ++i) {
        double const x1 = cp.values[i];
        double const x2 = integral[i] / 60.0;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        b1 += x1 * ct.values[i];
        b2 += x2 * ct.values[i];
    }
    double const det = s11 * s22 - s12 * s12;
    if (!(s11 > 0.0) || !(std::abs(det) > 1e-12 * s11 * s22)) {
        throw std::invalid_argument("degenerate AIF");
    }
    PatlakFit fit;
    fit.vp = (s22 * b1 - s12 * b2) / det;
    fit.ktrans = (s11 * b2 - s12 * b1) / det;
    double ss = 0.0;
    for (std::size_t i = 0; i < ct.size(); ++i) {
        double const r = fit.vp * cp.values[i] + fit.ktrans * integral[i] / 60.0 - ct.values[i];
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(ct.size()));
    fit.vp = std::clamp(fit.vp, 0.0, 1.0);
    fit.ktrans = std::max(fit.ktrans, 0.0);
    return fit;
}

namespace {

TimeCurve voxel_signal(ImageSeries const &series, std::size_t voxel) {
    std::vector<double> s(static_cast<std::size_t>(series.t()));
    auto const fs = series.shape().frame_size();
    for (int f = 0; f < series.t(); ++f) {
        s[static_cast<std::size_t>(f)] = std::abs(std::complex<double>(series.data()[f * fs + voxel]));
    }
    return {std::move(s), series.dt()};
}

} // namespace

TimeCurve dce_arterial_input(ImageSeries const &series, T1Maps const &t1, std::vector<std::uint8_t> const &region,
                             DceConfig const &cfg) {
    if (region.size() != series.shape().frame_size()) {
        throw std::invalid_argument("AIF region does not match the image grid");
    }
    std::vector<double> mean(static_cast<std::size_t>(series.t()), 0.0);
    std::size_t n = 0;
    for (std::size_t v = 0; v < region.size(); ++v) {
        if (region[v] == 0 || !(t1.t1_values[v] > 0.0)) {
            continue;
        }
        auto const c = dynamic_signal_to_concentration(voxel_signal(series, v), t1.m_values[v], t1.t1_values[v], cfg);
        for (std::size_t i = 0; i < mean.size(); ++i) {
            mean[i] += c.c.values[i];
        }
        ++n;
    }
    if (n == 0) {
        throw std::invalid_argument("AIF region is empty or has no valid T1");
    }
    for (auto &m : mean) {
        m /= static_cast<double>(n);
    }
    return {std::move(mean), series.dt()};
}

DceMaps compute_dce_maps(ImageSeries const &series, VfaSeries const &vfa, std::vector<std::uint8_t> const &aif_region,
                         DceConfig const &cfg) {
    cfg.validate();
    if (vfa.nx != series.nx() || vfa.ny != series.ny()) {
        throw std::invalid_argument("VFA and dynamic series geometry differ");
    }
    auto t1 = fit_t1_vfa(vfa);
    auto const cp = dce_arterial_input(series, t1, aif_region, cfg);
    int const nx = series.nx();
    int const ny = series.ny();
    DceMaps maps{ParameterMap(nx, ny, MapKind::KTRANS, "1/min"), ParameterMap(nx, ny, MapKind::VP, "fraction"),
                 t1.t1, t1.m, t1.flagged, 0, 0};
    auto const nvox = series.shape().frame_size();
    std::vector<std::size_t> clamped(nvox, 0);
    std::vector<std::uint8_t> warn(nvox, 0);
    parallel_for(nvox, [&](std::size_t v) {
        if (!(t1.t1_values[v] > 0.0) || !(t1.m_values[v] > 0.0)) {
            return;
        }
        auto const c = dynamic_signal_to_concentration(voxel_signal(series, v), t1.m_values[v], t1.t1_values[v], cfg);
        clamped[v] = c.clamped;
        warn[v] = c.baseline_mismatch ? 1 : 0;
        auto const fit = patlak_fit(c.c, cp);
        maps.ktrans.data[v] = static_cast<float>(fit.ktrans);
        maps.vp.data[v] = static_cast<float>(fit.vp);
    });
    for (std::size_t v = 0; v < nvox; ++v) {
        maps.clamped_samples += clamped[v];
        maps.baseline_warnings += warn[v];
    }
    return maps;
}

} // namespace perf
