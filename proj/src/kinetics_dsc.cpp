#include "perf/kinetics_dsc.hpp"

#include "perf/parallel.hpp"

#include <Eigen/SVD>
#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace perf {

void DscConfig::validate() const {
    if (!(te > 0.0)) {
        throw std::invalid_argument("TE must be positive");
    }
    if (baseline_frames < 1) {
        throw std::invalid_argument("baseline_frames must be >= 1");
    }
    if (!(svd_threshold >= 0.0 && svd_threshold < 1.0)) {
        throw std::invalid_argument("svd_threshold must lie in [0, 1)");
    }
    if (pad_factor < 1) {
        throw std::invalid_argument("pad_factor must be >= 1");
    }
}

double GammaVariateFit::operator()(double t) const {
    double const tau = t - t0;
    if (tau <= 0.0) {
        return 0.0;
    }
    return k_scale * std::pow(tau, a) * std::exp(-tau / b);
}

TimeCurve GammaVariateFit::sample(std::size_t n, double dt) const {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = (*this)(static_cast<double>(i) * dt);
    }
    return {std::move(v), dt};
}

TimeCurve signal_to_concentration(TimeCurve const &S, DscConfig const &cfg) {
    cfg.validate();
    auto const nb = std::min<std::size_t>(static_cast<std::size_t>(cfg.baseline_frames), S.size());
    double s0 = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
        s0 += S.values[i];
    }
    s0 /= static_cast<double>(nb);
    if (!(s0 > 0.0)) {
        throw std::invalid_argument("invalid baseline");
    }
    std::vector<double> c(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) {
        c[i] = -std::log(std::max(S.values[i], 1e-6 * s0) / s0) / cfg.te;
    }
    return {std::move(c), S.dt};
}

namespace {

// Parameters: (ln k, t0, ln a, ln b) keep k, a, b positive without constraints.
struct GammaFunctor : Eigen::DenseFunctor<double> {
    std::vector<double> t;
    std::vector<double> y;

    GammaFunctor(std::vector<double> t_, std::vector<double> y_)
        : Eigen::DenseFunctor<double>(4, static_cast<int>(t_.size())), t(std::move(t_)), y(std::move(y_)) {}

    static GammaVariateFit unpack(InputType const &p) {
        GammaVariateFit g;
        g.k_scale = std::exp(p[0]);
        g.t0 = p[1];
        g.a = std::exp(p[2]);
        g.b = std::exp(p[3]);
        return g;
    }

    int operator()(InputType const &p, ValueType &f) const {
        auto const g = unpack(p);
        for (std::size_t i = 0; i < t.size(); ++i) {
            f[static_cast<Eigen::Index>(i)] = g(t[i]) - y[i];
        }
        return 0;
    }

    int df(InputType const &p, JacobianType &J) const {
        auto const g = unpack(p);
        for (std::size_t i = 0; i < t.size(); ++i) {
            auto const r = static_cast<Eigen::Index>(i);
            double const tau = t[i] - g.t0;
            if (tau <= 0.0) {
                J.row(r).setZero();
                continue;
            }
            double const c = g(t[i]);
            J(r, 0) = c;
            J(r, 1) = -c * (g.a / tau - 1.0 / g.b);
            J(r, 2) = g.a * c * std::log(tau);
            J(r, 3) = c * tau / g.b;
        }
        return 0;
    }
};

} // namespace

GammaVariateFit fit_gamma_variate(TimeCurve const &C) {
    auto const &v = C.values;
    auto const ipeak = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    double const peak = v[ipeak];
    if (!(peak > 0.0)) {
        throw std::runtime_error("AIF peak not found");
    }
    std::size_t i0 = 0;
    bool found_foot = false;
    for (std::size_t i = ipeak; i-- > 0;) {
        if (v[i] < 0.1 * peak) {
            i0 = i;
            found_foot = true;
            break;
        }
    }
    if (found_foot && i0 >= 1) {
        double m = 0.0;
        for (std::size_t i = 0; i <= i0; ++i) {
            m += v[i];
        }
        m /= static_cast<double>(i0 + 1);
        double ss = 0.0;
        for (std::size_t i = 0; i <= i0; ++i) {
            ss += (v[i] - m) * (v[i] - m);
        }
        double const sd = std::sqrt(ss / static_cast<double>(i0));
        if (peak <= 3.0 * sd) {
            throw std::runtime_error("AIF peak not found");
        }
    }

    double const t_peak = C.time(ipeak);
    double t0 = found_foot ? C.time(i0) : 0.0;
    if (t_peak - t0 <= 0.0) {
        t0 = t_peak - C.dt;
    }
    double const a = 3.0;
    double const b = (t_peak - t0) / a;
    double const k = peak / (std::pow(a * b, a) * std::exp(-a));

    std::vector<double> ts;
    std::vector<double> ys;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (C.time(i) < 2.0 * t_peak || ts.size() < 5) {
            ts.push_back(C.time(i));
            ys.push_back(v[i]);
        }
    }

    GammaFunctor functor(ts, ys);
    Eigen::LevenbergMarquardt<GammaFunctor> lm(functor);
    lm.setXtol(1e-14);
    lm.setFtol(1e-16);
    lm.setGtol(0.0);
    lm.setMaxfev(100000);
    Eigen::VectorXd p(4);
    p << std::log(k), t0, std::log(a), std::log(b);

    constexpr int kMaxIter = 200;
    auto status = lm.minimizeInit(p);
    int iter = 0;
    if (status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters) {
        do {
            status = lm.minimizeOneStep(p);
            ++iter;
        } while (status == Eigen::LevenbergMarquardtSpace::Running && iter < kMaxIter);
    }
    auto g = GammaFunctor::unpack(p);
    Eigen::VectorXd f(static_cast<Eigen::Index>(ts.size()));
    functor(p, f);
    g.residual = f.squaredNorm();
    g.iterations = iter;
    if (status == Eigen::LevenbergMarquardtSpace::Running || !std::isfinite(g.residual) ||
        status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters) {
        throw std::runtime_error("gamma-variate fit did not converge after " + std::to_string(kMaxIter) +
                                 " iterations (residual " + std::to_string(g.residual) + ")");
    }
    return g;
}

CsvdDeconvolver::CsvdDeconvolver(TimeCurve const &ca, DscConfig const &cfg)
    : n_(ca.size()), padded_(ca.size() * static_cast<std::size_t>(cfg.pad_factor)), dt_(ca.dt) {
    cfg.validate();
    if (std::all_of(ca.values.begin(), ca.values.end(), [](double x) { return x == 0.0; })) {
        throw std::invalid_argument("zero AIF");
    }
    auto const N = static_cast<Eigen::Index>(padded_);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < N; ++j) {
            auto const lag = static_cast<std::size_t>((i - j + N) % N);
            double const c = lag < n_ ? ca.values[lag] : 0.0;
            A(i, j) = dt_ * c * (j == 0 ? 0.5 : 1.0);
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    auto const &s = svd.singularValues();
    double const cut = cfg.svd_threshold * s[0];
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        if (s[i] > cut && s[i] > 0.0) {
            inv[i] = 1.0 / s[i];
            ++kept_;
        }
    }
    pinv_ = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

TimeCurve CsvdDeconvolver::apply(TimeCurve const &ct) const {
    if (ct.size() != n_ || std::abs(ct.dt - dt_) > 1e-12 * dt_) {
        throw std::invalid_argument("tissue and arterial curves must share length and dt");
    }
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(padded_));
    for (std::size_t i = 0; i < n_; ++i) {
        c[static_cast<Eigen::Index>(i)] = ct.values[i];
    }
    Eigen::VectorXd const k = pinv_ * c;
    return {std::vector<double>(k.data(), k.data() + n_), dt_};
}

TimeCurve csvd_deconvolve(TimeCurve const &ct, TimeCurve const &ca, DscConfig const &cfg) {
    return CsvdDeconvolver(ca, cfg).apply(ct);
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

void check_region(ImageSeries const &series, std::vector<std::uint8_t> const &region) {
    if (region.size() != series.shape().frame_size()) {
        throw std::invalid_argument("AIF region does not match the image grid");
    }
    if (std::none_of(region.begin(), region.end(), [](std::uint8_t v) { return v != 0; })) {
        throw std::invalid_argument("AIF region is empty");
    }
}

} // namespace

TimeCurve dsc_arterial_input(ImageSeries const &series, std::vector<std::uint8_t> const &region, DscConfig const &cfg,
                             GammaVariateFit *fit) {
    check_region(series, region);
    std::vector<double> mean(static_cast<std::size_t>(series.t()), 0.0);
    std::size_t n = 0;
    for (std::size_t v = 0; v < region.size(); ++v) {
        if (region[v] == 0) {
            continue;
        }
        auto const c = signal_to_concentration(voxel_signal(series, v), cfg);
        for (std::size_t i = 0; i < mean.size(); ++i) {
            mean[i] += c.values[i];
        }
        ++n;
    }
    for (auto &m : mean) {
        m /= static_cast<double>(n);
    }
    auto const g = fit_gamma_variate({mean, series.dt()});
    if (fit != nullptr) {
        *fit = g;
    }
    return g.sample(mean.size(), series.dt());
}

DscMaps compute_dsc_maps(ImageSeries const &series, std::vector<std::uint8_t> const &aif_region, DscConfig const &cfg) {
    cfg.validate();
    auto const ca = dsc_arterial_input(series, aif_region, cfg);
    double ca_area = 0.0;
    for (double v : ca.values) {
        ca_area += v;
    }
    CsvdDeconvolver const deconv(ca, cfg);

    int const nx = series.nx();
    int const ny = series.ny();
    DscMaps maps{ParameterMap(nx, ny, MapKind::CBF, "relative"), ParameterMap(nx, ny, MapKind::CBV, "relative"),
                 ParameterMap(nx, ny, MapKind::MTT, "s"), 0};
    std::vector<std::uint8_t> invalid(series.shape().frame_size(), 0);
    parallel_for(series.shape().frame_size(), [&](std::size_t v) {
        auto const s = voxel_signal(series, v);
        TimeCurve ct;
        try {
            ct = signal_to_concentration(s, cfg);
        } catch (std::invalid_argument const &) {
            invalid[v] = 1;
            return;
        }
        auto const k = deconv.apply(ct);
        double const cbf = *std::max_element(k.values.begin(), k.values.end());
        double area = 0.0;
        for (double c : ct.values) {
            area += c;
        }
        double const cbv = area / ca_area;
        maps.cbf.data[v] = static_cast<float>(cbf);
        maps.cbv.data[v] = static_cast<float>(cbv);
        maps.mtt.data[v] = cbf > 1e-6 ? static_cast<float>(cbv / cbf) : 0.0f;
    });
    maps.invalid_voxels = static_cast<std::size_t>(std::count(invalid.begin(), invalid.end(), std::uint8_t{1}));
    return maps;
}

} // namespace perf
