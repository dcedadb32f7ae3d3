#include "perf/gfbs.hpp"

#include "perf/metrics.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <stdexcept>

namespace perf {

void GfbsConfig::validate() const {
    if (!(w1 > 0.0) || !(w2 > 0.0) || std::abs(w1 + w2 - 1.0) > 1e-12) {
        throw std::invalid_argument("proximal weights must be positive and sum to 1");
    }
    if (!(alpha0 > 0.0 && alpha0 < 1.0)) {
        throw std::invalid_argument("alpha0 must lie in (0, 1)");
    }
    if (!(gamma > 0.0 && gamma < 2.0)) {
        throw std::invalid_argument("gamma must lie in (0, 2)");
    }
    if (max_iters < 1 || !(rel_tol >= 0.0)) {
        throw std::invalid_argument("invalid stopping rule");
    }
    dtv.validate();
    nlm.validate();
}

std::string to_string(StopReason r) { return r == StopReason::Tolerance ? "tol" : "max_iters"; }

void ReconHistory::write_csv(std::string const &path) const {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write " + path);
    }
    os.precision(17);
    os << "iter,objective,rmse,psnr,alpha\n";
    for (auto const &r : records) {
        os << r.iter << ',' << r.objective << ',' << r.rmse << ',' << format_db(r.psnr) << ',' << r.alpha << '\n';
    }
}

WorkSeries data_gradient(WorkSeries const &x, WorkSeries const &y, Encoder const &enc) {
    WorkSeries r = enc.forward(x);
    r.data -= y.data;
    return enc.adjoint(r);
}

ImageSeries data_gradient(ImageSeries const &x, KSpaceSeries const &y, SamplingMask const &mask) {
    if (!(x.shape() == y.shape()) || !(x.shape() == mask.shape)) {
        throw std::invalid_argument("data_gradient: dimension mismatch");
    }
    return data_gradient(WorkSeries(x), WorkSeries(y), Encoder(mask)).to_image();
}

ReferenceImage temporal_mean(WorkSeries const &x) {
    ReferenceImage r{x.shape.nx, x.shape.ny, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(x.shape.frame_size()))};
    for (int f = 0; f < x.shape.t; ++f) {
        r.data += x.frame(f);
    }
    r.data /= static_cast<double>(x.shape.t);
    return r;
}

ReferenceImage zero_filled_reference(KSpaceSeries const &y0) {
    auto const img = WorkSeries(adjoint(y0));
    return {y0.nx(), y0.ny(), img.frame(0)};
}

ReferenceImage update_reference(ReconState const &state, ReferenceImage const &bootstrap) {
    return state.k == 0 ? bootstrap : temporal_mean(state.x);
}

double adaptive_alpha(int k, double alpha0) {
    if (k < 1) {
        throw std::invalid_argument("adaptive_alpha: k must be >= 1");
    }
    double prev = 1.0;
    double t = 1.0;
    for (int i = 1; i <= k; ++i) {
        prev = t;
        t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    }
    return 1.0 - (1.0 - alpha0) * (1.0 - (prev - 1.0) / t);
}

double gfbs_objective(WorkSeries const &x, WorkSeries const &y, Encoder const &enc, GfbsConfig const &cfg,
                      ReferenceImage const &xbar, double h) {
    WorkSeries r = enc.forward(x);
    r.data -= y.data;
    double tv = 0.0;
    for (int f = 0; f < x.shape.t; ++f) {
        tv += tv_norm(x.frame(f) - xbar.data, x.shape.nx, x.shape.ny);
    }
    return 0.5 * r.data.squaredNorm() + cfg.dtv.lambda1 * tv + cfg.nlm.lambda2 * nonlocal_penalty(x, cfg.nlm, h);
}

namespace {

void check_finite(WorkSeries const &v, int k, char const *which) {
    if (!v.data.allFinite()) {
        throw std::runtime_error("non-finite iterate at iteration " + std::to_string(k) + " in " + which + " proximal");
    }
}

} // namespace

ReconResult reconstruct(KSpaceSeries const &y, SamplingMask const &mask, GfbsConfig const &cfg,
                        ReconInputs const &inputs) {
    cfg.validate();
    if (!(y.shape() == mask.shape)) {
        throw std::invalid_argument("reconstruct: k-space and mask dimensions differ");
    }
    if (inputs.truth && !(inputs.truth->shape() == y.shape())) {
        throw std::invalid_argument("reconstruct: truth dimensions differ");
    }
    Encoder const enc(mask);
    WorkSeries Y(y);
    for (int f = 0; f < Y.shape.t; ++f) {
        enc.apply_mask(f, Y.frame(f));
    }

    ReconState st;
    st.x = enc.adjoint(Y);
    st.z1 = st.x;
    st.z2 = st.x;
    double const bound = 10.0 * st.x.data.norm();

    ReferenceImage bootstrap;
    if (inputs.reference_kspace) {
        auto const &r = *inputs.reference_kspace;
        if (r.nx() != y.nx() || r.ny() != y.ny() || r.t() != 1) {
            throw std::invalid_argument("reference k-space must be a single frame of the series geometry");
        }
        bootstrap = zero_filled_reference(r);
    } else {
        bootstrap = {y.nx(), y.ny(), st.x.frame(0)};
    }

    DtvConfig dtv = cfg.dtv;
    dtv.lambda1 = cfg.gamma * cfg.dtv.lambda1 / cfg.w1;
    double const nl_alpha = std::min(1.0, 2.0 * cfg.gamma * cfg.nlm.lambda2 / cfg.w2);
    double const h_objective = resolve_h(st.x, cfg.nlm);

    for (int k = 1; k <= cfg.max_iters; ++k) {
        st.xbar = update_reference(st, bootstrap);
        st.alpha_k = cfg.adaptive ? adaptive_alpha(k, cfg.alpha0) : cfg.alpha0;

        WorkSeries const g = data_gradient(st.x, Y, enc);
        WorkSeries u1 = st.x;
        u1.data = 2.0 * st.x.data - st.z1.data - cfg.gamma * g.data;
        WorkSeries u2 = st.x;
        u2.data = 2.0 * st.x.data - st.z2.data - cfg.gamma * g.data;

        auto run_dtv = [&] { return prox_dtv_denoise(u1, st.xbar, dtv); };
        auto run_nlm = [&] { return prox_nlm_denoise(u2, cfg.nlm, nl_alpha); };
        WorkSeries p1;
        WorkSeries p2;
        if (cfg.concurrent_prox) {
            auto f1 = std::async(std::launch::async, run_dtv);
            p2 = run_nlm();
            p1 = f1.get();
        } else {
            p1 = run_dtv();
            p2 = run_nlm();
        }
        check_finite(p1, k, "dtv");
        check_finite(p2, k, "nlm");

        st.z1.data += st.alpha_k * (p1.data - st.x.data);
        st.z2.data += st.alpha_k * (p2.data - st.x.data);
        Eigen::VectorXcd next = cfg.w1 * st.z1.data + cfg.w2 * st.z2.data;

        double const prev_norm2 = st.x.data.squaredNorm();
        double const change = prev_norm2 > 0.0 ? (next - st.x.data).squaredNorm() / prev_norm2
                                               : (next.squaredNorm() > 0.0 ? 1.0 : 0.0);
        st.x.data = std::move(next);
        st.k = k;
        if (st.x.data.norm() > bound && bound > 0.0) {
            throw std::runtime_error("divergence at iteration " + std::to_string(k) + ": iterate norm exceeds 10x adjoint norm");
        }

        IterationRecord rec;
        rec.iter = k;
        rec.alpha = st.alpha_k;
        rec.objective = gfbs_objective(st.x, Y, enc, cfg, st.xbar, h_objective);
        rec.rmse = std::numeric_limits<double>::quiet_NaN();
        rec.psnr = std::numeric_limits<double>::quiet_NaN();
        if (inputs.truth) {
            auto const img = st.x.to_image();
            rec.rmse = rmse_normalized(img, *inputs.truth);
            rec.psnr = psnr_from_rmse(rec.rmse);
        }
        st.history.records.push_back(rec);
        st.history.iterations = k;

        if (change <= cfg.rel_tol) {
            st.history.stop = StopReason::Tolerance;
            break;
        }
    }
    return {st.x.to_image(), std::move(st.history)};
}

} // namespace perf
