#include "perf/prox_dtv.hpp"

#include "perf/fft.hpp"
#include "perf/parallel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace perf {

void DtvConfig::validate() const {
    if (!(lambda1 > 0.0) || !(eps_w > 0.0) || firls_outer < 1 || pcg_max < 1 || !(pcg_tol > 0.0) || !(pcg_tol < 1.0)) {
        throw std::invalid_argument("invalid DTV configuration");
    }
}

Eigen::VectorXcd diff_vertical(Eigen::VectorXcd const &d, int nx, int ny) {
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(d.size());
    for (int y = 0; y + 1 < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            auto const i = static_cast<Eigen::Index>(y) * nx + x;
            g[i] = d[i + nx] - d[i];
        }
    }
    return g;
}

Eigen::VectorXcd diff_horizontal(Eigen::VectorXcd const &d, int nx, int ny) {
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(d.size());
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x + 1 < nx; ++x) {
            auto const i = static_cast<Eigen::Index>(y) * nx + x;
            g[i] = d[i + 1] - d[i];
        }
    }
    return g;
}

Eigen::VectorXcd diff_vertical_adjoint(Eigen::VectorXcd const &g, int nx, int ny) {
    Eigen::VectorXcd d = Eigen::VectorXcd::Zero(g.size());
    for (int y = 0; y + 1 < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            auto const i = static_cast<Eigen::Index>(y) * nx + x;
            d[i + nx] += g[i];
            d[i] -= g[i];
        }
    }
    return d;
}

Eigen::VectorXcd diff_horizontal_adjoint(Eigen::VectorXcd const &g, int nx, int ny) {
    Eigen::VectorXcd d = Eigen::VectorXcd::Zero(g.size());
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x + 1 < nx; ++x) {
            auto const i = static_cast<Eigen::Index>(y) * nx + x;
            d[i + 1] += g[i];
            d[i] -= g[i];
        }
    }
    return d;
}

double tv_norm(Eigen::VectorXcd const &d, int nx, int ny) {
    auto const gv = diff_vertical(d, nx, ny);
    auto const gh = diff_horizontal(d, nx, ny);
    return (gv.cwiseAbs2() + gh.cwiseAbs2()).cwiseSqrt().sum();
}

Eigen::VectorXd compute_weights(Eigen::VectorXcd const &d, int nx, int ny, double eps_w) {
    auto const gv = diff_vertical(d, nx, ny);
    auto const gh = diff_horizontal(d, nx, ny);
    Eigen::VectorXd W = (gv.cwiseAbs2() + gh.cwiseAbs2()).array() + eps_w * eps_w;
    return W.cwiseSqrt().cwiseInverse();
}

PentaDiagonal::PentaDiagonal(int nx, int ny, Eigen::VectorXd const &W, double lambda, double s)
    : nx_(nx), ny_(ny), diag_(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(nx) * ny, s)),
      east_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nx) * ny)),
      north_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nx) * ny)) {
    if (W.size() != diag_.size()) {
        throw std::invalid_argument("weight vector size mismatch");
    }
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            auto const i = static_cast<Eigen::Index>(y) * nx + x;
            double const w = lambda * W[i];
            if (x + 1 < nx) {
                east_[i] = -w;
                diag_[i] += w;
                diag_[i + 1] += w;
            }
            if (y + 1 < ny) {
                north_[i] = -w;
                diag_[i] += w;
                diag_[i + nx] += w;
            }
        }
    }
}

Eigen::VectorXcd PentaDiagonal::apply(Eigen::VectorXcd const &x) const {
    Eigen::VectorXcd out = diag_.cwiseProduct(x);
    auto const n = x.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (east_[i] != 0.0) {
            out[i] += east_[i] * x[i + 1];
            out[i + 1] += east_[i] * x[i];
        }
        if (north_[i] != 0.0) {
            out[i] += north_[i] * x[i + nx_];
            out[i + nx_] += north_[i] * x[i];
        }
    }
    return out;
}

Eigen::MatrixXd PentaDiagonal::dense() const {
    auto const n = diag_.size();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        P(i, i) = diag_[i];
        if (i + 1 < n) {
            P(i, i + 1) = P(i + 1, i) = east_[i];
        }
        if (i + nx_ < n) {
            P(i, i + nx_) = P(i + nx_, i) = north_[i];
        }
    }
    return P;
}

IncompleteLU::IncompleteLU(PentaDiagonal const &P)
    : nx_(P.nx()), udiag_(P.diag().size()), east_(P.east()), north_(P.north()) {
    auto const n = udiag_.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        double u = P.diag()[i];
        if (i >= 1) {
            u -= east_[i - 1] * east_[i - 1] / udiag_[i - 1];
        }
        if (i >= nx_) {
            u -= north_[i - nx_] * north_[i - nx_] / udiag_[i - nx_];
        }
        if (!(u > 0.0)) {
            throw std::runtime_error("incomplete LU: non-positive pivot");
        }
        udiag_[i] = u;
    }
}

Eigen::VectorXcd IncompleteLU::solve(Eigen::VectorXcd const &r) const {
    auto const n = r.size();
    Eigen::VectorXcd y = r;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i >= 1) {
            y[i] -= (east_[i - 1] / udiag_[i - 1]) * y[i - 1];
        }
        if (i >= nx_) {
            y[i] -= (north_[i - nx_] / udiag_[i - nx_]) * y[i - nx_];
        }
    }
    Eigen::VectorXcd x(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        cdouble v = y[i];
        if (i + 1 < n) {
            v -= east_[i] * x[i + 1];
        }
        if (i + nx_ < n) {
            v -= north_[i] * x[i + nx_];
        }
        x[i] = v / udiag_[i];
    }
    return x;
}

PcgResult pcg(LinearOp const &A, LinearOp const &Minv, Eigen::VectorXcd const &b, Eigen::VectorXcd x0, double tol,
              int max_iter) {
    PcgResult res;
    double const bnorm = b.norm();
    if (bnorm == 0.0) {
        res.x = Eigen::VectorXcd::Zero(b.size());
        return res;
    }
    res.x = std::move(x0);
    Eigen::VectorXcd r = b - A(res.x);
    res.relative_residual = r.norm() / bnorm;
    if (res.relative_residual <= tol) {
        return res;
    }
    Eigen::VectorXcd z = Minv(r);
    Eigen::VectorXcd p = z;
    cdouble rz = r.dot(z);
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::VectorXcd const Ap = A(p);
        cdouble const pAp = p.dot(Ap);
        cdouble const alpha = rz / pAp;
        res.x += alpha * p;
        r -= alpha * Ap;
        res.iterations = it;
        res.relative_residual = r.norm() / bnorm;
        if (!std::isfinite(res.relative_residual)) {
            throw std::runtime_error("PCG breakdown: non-finite residual at iteration " + std::to_string(it));
        }
        if (res.relative_residual <= tol) {
            break;
        }
        z = Minv(r);
        cdouble const rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    return res;
}

double FrameFidelity::sampled_fraction() const {
    if (identity()) {
        return 1.0;
    }
    std::size_t ones = 0;
    for (auto b : mask) {
        ones += b != 0 ? 1 : 0;
    }
    return static_cast<double>(ones) / static_cast<double>(mask.size());
}

Eigen::VectorXcd FrameFidelity::forward(Eigen::VectorXcd const &d) const {
    if (identity()) {
        return d;
    }
    Eigen::VectorXcd k = fft2(d, nx, ny);
    for (Eigen::Index i = 0; i < k.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)] == 0) {
            k[i] = 0.0;
        }
    }
    return k;
}

Eigen::VectorXcd FrameFidelity::adjoint(Eigen::VectorXcd const &k) const {
    if (identity()) {
        return k;
    }
    Eigen::VectorXcd km = k;
    for (Eigen::Index i = 0; i < km.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)] == 0) {
            km[i] = 0.0;
        }
    }
    return ifft2(km, nx, ny);
}

Eigen::VectorXcd FrameFidelity::normal(Eigen::VectorXcd const &d) const { return adjoint(forward(d)); }

Eigen::VectorXcd dtv_system_apply(FrameFidelity const &F, Eigen::VectorXd const &W, double lambda,
                                  Eigen::VectorXcd const &d) {
    Eigen::VectorXcd out = F.normal(d);
    if (lambda != 0.0) {
        Eigen::VectorXcd const gv = W.cwiseProduct(diff_vertical(d, F.nx, F.ny));
        Eigen::VectorXcd const gh = W.cwiseProduct(diff_horizontal(d, F.nx, F.ny));
        out += lambda * (diff_vertical_adjoint(gv, F.nx, F.ny) + diff_horizontal_adjoint(gh, F.nx, F.ny));
    }
    return out;
}

PentaDiagonal dtv_preconditioner(FrameFidelity const &F, Eigen::VectorXd const &W, double lambda) {
    return PentaDiagonal(F.nx, F.ny, W, lambda, F.sampled_fraction());
}

double dtv_objective(FrameFidelity const &F, Eigen::VectorXcd const &d, Eigen::VectorXcd const &b, double lambda) {
    return 0.5 * (F.forward(d) - b).squaredNorm() + lambda * tv_norm(d, F.nx, F.ny);
}

Eigen::VectorXcd firls(FrameFidelity const &F, Eigen::VectorXcd const &b, Eigen::VectorXcd d0, double lambda,
                       DtvConfig const &cfg, FirlsStats *stats) {
    Eigen::VectorXcd const rhs = F.adjoint(b);
    Eigen::VectorXcd d = std::move(d0);
    FirlsStats local;
    for (int k = 0; k < cfg.firls_outer; ++k) {
        Eigen::VectorXd const W = compute_weights(d, F.nx, F.ny, cfg.eps_w);
        IncompleteLU const ilu(dtv_preconditioner(F, W, lambda));
        auto const S = [&](Eigen::VectorXcd const &v) { return dtv_system_apply(F, W, lambda, v); };
        auto const M = [&](Eigen::VectorXcd const &v) { return ilu.solve(v); };
        auto res = pcg(S, M, rhs, d, cfg.pcg_tol, cfg.pcg_max);
        d = std::move(res.x);
        local.outer_iterations = k + 1;
        local.pcg_iterations += res.iterations;
    }
    if (stats != nullptr) {
        *stats = local;
    }
    return d;
}

Eigen::VectorXcd firls_solve_frame(Eigen::VectorXcd const &y_t, std::span<std::uint8_t const> mask_t,
                                   ReferenceImage const &xbar, DtvConfig const &cfg, FirlsStats *stats) {
    cfg.validate();
    FrameFidelity F{xbar.nx, xbar.ny, std::vector<std::uint8_t>(mask_t.begin(), mask_t.end())};
    if (y_t.size() != xbar.data.size() || F.mask.size() != static_cast<std::size_t>(y_t.size())) {
        throw std::invalid_argument("firls_solve_frame: dimension mismatch");
    }
    if (F.sampled_fraction() == 0.0) {
        throw std::invalid_argument("firls_solve_frame: empty sampling mask");
    }
    Eigen::VectorXcd b = y_t - F.forward(xbar.data);
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        if (F.mask[static_cast<std::size_t>(i)] == 0) {
            b[i] = 0.0;
        }
    }
    Eigen::VectorXcd const zero_filled = F.adjoint(y_t);
    return firls(F, b, zero_filled - xbar.data, cfg.lambda(), cfg, stats) + xbar.data;
}

Eigen::VectorXcd firls_denoise_frame(Eigen::VectorXcd const &z_t, ReferenceImage const &xbar, DtvConfig const &cfg,
                                     FirlsStats *stats) {
    cfg.validate();
    if (z_t.size() != xbar.data.size()) {
        throw std::invalid_argument("firls_denoise_frame: dimension mismatch");
    }
    FrameFidelity const F{xbar.nx, xbar.ny, {}};
    Eigen::VectorXcd const b = z_t - xbar.data;
    return firls(F, b, b, cfg.lambda(), cfg, stats) + xbar.data;
}

WorkSeries prox_dtv_denoise(WorkSeries const &z, ReferenceImage const &xbar, DtvConfig const &cfg) {
    if (xbar.nx != z.shape.nx || xbar.ny != z.shape.ny) {
        throw std::invalid_argument("reference image dimensions do not match the series");
    }
    WorkSeries out(z.shape, z.dt);
    parallel_for(static_cast<std::size_t>(z.shape.t), [&](std::size_t f) {
        out.frame(static_cast<int>(f)) = firls_denoise_frame(z.frame(static_cast<int>(f)), xbar, cfg);
    });
    return out;
}

WorkSeries prox_dtv_kspace(WorkSeries const &y, SamplingMask const &mask, ReferenceImage const &xbar,
                           DtvConfig const &cfg) {
    if (!(y.shape == mask.shape) || xbar.nx != y.shape.nx || xbar.ny != y.shape.ny) {
        throw std::invalid_argument("prox_dtv_kspace: dimension mismatch");
    }
    WorkSeries out(y.shape, y.dt);
    auto const n = y.shape.frame_size();
    parallel_for(static_cast<std::size_t>(y.shape.t), [&](std::size_t f) {
        std::span<std::uint8_t const> const m(mask.bits.data() + f * n, n);
        out.frame(static_cast<int>(f)) = firls_solve_frame(y.frame(static_cast<int>(f)), m, xbar, cfg);
    });
    return out;
}

ImageSeries prox_dtv_series(ImageSeries const &z, ReferenceImage const &xbar, DtvConfig const &cfg) {
    return prox_dtv_denoise(WorkSeries(z), xbar, cfg).to_image();
}

ImageSeries prox_dtv_series(KSpaceSeries const &y, SamplingMask const &mask, ReferenceImage const &xbar,
                            DtvConfig const &cfg) {
    return prox_dtv_kspace(WorkSeries(y), mask, xbar, cfg).to_image();
}

} // namespace perf
