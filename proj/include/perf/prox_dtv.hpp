#pragma once

#include "perf/volume.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <span>

namespace perf {

struct DtvConfig {
    double lambda1 = 0.001; // the frame solver uses lambda = 2 * lambda1
    double eps_w = 1e-8;    // smoothing in the IRLS weights
    int firls_outer = 5;
    int pcg_max = 10;
    double pcg_tol = 1e-6;

    double lambda() const { return 2.0 * lambda1; }
    void validate() const;
};

/// Baseline frame subtracted before the TV penalty.
struct ReferenceImage {
    int nx = 0;
    int ny = 0;
    Eigen::VectorXcd data;
};

// Forward differences with replicate boundary: the last row/column difference is zero.
Eigen::VectorXcd diff_vertical(Eigen::VectorXcd const &d, int nx, int ny);
Eigen::VectorXcd diff_horizontal(Eigen::VectorXcd const &d, int nx, int ny);
Eigen::VectorXcd diff_vertical_adjoint(Eigen::VectorXcd const &g, int nx, int ny);
Eigen::VectorXcd diff_horizontal_adjoint(Eigen::VectorXcd const &g, int nx, int ny);

/// Isotropic TV: sum_i sqrt(|Q1 d|_i^2 + |Q2 d|_i^2).
double tv_norm(Eigen::VectorXcd const &d, int nx, int ny);

/// W_i = 1 / sqrt(|Q1 d|_i^2 + |Q2 d|_i^2 + eps^2)
Eigen::VectorXd compute_weights(Eigen::VectorXcd const &d, int nx, int ny, double eps_w);

/*
 * Symmetric penta-diagonal matrix  s I + lambda (Q1' W Q1 + Q2' W Q2)  stored
 * by its main diagonal and the +1 (east) and +nx (north) off-diagonals.
 */
class PentaDiagonal {
public:
    PentaDiagonal(int nx, int ny, Eigen::VectorXd const &W, double lambda, double s);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    Eigen::VectorXd const &diag() const { return diag_; }
    Eigen::VectorXd const &east() const { return east_; }
    Eigen::VectorXd const &north() const { return north_; }

    Eigen::VectorXcd apply(Eigen::VectorXcd const &x) const;
    Eigen::MatrixXd dense() const;

private:
    int nx_;
    int ny_;
    Eigen::VectorXd diag_;
    Eigen::VectorXd east_;
    Eigen::VectorXd north_;
};

/// Zero fill-in ILU of a PentaDiagonal; solve() applies (LU)^-1.
class IncompleteLU {
public:
    explicit IncompleteLU(PentaDiagonal const &P);
    Eigen::VectorXcd solve(Eigen::VectorXcd const &r) const;

private:
    int nx_;
    Eigen::VectorXd udiag_;
    Eigen::VectorXd east_;
    Eigen::VectorXd north_;
};

struct PcgResult {
    Eigen::VectorXcd x;
    int iterations = 0;
    double relative_residual = 0.0;
};

using LinearOp = std::function<Eigen::VectorXcd(Eigen::VectorXcd const &)>;

/// Preconditioned CG for Hermitian positive definite systems. Throws on a non-finite residual.
PcgResult pcg(LinearOp const &A, LinearOp const &Minv, Eigen::VectorXcd const &b, Eigen::VectorXcd x0, double tol,
              int max_iter);

/*
 * Data term of one frame: either a masked unitary DFT (k-space form) or the
 * identity (denoising form, mask empty).
 */
struct FrameFidelity {
    int nx = 0;
    int ny = 0;
    std::vector<std::uint8_t> mask;

    bool identity() const { return mask.empty(); }
    double sampled_fraction() const;
    Eigen::VectorXcd forward(Eigen::VectorXcd const &d) const;
    Eigen::VectorXcd adjoint(Eigen::VectorXcd const &k) const;
    Eigen::VectorXcd normal(Eigen::VectorXcd const &d) const;
};

/// System matrix S = F'F + lambda (Q1' W Q1 + Q2' W Q2) for frozen weights.
Eigen::VectorXcd dtv_system_apply(FrameFidelity const &F, Eigen::VectorXd const &W, double lambda,
                                  Eigen::VectorXcd const &d);

/// Preconditioner P = s I + lambda (Q1' W Q1 + Q2' W Q2), s the sampled fraction.
PentaDiagonal dtv_preconditioner(FrameFidelity const &F, Eigen::VectorXd const &W, double lambda);

/// 0.5 ||F d - b||^2 + lambda TV(d)
double dtv_objective(FrameFidelity const &F, Eigen::VectorXcd const &d, Eigen::VectorXcd const &b, double lambda);

struct FirlsStats {
    int outer_iterations = 0;
    int pcg_iterations = 0;
};

/*
 * FIRLS for min_d 0.5 ||F d - b||^2 + lambda TV(d): reweight via
 * compute_weights, then PCG on S d = F' b preconditioned by ILU(P).
 */
Eigen::VectorXcd firls(FrameFidelity const &F, Eigen::VectorXcd const &b, Eigen::VectorXcd d0, double lambda,
                       DtvConfig const &cfg, FirlsStats *stats = nullptr);

/// k-space form: returns x_t = d + xbar with b_t = y_t - F_t xbar, starting from the zero-filled frame.
Eigen::VectorXcd firls_solve_frame(Eigen::VectorXcd const &y_t, std::span<std::uint8_t const> mask_t,
                                   ReferenceImage const &xbar, DtvConfig const &cfg, FirlsStats *stats = nullptr);

/// Denoising form: identity encoding, b_t = z_t - xbar, s = 1.
Eigen::VectorXcd firls_denoise_frame(Eigen::VectorXcd const &z_t, ReferenceImage const &xbar, DtvConfig const &cfg,
                                     FirlsStats *stats = nullptr);

WorkSeries prox_dtv_denoise(WorkSeries const &z, ReferenceImage const &xbar, DtvConfig const &cfg);
WorkSeries prox_dtv_kspace(WorkSeries const &y, SamplingMask const &mask, ReferenceImage const &xbar,
                           DtvConfig const &cfg);

ImageSeries prox_dtv_series(ImageSeries const &z, ReferenceImage const &xbar, DtvConfig const &cfg);
ImageSeries prox_dtv_series(KSpaceSeries const &y, SamplingMask const &mask, ReferenceImage const &xbar,
                            DtvConfig const &cfg);

} // namespace perf
