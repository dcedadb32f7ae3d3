#include "perf/prox_dtv.hpp"
#include "perf/sampler.hpp"

#include "helpers.hpp"

#include <Eigen/Dense>
#include <doctest.h>

using namespace perf;

namespace {

Eigen::VectorXd random_weights(Rng &rng, std::size_t n) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        w[i] = 0.1 + rng.uniform();
    }
    return w;
}

FrameFidelity frame_of(SamplingMask const &m) {
    auto const n = m.shape.frame_size();
    return {m.shape.nx, m.shape.ny, std::vector<std::uint8_t>(m.bits.begin(), m.bits.begin() + static_cast<std::ptrdiff_t>(n))};
}

Eigen::MatrixXcd dense_of(std::function<Eigen::VectorXcd(Eigen::VectorXcd const &)> const &op, Eigen::Index n) {
    Eigen::MatrixXcd A(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
        e[j] = 1.0;
        A.col(j) = op(e);
    }
    return A;
}

} // namespace

TEST_CASE("finite differences and their adjoints") {
    Rng rng(1);
    int const nx = 7, ny = 5;
    auto const d = testing::random_vector(rng, nx * ny);
    auto const g = testing::random_vector(rng, nx * ny);
    CHECK(std::abs(diff_vertical(d, nx, ny).dot(g) - d.dot(diff_vertical_adjoint(g, nx, ny))) < 1e-12);
    CHECK(std::abs(diff_horizontal(d, nx, ny).dot(g) - d.dot(diff_horizontal_adjoint(g, nx, ny))) < 1e-12);

    auto const h = diff_horizontal(d, nx, ny);
    auto const v = diff_vertical(d, nx, ny);
    CHECK(std::abs(h[2 * nx + 3] - (d[2 * nx + 4] - d[2 * nx + 3])) < 1e-15);
    CHECK(std::abs(v[2 * nx + 3] - (d[3 * nx + 3] - d[2 * nx + 3])) < 1e-15);
    CHECK(std::abs(h[2 * nx + nx - 1]) == 0.0);
    CHECK(std::abs(v[(ny - 1) * nx + 2]) == 0.0);
}

TEST_CASE("tv_norm of a step edge") {
    int const nx = 4, ny = 4;
    Eigen::VectorXcd d = Eigen::VectorXcd::Zero(16);
    for (int y = 0; y < ny; ++y) {
        for (int x = 2; x < nx; ++x) {
            d[y * nx + x] = 1.0;
        }
    }
    CHECK(tv_norm(d, nx, ny) == doctest::Approx(4.0));
    auto const W = compute_weights(d, nx, ny, 1e-8);
    CHECK(W[1] == doctest::Approx(1.0));
    CHECK(W[0] == doctest::Approx(1e8));
}

TEST_CASE("penta-diagonal operator equals its dense form and the difference-operator expression") {
    Rng rng(2);
    int const nx = 6, ny = 5;
    auto const W = random_weights(rng, nx * ny);
    PentaDiagonal const P(nx, ny, W, 0.3, 0.7);
    auto const x = testing::random_vector(rng, nx * ny);
    Eigen::VectorXcd const q1 = diff_vertical(x, nx, ny);
    Eigen::VectorXcd const q2 = diff_horizontal(x, nx, ny);
    Eigen::VectorXcd expect = 0.7 * x;
    expect += 0.3 * diff_vertical_adjoint(W.cast<cdouble>().cwiseProduct(q1), nx, ny);
    expect += 0.3 * diff_horizontal_adjoint(W.cast<cdouble>().cwiseProduct(q2), nx, ny);
    CHECK((P.apply(x) - expect).norm() < 1e-12 * expect.norm());
    Eigen::VectorXcd const viaDense = P.dense().cast<cdouble>() * x;
    CHECK((viaDense - expect).norm() < 1e-12 * expect.norm());
    CHECK((P.dense() - P.dense().transpose()).norm() == 0.0);
}

TEST_CASE("ILU(0) is exact on a single-row (tridiagonal) system") {
    Rng rng(3);
    int const nx = 12, ny = 1;
    PentaDiagonal const P(nx, ny, random_weights(rng, nx), 0.5, 1.0);
    IncompleteLU const ilu(P);
    auto const x = testing::random_vector(rng, nx);
    CHECK((ilu.solve(P.apply(x)) - x).norm() < 1e-12 * x.norm());
}

TEST_CASE("PCG matches a dense direct solve of the frozen-weight system") {
    Rng rng(4);
    for (auto scheme : {SamplingScheme::CartesianVD, SamplingScheme::Radial}) {
        auto const F = frame_of(make_mask(scheme, 16, 16, 1, 4.0, 12));
        auto const W = random_weights(rng, 256);
        double const lambda = 0.05;
        auto const S = [&](Eigen::VectorXcd const &v) { return dtv_system_apply(F, W, lambda, v); };
        IncompleteLU const ilu(dtv_preconditioner(F, W, lambda));
        auto const M = [&](Eigen::VectorXcd const &v) { return ilu.solve(v); };
        auto const b = testing::random_vector(rng, 256);
        auto const res = pcg(S, M, b, Eigen::VectorXcd::Zero(256), 1e-14, 1000);
        Eigen::VectorXcd const direct = dense_of(S, 256).partialPivLu().solve(b);
        CHECK((res.x - direct).norm() / direct.norm() <= 1e-8);
    }
}

TEST_CASE("PCG returns zero for a zero right-hand side") {
    auto const I = [](Eigen::VectorXcd const &v) { return v; };
    auto const r = pcg(I, I, Eigen::VectorXcd::Zero(5), Eigen::VectorXcd::Ones(5), 1e-9, 10);
    CHECK(r.x.norm() == 0.0);
}

TEST_CASE("FIRLS denoising output beats random 1% perturbations") {
    Rng rng(5);
    DtvConfig cfg;
    cfg.lambda1 = 0.05;
    int const nx = 8, ny = 8;
    FrameFidelity const I{nx, ny, {}};
    for (int inst = 0; inst < 5; ++inst) {
        Eigen::VectorXcd b = testing::random_vector(rng, 64, 0.1);
        for (int y = 0; y < ny; ++y) {
            for (int x = 4; x < nx; ++x) {
                b[y * nx + x] += 1.0;
            }
        }
        auto const d = firls(I, b, b, cfg.lambda(), cfg);
        double const f0 = dtv_objective(I, d, b, cfg.lambda());
        double const mag = d.cwiseAbs().mean();
        for (int p = 0; p < 50; ++p) {
            Eigen::VectorXcd const e = testing::random_vector(rng, 64, 0.01 * mag);
            CHECK(f0 <= dtv_objective(I, d + e, b, cfg.lambda()) + 1e-9);
        }
    }
}

TEST_CASE("vanishing lambda reproduces the data") {
    Rng rng(6);
    DtvConfig cfg;
    cfg.lambda1 = 1e-12;
    int const nx = 8, ny = 8;
    ReferenceImage const xbar{nx, ny, testing::random_vector(rng, 64)};
    auto const z = testing::random_vector(rng, 64);
    CHECK((firls_denoise_frame(z, xbar, cfg) - z).norm() < 1e-8 * z.norm());

    SamplingMask full;
    full.shape = {nx, ny, 1};
    full.bits.assign(64, 1);
    FrameFidelity const F = frame_of(full);
    auto const y = F.forward(z);
    CHECK((firls_solve_frame(y, full.bits, xbar, cfg) - z).norm() < 1e-8 * z.norm());
}

TEST_CASE("a frame equal to the reference is a fixed point") {
    Rng rng(7);
    DtvConfig cfg;
    cfg.lambda1 = 0.5;
    ReferenceImage const xbar{8, 8, testing::random_vector(rng, 64)};
    CHECK((firls_denoise_frame(xbar.data, xbar, cfg) - xbar.data).norm() < 1e-10);
}

TEST_CASE("k-space form keeps sampled data close and fills the rest smoothly") {
    Rng rng(8);
    int const n = 16;
    Eigen::VectorXcd img = Eigen::VectorXcd::Zero(n * n);
    for (int y = 4; y < 12; ++y) {
        for (int x = 4; x < 12; ++x) {
            img[y * n + x] = 1.0;
        }
    }
    auto const mask = make_radial_mask(n, n, 1, 3.0, 2);
    auto const F = frame_of(mask);
    auto const y = F.forward(img);
    DtvConfig cfg;
    cfg.lambda1 = 0.002;
    cfg.firls_outer = 15;
    cfg.pcg_max = 50;
    ReferenceImage const zero{n, n, Eigen::VectorXcd::Zero(n * n)};
    auto const rec = firls_solve_frame(y, mask.bits, zero, cfg);
    auto const zf = F.adjoint(y);
    CHECK((rec - img).norm() < (zf - img).norm());
}

TEST_CASE("series wrappers validate shapes") {
    ImageSeries const z(Shape{8, 8, 2}, 1.0);
    ReferenceImage const bad{4, 4, Eigen::VectorXcd::Zero(16)};
    CHECK_THROWS(prox_dtv_series(z, bad, DtvConfig{}));
    DtvConfig cfg;
    cfg.lambda1 = -1.0;
    CHECK_THROWS(cfg.validate());
}
