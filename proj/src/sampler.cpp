#include "perf/sampler.hpp"

#include "perf/fft.hpp"
#include "perf/parallel.hpp"
#include "perf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace perf {

namespace {

int wrap(int c, int n) { return ((c % n) + n) % n; }

void check_R(double R) {
    if (!(R >= 1.0)) {
        throw std::invalid_argument("acceleration R must be >= 1");
    }
}

/// Centered integer k-space coordinates touched by one spoke.
std::vector<std::size_t> rasterize_spoke(int n, double theta) {
    std::vector<std::size_t> idx;
    double const rmax = n / std::numbers::sqrt2 + 1.0;
    double const c = std::cos(theta);
    double const s = std::sin(theta);
    for (double r = -rmax; r <= rmax; r += 0.5) {
        int const kx = static_cast<int>(std::lround(r * c));
        int const ky = static_cast<int>(std::lround(r * s));
        if (kx < -n / 2 || kx >= n - n / 2 || ky < -n / 2 || ky >= n - n / 2) {
            continue;
        }
        idx.push_back(static_cast<std::size_t>(wrap(ky, n)) * n + wrap(kx, n));
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

} // namespace

SamplingMask make_cartesian_vd_mask(int nx, int ny, int t, double R, std::uint64_t seed) {
    check_R(R);
    if (nx < 8 || ny < 8 || t < 1) {
        throw std::invalid_argument("mask dimensions must be >= 8");
    }
    SamplingMask m;
    m.shape = {nx, ny, t};
    m.bits.assign(m.shape.size(), 0);
    m.scheme = SamplingScheme::CartesianVD;
    m.requested_R = R;
    m.seed = seed;

    int const lines = static_cast<int>(std::ceil(ny / R - 1e-12));
    int const center = std::max(1, static_cast<int>(std::lround(0.04 * ny)));
    if (lines < center) {
        throw std::invalid_argument("R too high for dims");
    }
    double const sd = ny / 6.0;

    for (int f = 0; f < t; ++f) {
        std::vector<char> chosen(static_cast<std::size_t>(ny), 0);
        int count = 0;
        auto pick = [&](int centered) {
            int const row = wrap(centered, ny);
            if (!chosen[row]) {
                chosen[row] = 1;
                ++count;
            }
        };
        for (int i = 0; i < center; ++i) {
            pick(-center / 2 + i);
        }
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(f)));
        long attempts = 0;
        long const max_attempts = 10000L * ny;
        while (count < lines && attempts++ < max_attempts) {
            int const c = static_cast<int>(std::lround(rng.normal() * sd));
            if (c < -ny / 2 || c >= ny - ny / 2) {
                continue;
            }
            pick(c);
        }
        // Only reachable for R very close to 1: fill the remaining lines outward from the center.
        for (int off = 0; count < lines && off <= ny / 2; ++off) {
            pick(off);
            if (count < lines) {
                pick(-off);
            }
        }
        for (int row = 0; row < ny; ++row) {
            if (chosen[row]) {
                std::fill_n(m.bits.begin() + static_cast<std::ptrdiff_t>(m.shape.index(0, row, f)), nx, std::uint8_t{1});
            }
        }
    }
    return m;
}

SamplingMask make_radial_mask(int nx, int ny, int t, double R, std::uint64_t seed) {
    check_R(R);
    if (nx != ny) {
        throw std::invalid_argument("radial requires square grid");
    }
    if (nx < 8 || t < 1) {
        throw std::invalid_argument("mask dimensions must be >= 8");
    }
    int const n = nx;
    SamplingMask m;
    m.shape = {nx, ny, t};
    m.bits.assign(m.shape.size(), 0);
    m.scheme = SamplingScheme::Radial;
    m.requested_R = R;
    m.seed = seed;

    auto const frame_size = m.shape.frame_size();
    double const golden = kGoldenAngleDeg * std::numbers::pi / 180.0;
    double const start = Rng(mix_seed(seed, 0x5ad1a1ull)).uniform() * std::numbers::pi;
    double const per_frame_target = static_cast<double>(frame_size) / R;
    int const max_spokes = 8 * n;

    std::size_t cumulative = 0;
    std::uint64_t spoke = 0;
    for (int f = 0; f < t; ++f) {
        auto *bits = m.bits.data() + f * frame_size;
        bits[0] = 1; // DC
        std::size_t ones = 1;
        double const target = per_frame_target * (f + 1) - static_cast<double>(cumulative);
        for (int s = 0; s < max_spokes; ++s) {
            auto const idx = rasterize_spoke(n, start + golden * static_cast<double>(spoke));
            std::size_t added = 0;
            for (auto i : idx) {
                added += bits[i] == 0 ? 1 : 0;
            }
            double const before = std::abs(static_cast<double>(ones) - target);
            double const after = std::abs(static_cast<double>(ones + added) - target);
            if (static_cast<double>(ones) >= target || (after > before && s > 0)) {
                break;
            }
            for (auto i : idx) {
                bits[i] = 1;
            }
            ones += added;
            ++spoke;
        }
        cumulative += ones;
    }
    return m;
}

SamplingMask make_mask(SamplingScheme scheme, int nx, int ny, int t, double R, std::uint64_t seed) {
    switch (scheme) {
    case SamplingScheme::CartesianVD: return make_cartesian_vd_mask(nx, ny, t, R, seed);
    case SamplingScheme::Radial: return make_radial_mask(nx, ny, t, R, seed);
    default: throw std::invalid_argument("unknown sampling scheme");
    }
}

SamplingMask densify_first_frame(SamplingMask const &mask) {
    SamplingMask out;
    out.shape = {mask.shape.nx, mask.shape.ny, 1};
    out.scheme = mask.scheme;
    out.seed = mask.seed;
    auto const n = mask.shape.frame_size();
    out.bits.assign(mask.bits.begin(), mask.bits.begin() + static_cast<std::ptrdiff_t>(n));
    double const R0 = static_cast<double>(n) / static_cast<double>(std::max<std::size_t>(1, mask.count_frame(0)));
    out.requested_R = std::min(R0, 2.0);
    if (R0 > 2.0) {
        auto const scheme = mask.scheme == SamplingScheme::Unknown ? SamplingScheme::CartesianVD : mask.scheme;
        auto const dense = make_mask(scheme, mask.shape.nx, mask.shape.ny, 1, 2.0, mix_seed(mask.seed, 0xde45e5ull));
        for (std::size_t i = 0; i < n; ++i) {
            out.bits[i] = static_cast<std::uint8_t>(out.bits[i] | dense.bits[i]);
        }
    }
    return out;
}

KSpaceSeries encode_reference_frame(ImageSeries const &x, SamplingMask const &mask, NoiseSpec const &noise) {
    if (!(x.shape() == mask.shape)) {
        throw std::invalid_argument("reference: image and mask dimensions differ");
    }
    auto const f0 = x.frame(0);
    ImageSeries first(Shape{x.nx(), x.ny(), 1}, x.dt(), std::vector<cfloat>(f0.begin(), f0.end()));
    return forward_encode(first, densify_first_frame(mask), {noise.variance, mix_seed(noise.seed, 0x726566ull)});
}

Encoder::Encoder(SamplingMask mask) : mask_(std::move(mask)) {
    check_shape(mask_.shape);
    if (mask_.bits.size() != mask_.shape.size()) {
        throw std::invalid_argument("mask payload does not match its shape");
    }
}

void Encoder::apply_mask(int f, Eigen::Ref<Eigen::VectorXcd> k) const {
    auto const n = mask_.shape.frame_size();
    auto const *bits = mask_.bits.data() + f * n;
    for (std::size_t i = 0; i < n; ++i) {
        if (bits[i] == 0) {
            k[static_cast<Eigen::Index>(i)] = 0.0;
        }
    }
}

void Encoder::forward_frame(int f, Eigen::Ref<Eigen::VectorXcd const> x, Eigen::Ref<Eigen::VectorXcd> y) const {
    fft2(x, y, mask_.shape.nx, mask_.shape.ny);
    apply_mask(f, y);
}

void Encoder::adjoint_frame(int f, Eigen::Ref<Eigen::VectorXcd const> y, Eigen::Ref<Eigen::VectorXcd> x) const {
    Eigen::VectorXcd k = y;
    apply_mask(f, k);
    ifft2(k, x, mask_.shape.nx, mask_.shape.ny);
}

WorkSeries Encoder::forward(WorkSeries const &x) const {
    if (!(x.shape == mask_.shape)) {
        throw std::invalid_argument("encoder: dimension mismatch");
    }
    WorkSeries y(x.shape, x.dt);
    parallel_for(static_cast<std::size_t>(x.shape.t), [&](std::size_t f) {
        forward_frame(static_cast<int>(f), x.frame(static_cast<int>(f)), y.frame(static_cast<int>(f)));
    });
    return y;
}

WorkSeries Encoder::adjoint(WorkSeries const &y) const {
    if (!(y.shape == mask_.shape)) {
        throw std::invalid_argument("encoder: dimension mismatch");
    }
    WorkSeries x(y.shape, y.dt);
    parallel_for(static_cast<std::size_t>(y.shape.t), [&](std::size_t f) {
        adjoint_frame(static_cast<int>(f), y.frame(static_cast<int>(f)), x.frame(static_cast<int>(f)));
    });
    return x;
}

WorkSeries Encoder::normal(WorkSeries const &x) const { return adjoint(forward(x)); }

KSpaceSeries forward_encode(ImageSeries const &x, SamplingMask const &mask, NoiseSpec const &noise) {
    if (!(x.shape() == mask.shape)) {
        throw std::invalid_argument("forward_encode: dimension mismatch between series and mask");
    }
    if (noise.variance < 0.0) {
        throw std::invalid_argument("noise variance must be >= 0");
    }
    Encoder const enc(mask);
    WorkSeries const xd(x);
    WorkSeries k(x.shape(), x.dt());
    double const sd = std::sqrt(noise.variance / 2.0);
    parallel_for(static_cast<std::size_t>(x.t()), [&](std::size_t fi) {
        int const f = static_cast<int>(fi);
        auto kf = k.frame(f);
        fft2(xd.frame(f), kf, x.nx(), x.ny());
        if (noise.variance > 0.0) {
            Rng rng(mix_seed(noise.seed, 0x6e6f697365ull + fi));
            for (Eigen::Index i = 0; i < kf.size(); ++i) {
                double const re = rng.normal();
                double const im = rng.normal();
                kf[i] += cdouble(sd * re, sd * im);
            }
        }
        enc.apply_mask(f, kf);
    });
    KSpaceSeries out(x.shape(), x.dt());
    for (std::size_t i = 0; i < out.data().size(); ++i) {
        auto const &z = k.data[static_cast<Eigen::Index>(i)];
        out.data()[i] = cfloat(static_cast<float>(z.real()), static_cast<float>(z.imag()));
    }
    // float rounding can't turn an exact zero into a non-zero, so unsampled entries stay 0.
    return out;
}

ImageSeries adjoint(KSpaceSeries const &y) {
    WorkSeries const yd(y);
    WorkSeries x(y.shape(), y.dt());
    parallel_for(static_cast<std::size_t>(y.t()), [&](std::size_t f) {
        ifft2(yd.frame(static_cast<int>(f)), x.frame(static_cast<int>(f)), y.nx(), y.ny());
    });
    return x.to_image();
}

} // namespace perf
