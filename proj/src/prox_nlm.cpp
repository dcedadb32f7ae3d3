#include "perf/prox_nlm.hpp"

#include "perf/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace perf {

namespace {

// Weights below exp(-kCutoff) are treated as zero.
constexpr double kCutoff = 60.0;

std::vector<int> lattice(int n, int step) {
    std::vector<int> pos;
    for (int i = 0; i < n; i += step) {
        pos.push_back(i);
    }
    if (pos.back() != n - 1) {
        pos.push_back(n - 1);
    }
    return pos;
}

struct Range {
    int lo;
    int hi; // inclusive
    int len() const { return hi - lo + 1; }
};

/// Offsets o in [-r, r] with both p + o and q + o inside [0, n).
Range common_offsets(int p, int q, int r, int n) {
    return {std::max({-r, -p, -q}), std::min({r, n - 1 - p, n - 1 - q})};
}

/*
 * Patch distance with early exit: returns +inf once the rescaled partial sum
 * exceeds `limit`.
 */
double distance(WorkSeries const &x, std::array<int, 3> p, std::array<int, 3> q, int r, double limit) {
    auto const &s = x.shape;
    Range const ox = common_offsets(p[0], q[0], r, s.nx);
    Range const oy = common_offsets(p[1], q[1], r, s.ny);
    Range const ot = common_offsets(p[2], q[2], r, s.t);
    int const full = (2 * r + 1) * (2 * r + 1) * (2 * r + 1);
    double const scale = static_cast<double>(full) / (ox.len() * oy.len() * ot.len());
    double sum = 0.0;
    auto const *data = x.data.data();
    for (int dt = ot.lo; dt <= ot.hi; ++dt) {
        for (int dy = oy.lo; dy <= oy.hi; ++dy) {
            auto const *a = data + s.index(p[0] + ox.lo, p[1] + dy, p[2] + dt);
            auto const *b = data + s.index(q[0] + ox.lo, q[1] + dy, q[2] + dt);
            for (int k = 0; k < ox.len(); ++k) {
                sum += std::norm(a[k] - b[k]);
            }
        }
        if (sum * scale > limit) {
            return std::numeric_limits<double>::infinity();
        }
    }
    return sum * scale;
}

struct Window {
    Range x, y, t;
};

Window search_window(Shape const &s, std::array<int, 3> p, int radius) {
    return {{std::max(0, p[0] - radius), std::min(s.nx - 1, p[0] + radius)},
            {std::max(0, p[1] - radius), std::min(s.ny - 1, p[1] + radius)},
            {std::max(0, p[2] - radius), std::min(s.t - 1, p[2] + radius)}};
}

} // namespace

void NlmConfig::validate() const {
    if (search < 1 || patch < 1 || search % 2 == 0 || patch % 2 == 0) {
        throw std::invalid_argument("NLM search window and patch sizes must be odd and positive");
    }
    if (patch >= search) {
        throw std::invalid_argument("NLM patch must be smaller than the search window");
    }
    if (block_step < 1 || pocs_iters < 1 || !(lambda2 > 0.0) || !(h_factor > 0.0)) {
        throw std::invalid_argument("invalid NLM configuration");
    }
}

// sd(u - median3x3(u)) / sd(u) = 1 / 1.158 for white Gaussian noise (Monte Carlo).
constexpr double kMedianResidualGain = 1.158;

double estimate_sigma(WorkSeries const &x) {
    auto const &s = x.shape;
    if (s.nx < 3 || s.ny < 3) {
        return 1e-6;
    }
    // In-plane residuals against the 3x3 median: edges of piecewise-constant
    // regions survive the median, and frame-to-frame contrast changes don't enter.
    std::vector<double> eps;
    eps.reserve(s.size());
    auto mag = [&](int ix, int iy, int it) { return std::abs(x.data[static_cast<Eigen::Index>(s.index(ix, iy, it))]); };
    std::array<double, 9> nb{};
    for (int it = 0; it < s.t; ++it) {
        for (int iy = 1; iy + 1 < s.ny; ++iy) {
            for (int ix = 1; ix + 1 < s.nx; ++ix) {
                std::size_t k = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        nb[k++] = mag(ix + dx, iy + dy, it);
                    }
                }
                std::nth_element(nb.begin(), nb.begin() + 4, nb.end());
                eps.push_back(mag(ix, iy, it) - nb[4]);
            }
        }
    }
    auto median = [](std::vector<double> v) {
        auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
        std::nth_element(v.begin(), mid, v.end());
        double m = *mid;
        if (v.size() % 2 == 0) {
            m = 0.5 * (m + *std::max_element(v.begin(), mid));
        }
        return m;
    };
    double const med = median(eps);
    for (auto &e : eps) {
        e = std::abs(e - med);
    }
    return std::max(kMedianResidualGain * 1.4826 * median(eps), 1e-6);
}

double estimate_sigma(ImageSeries const &x) { return estimate_sigma(WorkSeries(x)); }

double patch_distance(WorkSeries const &x, int px, int py, int pt, int qx, int qy, int qt, int patch) {
    return distance(x, {px, py, pt}, {qx, qy, qt}, patch / 2, std::numeric_limits<double>::infinity());
}

double resolve_h(WorkSeries const &x, NlmConfig const &cfg) {
    return cfg.h > 0.0 ? cfg.h : cfg.h_factor * estimate_sigma(x);
}

WorkSeries nlm_filter_3d(WorkSeries const &x, NlmConfig const &cfg, double h) {
    cfg.validate();
    auto const &s = x.shape;
    if (s.nx < cfg.patch || s.ny < cfg.patch || s.t < cfg.patch) {
        throw std::invalid_argument("NLM: volume smaller than the patch");
    }
    if (!(h > 0.0)) {
        throw std::invalid_argument("NLM: decay parameter h must be positive");
    }
    int const pr = cfg.patch / 2;
    int const sr = cfg.search / 2;
    int const br = cfg.block_step / 2;
    int const bw = 2 * br + 1;
    double const h2 = h * h;
    double const limit = kCutoff * h2;

    auto const lx = lattice(s.nx, cfg.block_step);
    auto const ly = lattice(s.ny, cfg.block_step);
    auto const lt = lattice(s.t, cfg.block_step);
    std::size_t const ncenters = lx.size() * ly.size() * lt.size();
    std::size_t const block_voxels = static_cast<std::size_t>(bw) * bw * bw;

    // Per-center block estimates; accumulated serially afterwards so the sum order is fixed.
    std::vector<cdouble> estimates(ncenters * block_voxels, cdouble(0.0, 0.0));
    std::vector<char> valid(ncenters * block_voxels, 0);

    parallel_for(ncenters, [&](std::size_t c) {
        std::array<int, 3> const p{lx[c % lx.size()], ly[(c / lx.size()) % ly.size()],
                                   lt[c / (lx.size() * ly.size())]};
        Window const w = search_window(s, p, sr);
        std::vector<cdouble> num(block_voxels, cdouble(0.0, 0.0));
        std::vector<double> den(block_voxels, 0.0);
        for (int qt = w.t.lo; qt <= w.t.hi; ++qt) {
            for (int qy = w.y.lo; qy <= w.y.hi; ++qy) {
                for (int qx = w.x.lo; qx <= w.x.hi; ++qx) {
                    double const d = distance(x, p, {qx, qy, qt}, pr, limit);
                    if (!std::isfinite(d)) {
                        continue;
                    }
                    double const phi = std::exp(-d / h2);
                    for (int ot = -br; ot <= br; ++ot) {
                        for (int oy = -br; oy <= br; ++oy) {
                            for (int ox = -br; ox <= br; ++ox) {
                                int const ax = qx + ox, ay = qy + oy, at = qt + ot;
                                if (ax < 0 || ay < 0 || at < 0 || ax >= s.nx || ay >= s.ny || at >= s.t) {
                                    continue;
                                }
                                auto const k = static_cast<std::size_t>(((ot + br) * bw + (oy + br)) * bw + (ox + br));
                                num[k] += phi * x.data[static_cast<Eigen::Index>(s.index(ax, ay, at))];
                                den[k] += phi;
                            }
                        }
                    }
                }
            }
        }
        for (std::size_t k = 0; k < block_voxels; ++k) {
            if (den[k] > 0.0) {
                estimates[c * block_voxels + k] = num[k] / den[k];
                valid[c * block_voxels + k] = 1;
            }
        }
    });

    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(s.size()));
    std::vector<int> count(s.size(), 0);
    for (std::size_t c = 0; c < ncenters; ++c) {
        std::array<int, 3> const p{lx[c % lx.size()], ly[(c / lx.size()) % ly.size()],
                                   lt[c / (lx.size() * ly.size())]};
        for (int ot = -br; ot <= br; ++ot) {
            for (int oy = -br; oy <= br; ++oy) {
                for (int ox = -br; ox <= br; ++ox) {
                    int const ax = p[0] + ox, ay = p[1] + oy, at = p[2] + ot;
                    if (ax < 0 || ay < 0 || at < 0 || ax >= s.nx || ay >= s.ny || at >= s.t) {
                        continue;
                    }
                    auto const k = c * block_voxels + static_cast<std::size_t>(((ot + br) * bw + (oy + br)) * bw + (ox + br));
                    if (!valid[k]) {
                        continue;
                    }
                    auto const i = s.index(ax, ay, at);
                    acc[static_cast<Eigen::Index>(i)] += estimates[k];
                    ++count[i];
                }
            }
        }
    }

    WorkSeries out(s, x.dt);
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto const ei = static_cast<Eigen::Index>(i);
        out.data[ei] = count[i] > 0 ? acc[ei] / static_cast<double>(count[i]) : x.data[ei];
    }
    return out;
}

ImageSeries nlm_filter_3d(ImageSeries const &x, NlmConfig const &cfg) {
    WorkSeries const w(x);
    return nlm_filter_3d(w, cfg, resolve_h(w, cfg)).to_image();
}

WorkSeries prox_nlm_pocs(WorkSeries const &y, Encoder const &enc, WorkSeries const &x0, NlmConfig const &cfg) {
    cfg.validate();
    if (!(y.shape == enc.shape()) || !(x0.shape == enc.shape())) {
        throw std::invalid_argument("prox_nlm_pocs: dimension mismatch");
    }
    double const alpha = cfg.alpha();
    WorkSeries x = x0;
    for (int k = 0; k < cfg.pocs_iters; ++k) {
        WorkSeries residual = y;
        residual.data -= enc.forward(x).data;
        WorkSeries proj = x;
        proj.data += enc.adjoint(residual).data;
        auto const nlm = nlm_filter_3d(proj, cfg, resolve_h(proj, cfg));
        x.data += alpha * (nlm.data - x.data);
    }
    return x;
}

ImageSeries prox_nlm_pocs(KSpaceSeries const &y, SamplingMask const &mask, ImageSeries const &x0,
                          NlmConfig const &cfg) {
    return prox_nlm_pocs(WorkSeries(y), Encoder(mask), WorkSeries(x0), cfg).to_image();
}

WorkSeries prox_nlm_denoise(WorkSeries const &u, NlmConfig const &cfg, double alpha, double *h_used) {
    cfg.validate();
    double const h = resolve_h(u, cfg);
    if (h_used != nullptr) {
        *h_used = h;
    }
    auto const nlm = nlm_filter_3d(u, cfg, h);
    double const keep = std::pow(1.0 - std::clamp(alpha, 0.0, 1.0), cfg.pocs_iters);
    WorkSeries out = nlm;
    out.data += keep * (u.data - nlm.data);
    return out;
}

double nonlocal_penalty(WorkSeries const &x, NlmConfig const &cfg, double h) {
    auto const &s = x.shape;
    int const pr = cfg.patch / 2;
    int const sr = cfg.search / 2;
    double const h2 = h * h;
    auto const lx = lattice(s.nx, cfg.block_step);
    auto const ly = lattice(s.ny, cfg.block_step);
    auto const lt = lattice(s.t, cfg.block_step);
    std::size_t const ncenters = lx.size() * ly.size() * lt.size();
    std::vector<double> partial(ncenters, 0.0);
    parallel_for(ncenters, [&](std::size_t c) {
        std::array<int, 3> const p{lx[c % lx.size()], ly[(c / lx.size()) % ly.size()],
                                   lt[c / (lx.size() * ly.size())]};
        Window const w = search_window(s, p, sr);
        double acc = 0.0;
        for (int qt = w.t.lo; qt <= w.t.hi; ++qt) {
            for (int qy = w.y.lo; qy <= w.y.hi; ++qy) {
                for (int qx = w.x.lo; qx <= w.x.hi; ++qx) {
                    double const d = distance(x, p, {qx, qy, qt}, pr, kCutoff * h2);
                    if (std::isfinite(d)) {
                        acc += std::exp(-d / h2) * d;
                    }
                }
            }
        }
        partial[c] = acc;
    });
    double total = 0.0;
    for (double v : partial) {
        total += v;
    }
    return total;
}

} // namespace perf
