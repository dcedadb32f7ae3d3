#include "perf/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace perf {

namespace {

void check_pair(std::size_t a, std::size_t b, std::size_t min_n) {
    if (a != b) {
        throw std::invalid_argument("length mismatch");
    }
    if (a < min_n) {
        throw std::invalid_argument("need at least " + std::to_string(min_n) + " samples");
    }
}

double mean(std::span<double const> v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

struct Moments {
    double ma, mb, va, vb, cov;
};

Moments moments(std::span<double const> a, std::span<double const> b) {
    Moments m{mean(a), mean(b), 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) {
        double const da = a[i] - m.ma;
        double const db = b[i] - m.mb;
        m.va += da * da;
        m.vb += db * db;
        m.cov += da * db;
    }
    auto const n = static_cast<double>(a.size());
    m.va /= n;
    m.vb /= n;
    m.cov /= n;
    return m;
}

} // namespace

double rmse(std::span<double const> a, std::span<double const> b) {
    check_pair(a.size(), b.size(), 1);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double const d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.size()));
}

double rmse(ImageSeries const &xr, ImageSeries const &xf) {
    if (!(xr.shape() == xf.shape())) {
        throw std::invalid_argument("rmse: dimension mismatch");
    }
    auto const &a = xr.data();
    auto const &b = xf.data();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double const d = std::abs(std::complex<double>(a[i])) - std::abs(std::complex<double>(b[i]));
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.size()));
}

double psnr_from_rmse(double r) {
    if (r == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 20.0 * std::log10(1.0 / r);
}

double psnr(ImageSeries const &xr, ImageSeries const &xf) { return psnr_from_rmse(rmse(xr, xf)); }

double rmse_normalized(ImageSeries const &xr, ImageSeries const &xf) {
    if (!(xr.shape() == xf.shape())) {
        throw std::invalid_argument("rmse: dimension mismatch");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (auto const &v : xf.data()) {
        double const m = std::abs(std::complex<double>(v));
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    if (!(hi > lo)) {
        throw std::invalid_argument("degenerate dynamic range");
    }
    double const scale = 1.0 / (hi - lo);
    double s = 0.0;
    for (std::size_t i = 0; i < xf.data().size(); ++i) {
        double const a = (std::abs(std::complex<double>(xr.data()[i])) - lo) * scale;
        double const b = (std::abs(std::complex<double>(xf.data()[i])) - lo) * scale;
        s += (a - b) * (a - b);
    }
    return std::sqrt(s / static_cast<double>(xf.data().size()));
}

double psnr_normalized(ImageSeries const &xr, ImageSeries const &xf) { return psnr_from_rmse(rmse_normalized(xr, xf)); }

std::string format_db(double v) {
    if (std::isinf(v) && v > 0) {
        return "inf";
    }
    char buf[64];
    auto const res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

double pearson(std::span<double const> a, std::span<double const> b) {
    check_pair(a.size(), b.size(), 2);
    auto const m = moments(a, b);
    if (m.va == 0.0 || m.vb == 0.0) {
        throw std::invalid_argument("degenerate");
    }
    return m.cov / std::sqrt(m.va * m.vb);
}

double ccc(std::span<double const> a, std::span<double const> b) {
    check_pair(a.size(), b.size(), 2);
    auto const m = moments(a, b);
    double const denom = m.va + m.vb + (m.ma - m.mb) * (m.ma - m.mb);
    if (denom == 0.0) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] != b[i]) {
                throw std::invalid_argument("degenerate");
            }
        }
        return 1.0;
    }
    return 2.0 * m.cov / denom;
}

AgreementStats bland_altman(std::span<double const> a, std::span<double const> b) {
    check_pair(a.size(), b.size(), 2);
    AgreementStats s;
    s.n = a.size();
    s.points.reserve(a.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double const d = a[i] - b[i];
        s.points.emplace_back(0.5 * (a[i] + b[i]), d);
        sum += d;
    }
    s.ba_bias = sum / static_cast<double>(s.n);
    double ss = 0.0;
    for (auto const &p : s.points) {
        ss += (p.second - s.ba_bias) * (p.second - s.ba_bias);
    }
    s.ba_sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.ba_lo = s.ba_bias - 1.96 * s.ba_sd;
    s.ba_hi = s.ba_bias + 1.96 * s.ba_sd;
    return s;
}

AgreementStats agreement(std::span<double const> a, std::span<double const> b) {
    auto s = bland_altman(a, b);
    s.ccc = ccc(a, b);
    return s;
}

std::pair<std::vector<double>, std::vector<double>> masked_pairs(ParameterMap const &est, ParameterMap const &ref,
                                                                 std::vector<std::uint8_t> const &exclude) {
    if (est.nx != ref.nx || est.ny != ref.ny) {
        throw std::invalid_argument("map dimension mismatch");
    }
    if (!exclude.empty() && exclude.size() != ref.data.size()) {
        throw std::invalid_argument("exclusion mask size mismatch");
    }
    std::pair<std::vector<double>, std::vector<double>> out;
    for (std::size_t i = 0; i < ref.data.size(); ++i) {
        if (ref.data[i] > 1e-6f && (exclude.empty() || exclude[i] == 0)) {
            out.first.push_back(est.data[i]);
            out.second.push_back(ref.data[i]);
        }
    }
    return out;
}

nlohmann::json to_json(AgreementStats const &s) {
    return {{"ccc", s.ccc}, {"bias", s.ba_bias}, {"sd", s.ba_sd}, {"lo", s.ba_lo}, {"hi", s.ba_hi}, {"n", s.n}};
}

void write_bland_altman_csv(std::string const &path, AgreementStats const &s) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write " + path);
    }
    os.precision(17);
    os << "mean,diff\n";
    for (auto const &[m, d] : s.points) {
        os << m << ',' << d << '\n';
    }
}

} // namespace perf
