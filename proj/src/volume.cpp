#include "perf/volume.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace perf {

void check_shape(Shape const &s) {
    if (s.nx < 1 || s.ny < 1 || s.t < 1) {
        throw std::invalid_argument("series dimensions must be positive");
    }
}

ComplexSeries::ComplexSeries(Shape shape, double dt)
    : shape_(shape), dt_(dt) {
    check_shape(shape_);
    if (!(dt_ > 0.0)) {
        throw std::invalid_argument("frame spacing dt must be positive");
    }
    data_.assign(shape_.size(), cfloat{0.f, 0.f});
}

ComplexSeries::ComplexSeries(Shape shape, double dt, std::vector<cfloat> data)
    : shape_(shape), dt_(dt), data_(std::move(data)) {
    check_shape(shape_);
    if (!(dt_ > 0.0)) {
        throw std::invalid_argument("frame spacing dt must be positive");
    }
    if (data_.size() != shape_.size()) {
        throw std::invalid_argument("payload length does not match nx*ny*t");
    }
}

std::span<cfloat const> ComplexSeries::frame(int f) const {
    return {data_.data() + f * shape_.frame_size(), shape_.frame_size()};
}

std::span<cfloat> ComplexSeries::frame(int f) {
    return {data_.data() + f * shape_.frame_size(), shape_.frame_size()};
}

std::string to_string(SamplingScheme s) {
    switch (s) {
    case SamplingScheme::CartesianVD: return "cartesian";
    case SamplingScheme::Radial: return "radial";
    default: return "unknown";
    }
}

SamplingScheme parse_scheme(std::string const &s) {
    if (s == "cartesian") return SamplingScheme::CartesianVD;
    if (s == "radial") return SamplingScheme::Radial;
    throw std::invalid_argument("unknown sampling scheme '" + s + "'");
}

std::size_t SamplingMask::count() const {
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](auto b) { return b != 0; }));
}

std::size_t SamplingMask::count_frame(int f) const {
    auto const n = shape.frame_size();
    auto first = bits.begin() + static_cast<std::ptrdiff_t>(f * n);
    return static_cast<std::size_t>(std::count_if(first, first + static_cast<std::ptrdiff_t>(n), [](auto b) { return b != 0; }));
}

double SamplingMask::achieved_R() const {
    auto const c = count();
    return c == 0 ? std::numeric_limits<double>::infinity() : static_cast<double>(shape.size()) / c;
}

double SamplingMask::frame_fraction(int f) const {
    return static_cast<double>(count_frame(f)) / static_cast<double>(shape.frame_size());
}

std::string to_string(MapKind k) {
    switch (k) {
    case MapKind::CBF: return "CBF";
    case MapKind::CBV: return "CBV";
    case MapKind::MTT: return "MTT";
    case MapKind::KTRANS: return "KTRANS";
    case MapKind::VP: return "VP";
    case MapKind::T1: return "T1";
    case MapKind::M: return "M";
    default: return "UNKNOWN";
    }
}

ParameterMap::ParameterMap(int nx_, int ny_, MapKind k, std::string u)
    : nx(nx_), ny(ny_), data(static_cast<std::size_t>(nx_) * ny_, 0.f), kind(k), units(std::move(u)) {
    if (nx < 1 || ny < 1) {
        throw std::invalid_argument("map dimensions must be positive");
    }
}

TimeCurve::TimeCurve(std::vector<double> v, double dt_) : values(std::move(v)), dt(dt_) {
    if (values.size() < 2) {
        throw std::invalid_argument("time curve needs at least 2 samples");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("time curve dt must be positive");
    }
}

void write_curve_csv(std::string const &path, TimeCurve const &c) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << "t_seconds,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < c.size(); ++i) {
        out << c.time(i) << ',' << c.values[i] << '\n';
    }
}

WorkSeries::WorkSeries(Shape s, double dt_) : shape(s), dt(dt_), data(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(s.size()))) {
    check_shape(shape);
}

WorkSeries::WorkSeries(ComplexSeries const &src)
    : shape(src.shape()), dt(src.dt()), data(static_cast<Eigen::Index>(src.shape().size())) {
    auto const &d = src.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
        data[static_cast<Eigen::Index>(i)] = cdouble(d[i].real(), d[i].imag());
    }
}

ImageSeries WorkSeries::to_image() const {
    std::vector<cfloat> out(shape.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto const &z = data[static_cast<Eigen::Index>(i)];
        out[i] = cfloat(static_cast<float>(z.real()), static_cast<float>(z.imag()));
    }
    return ImageSeries(shape, dt, std::move(out));
}

Normalized minmax_normalize(ImageSeries const &series) {
    auto const &d = series.data();
    if (d.empty()) {
        throw std::invalid_argument("empty series");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (auto const &z : d) {
        double const m = std::abs(std::complex<double>(z));
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    if (!(hi > lo)) {
        throw std::invalid_argument("degenerate dynamic range");
    }
    double const scale = 1.0 / (hi - lo);
    std::vector<cfloat> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::complex<double> const z(d[i]);
        double const m = std::abs(z);
        double const nm = std::clamp((m - lo) * scale, 0.0, 1.0);
        auto const v = m > 0.0 ? z * (nm / m) : std::complex<double>(nm, 0.0);
        out[i] = cfloat(static_cast<float>(v.real()), static_cast<float>(v.imag()));
    }
    return {ImageSeries(series.shape(), series.dt(), std::move(out)), lo, hi};
}

ImageSeries denormalize(ImageSeries const &series, double min, double max) {
    auto const &d = series.data();
    std::vector<cfloat> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::complex<double> const z(d[i]);
        double const m = std::abs(z);
        double const dm = m * (max - min) + min;
        auto const v = m > 0.0 ? z * (dm / m) : std::complex<double>(dm, 0.0);
        out[i] = cfloat(static_cast<float>(v.real()), static_cast<float>(v.imag()));
    }
    return ImageSeries(series.shape(), series.dt(), std::move(out));
}

ImageSeries magnitude(ImageSeries const &series) {
    auto const &d = series.data();
    std::vector<cfloat> out(d.size());
    std::transform(d.begin(), d.end(), out.begin(), [](cfloat z) {
        return cfloat(std::hypot(z.real(), z.imag()), 0.f);
    });
    return ImageSeries(series.shape(), series.dt(), std::move(out));
}

} // namespace perf
