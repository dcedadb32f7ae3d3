#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace perf {

using cfloat = std::complex<float>;
using cdouble = std::complex<double>;

/// Grid shape of a dynamic series. Frame-major: x fastest, then y, then t.
struct Shape {
    int nx = 0;
    int ny = 0;
    int t = 0;

    std::size_t frame_size() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t size() const { return frame_size() * t; }
    std::size_t index(int x, int y, int frame) const {
        return (static_cast<std::size_t>(frame) * ny + y) * nx + x;
    }
    bool operator==(Shape const &) const = default;
};

void check_shape(Shape const &s);

/*
 * Complex single-precision series shared by image and k-space data.
 * ImageSeries and KSpaceSeries are distinct types so the encoder signatures
 * can't be called with the wrong domain.
 */
class ComplexSeries {
public:
    ComplexSeries() = default;
    ComplexSeries(Shape shape, double dt);
    ComplexSeries(Shape shape, double dt, std::vector<cfloat> data);

    Shape const &shape() const { return shape_; }
    int nx() const { return shape_.nx; }
    int ny() const { return shape_.ny; }
    int t() const { return shape_.t; }
    double dt() const { return dt_; }

    std::vector<cfloat> const &data() const { return data_; }
    std::vector<cfloat> &data() { return data_; }

    std::span<cfloat const> frame(int f) const;
    std::span<cfloat> frame(int f);

    cfloat operator()(int x, int y, int f) const { return data_[shape_.index(x, y, f)]; }
    cfloat &operator()(int x, int y, int f) { return data_[shape_.index(x, y, f)]; }

private:
    Shape shape_;
    double dt_ = 1.0;
    std::vector<cfloat> data_;
};

class ImageSeries : public ComplexSeries {
public:
    using ComplexSeries::ComplexSeries;
};

/// Unsampled entries are stored as exact zeros. Layout is FFT-native (DC at index 0).
class KSpaceSeries : public ComplexSeries {
public:
    using ComplexSeries::ComplexSeries;
};

enum class SamplingScheme : std::uint8_t { Unknown = 0, CartesianVD = 1, Radial = 2 };

std::string to_string(SamplingScheme s);
SamplingScheme parse_scheme(std::string const &s);

/// Binary acquisition pattern per (kx, ky, frame) in FFT-native layout.
struct SamplingMask {
    Shape shape;
    std::vector<std::uint8_t> bits;
    SamplingScheme scheme = SamplingScheme::Unknown;
    double requested_R = 1.0;
    std::uint64_t seed = 0;

    bool sampled(int kx, int ky, int f) const { return bits[shape.index(kx, ky, f)] != 0; }
    std::size_t count() const;
    std::size_t count_frame(int f) const;
    double achieved_R() const;
    double frame_fraction(int f) const;
};

enum class MapKind : std::uint8_t { CBF, CBV, MTT, KTRANS, VP, T1, M, Unknown };

std::string to_string(MapKind k);

struct ParameterMap {
    int nx = 0;
    int ny = 0;
    std::vector<float> data;
    MapKind kind = MapKind::Unknown;
    std::string units;

    ParameterMap() = default;
    ParameterMap(int nx_, int ny_, MapKind k, std::string u = {});
    float operator()(int x, int y) const { return data[static_cast<std::size_t>(y) * nx + x]; }
    float &operator()(int x, int y) { return data[static_cast<std::size_t>(y) * nx + x]; }
};

struct TimeCurve {
    std::vector<double> values;
    double dt = 1.0;

    TimeCurve() = default;
    TimeCurve(std::vector<double> v, double dt_);
    std::size_t size() const { return values.size(); }
    double time(std::size_t i) const { return static_cast<double>(i) * dt; }
};

void write_curve_csv(std::string const &path, TimeCurve const &c);

/// Double-precision working copy used inside the solvers.
struct WorkSeries {
    Shape shape;
    double dt = 1.0;
    Eigen::VectorXcd data;

    WorkSeries() = default;
    WorkSeries(Shape s, double dt_);
    explicit WorkSeries(ComplexSeries const &src);

    auto frame(int f) { return data.segment(static_cast<Eigen::Index>(f * shape.frame_size()), shape.frame_size()); }
    auto frame(int f) const {
        return data.segment(static_cast<Eigen::Index>(f * shape.frame_size()), shape.frame_size());
    }
    ImageSeries to_image() const;
};

struct Normalized {
    ImageSeries series;
    double min = 0.0;
    double max = 1.0;
};

/*
 * Global min-max normalization of magnitudes, phase preserved.
 * Throws std::invalid_argument("degenerate dynamic range") on a constant series.
 */
Normalized minmax_normalize(ImageSeries const &series);
ImageSeries denormalize(ImageSeries const &series, double min, double max);

ImageSeries magnitude(ImageSeries const &series);

} // namespace perf
