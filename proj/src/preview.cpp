#include "perf/preview.hpp"

#include "perf/container.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace perf {

double percentile(std::vector<double> values, double p) {
    if (values.empty()) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    double const pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
    auto const lo = static_cast<std::size_t>(std::floor(pos));
    auto const hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

void write_gray(std::string const &path, std::vector<double> const &v, int nx, int ny) {
    double const top = percentile(v, 99.0);
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot write " + path);
    }
    os << "P5\n" << nx << ' ' << ny << "\n255\n";
    std::vector<unsigned char> px(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double const s = top > 0.0 ? std::clamp(v[i] / top, 0.0, 1.0) : 0.0;
        px[i] = static_cast<unsigned char>(std::lround(255.0 * s));
    }
    os.write(reinterpret_cast<char const *>(px.data()), static_cast<std::streamsize>(px.size()));
}

} // namespace

void write_pgm(std::string const &path, ParameterMap const &map) {
    write_gray(path, std::vector<double>(map.data.begin(), map.data.end()), map.nx, map.ny);
}

void write_pgm(std::string const &path, ImageSeries const &series, int frame) {
    auto const f = series.frame(frame);
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        v[i] = std::abs(std::complex<double>(f[i]));
    }
    write_gray(path, v, series.nx(), series.ny());
}

void write_region_csv(std::string const &path, std::vector<std::uint8_t> const &region, int nx, int ny) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write " + path);
    }
    os << "x,y\n";
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            if (region[static_cast<std::size_t>(y) * nx + x]) {
                os << x << ',' << y << '\n';
            }
        }
    }
}

std::vector<std::uint8_t> read_region_csv(std::string const &path, int nx, int ny) {
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot read " + path);
    }
    std::vector<std::uint8_t> region(static_cast<std::size_t>(nx) * ny, 0);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line.find_first_not_of("0123456789,- \r") != std::string::npos) {
            continue; // header
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        int x = -1;
        int y = -1;
        if (!(ls >> x >> y) || x < 0 || y < 0 || x >= nx || y >= ny) {
            throw std::invalid_argument("region voxel out of range in " + path + ": " + line);
        }
        region[static_cast<std::size_t>(y) * nx + x] = 1;
    }
    return region;
}

std::vector<std::uint8_t> load_region(std::string const &path, int nx, int ny) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
        return read_region_csv(path, nx, ny);
    }
    auto const m = load_mask(path);
    if (m.shape.nx != nx || m.shape.ny != ny) {
        throw std::invalid_argument("region mask geometry differs from the series");
    }
    return {m.bits.begin(), m.bits.begin() + static_cast<std::ptrdiff_t>(m.shape.frame_size())};
}

} // namespace perf
