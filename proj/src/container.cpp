#include "perf/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace perf {

namespace {

constexpr char kMagic[8] = {'P', 'V', 'O', 'L', '0', '0', '0', '1'};

template <typename U>
void put_le(std::vector<std::uint8_t> &out, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

template <typename U>
U get_le(std::vector<std::uint8_t> const &in, std::size_t &pos) {
    if (pos + sizeof(U) > in.size()) {
        throw std::runtime_error("truncated .pvol header");
    }
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        v |= static_cast<U>(in[pos + i]) << (8 * i);
    }
    pos += sizeof(U);
    return v;
}

void put_f32(std::vector<std::uint8_t> &out, float f) { put_le(out, std::bit_cast<std::uint32_t>(f)); }

float get_f32(std::uint8_t const *p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    }
    return std::bit_cast<float>(v);
}

Container from_series(ComplexSeries const &s) {
    Container c;
    c.dtype = DType::Complex64;
    c.dims = {static_cast<std::uint32_t>(s.nx()), static_cast<std::uint32_t>(s.ny()),
              static_cast<std::uint32_t>(s.t())};
    c.dt = s.dt();
    c.payload.reserve(s.data().size() * 8);
    for (auto const &z : s.data()) {
        put_f32(c.payload, z.real());
        put_f32(c.payload, z.imag());
    }
    return c;
}

template <typename Series>
Series to_series(Container const &c) {
    if (c.dtype != DType::Complex64 || c.dims.size() != 3) {
        throw std::runtime_error("container does not hold a complex64 rank-3 series");
    }
    Shape const shape{static_cast<int>(c.dims[0]), static_cast<int>(c.dims[1]), static_cast<int>(c.dims[2])};
    std::vector<cfloat> data(shape.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = cfloat(get_f32(&c.payload[8 * i]), get_f32(&c.payload[8 * i + 4]));
    }
    return Series(shape, c.dt > 0.0 ? c.dt : 1.0, std::move(data));
}

} // namespace

std::size_t dtype_size(DType d) {
    switch (d) {
    case DType::Complex64: return 8;
    case DType::Float32: return 4;
    case DType::Mask8: return 1;
    }
    throw std::runtime_error("unknown dtype code " + std::to_string(static_cast<int>(d)));
}

std::size_t Container::element_count() const {
    std::size_t n = 1;
    for (auto d : dims) {
        n *= d;
    }
    return n;
}

std::vector<std::uint8_t> encode_container(Container const &c) {
    if (c.payload.size() != c.element_count() * dtype_size(c.dtype)) {
        throw std::runtime_error("payload size does not match dims");
    }
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.push_back(static_cast<std::uint8_t>(c.dtype));
    out.push_back(static_cast<std::uint8_t>(c.dims.size()));
    for (auto d : c.dims) {
        put_le(out, d);
    }
    put_le(out, std::bit_cast<std::uint64_t>(c.dt));
    out.insert(out.end(), c.payload.begin(), c.payload.end());
    return out;
}

Container decode_container(std::vector<std::uint8_t> const &bytes) {
    if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
        throw std::runtime_error("bad magic: not a PVOL0001 container");
    }
    std::size_t pos = 8;
    auto const code = bytes[pos++];
    if (code < 1 || code > 3) {
        throw std::runtime_error("unknown dtype code " + std::to_string(code));
    }
    Container c;
    c.dtype = static_cast<DType>(code);
    auto const rank = bytes[pos++];
    if (rank == 0) {
        throw std::runtime_error("container rank must be at least 1");
    }
    for (int i = 0; i < rank; ++i) {
        c.dims.push_back(get_le<std::uint32_t>(bytes, pos));
    }
    c.dt = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
    auto const expected = c.element_count() * dtype_size(c.dtype);
    if (bytes.size() - pos != expected) {
        throw std::runtime_error("payload size mismatch: expected " + std::to_string(expected) + " bytes, found " +
                                 std::to_string(bytes.size() - pos));
    }
    c.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
    return c;
}

void save_container(std::string const &path, Container const &c) {
    auto const bytes = encode_container(c);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out.write(reinterpret_cast<char const *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

Container load_container(std::string const &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_container(bytes);
}

void save_container(std::string const &path, ComplexSeries const &s) { save_container(path, from_series(s)); }

void save_container(std::string const &path, SamplingMask const &m) {
    Container c;
    c.dtype = DType::Mask8;
    c.dims = {static_cast<std::uint32_t>(m.shape.nx), static_cast<std::uint32_t>(m.shape.ny),
              static_cast<std::uint32_t>(m.shape.t)};
    c.payload = m.bits;
    save_container(path, c);
}

void save_container(std::string const &path, ParameterMap const &m) {
    Container c;
    c.dtype = DType::Float32;
    c.dims = {static_cast<std::uint32_t>(m.nx), static_cast<std::uint32_t>(m.ny)};
    c.payload.reserve(m.data.size() * 4);
    for (float v : m.data) {
        put_f32(c.payload, v);
    }
    save_container(path, c);
}

ImageSeries load_image_series(std::string const &path) { return to_series<ImageSeries>(load_container(path)); }

KSpaceSeries load_kspace_series(std::string const &path) { return to_series<KSpaceSeries>(load_container(path)); }

SamplingMask load_mask(std::string const &path) {
    auto c = load_container(path);
    if (c.dtype != DType::Mask8 || c.dims.size() != 3) {
        throw std::runtime_error(path + " does not hold a rank-3 u8 mask");
    }
    SamplingMask m;
    m.shape = {static_cast<int>(c.dims[0]), static_cast<int>(c.dims[1]), static_cast<int>(c.dims[2])};
    m.bits = std::move(c.payload);
    return m;
}

ParameterMap load_parameter_map(std::string const &path, MapKind kind) {
    auto const c = load_container(path);
    if (c.dtype != DType::Float32 || c.dims.size() != 2) {
        throw std::runtime_error(path + " does not hold a rank-2 float32 map");
    }
    ParameterMap m(static_cast<int>(c.dims[0]), static_cast<int>(c.dims[1]), kind);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        m.data[i] = get_f32(&c.payload[4 * i]);
    }
    return m;
}

} // namespace perf
