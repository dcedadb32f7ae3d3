#pragma once

#include "perf/volume.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace perf {

/*
 * ".pvol" container
 *
 *   bytes 0-7   magic "PVOL0001"
 *   u8          dtype (1 = complex64, 2 = float32, 3 = u8 mask)
 *   u8          rank
 *   rank x u32  dims, little-endian
 *   f64         dt, little-endian (0 if not applicable)
 *   payload     raw little-endian values
 */
enum class DType : std::uint8_t { Complex64 = 1, Float32 = 2, Mask8 = 3 };

struct Container {
    DType dtype = DType::Complex64;
    std::vector<std::uint32_t> dims;
    double dt = 0.0;
    std::vector<std::uint8_t> payload;

    std::size_t element_count() const;
};

std::size_t dtype_size(DType d);

std::vector<std::uint8_t> encode_container(Container const &c);
Container decode_container(std::vector<std::uint8_t> const &bytes);

void save_container(std::string const &path, Container const &c);
Container load_container(std::string const &path);

void save_container(std::string const &path, ComplexSeries const &s);
void save_container(std::string const &path, SamplingMask const &m);
void save_container(std::string const &path, ParameterMap const &m);

ImageSeries load_image_series(std::string const &path);
KSpaceSeries load_kspace_series(std::string const &path);
SamplingMask load_mask(std::string const &path);
ParameterMap load_parameter_map(std::string const &path, MapKind kind = MapKind::Unknown);

} // namespace perf
