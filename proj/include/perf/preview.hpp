#pragma once

#include "perf/volume.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace perf {

/// p-th percentile (0..100) with linear interpolation between order statistics.
double percentile(std::vector<double> values, double p);

/// 8-bit binary PGM, linear window [0, 99th percentile].
void write_pgm(std::string const &path, ParameterMap const &map);
/// Magnitude of one frame, same windowing.
void write_pgm(std::string const &path, ImageSeries const &series, int frame);

/// Region files: CSV with an "x,y" header, one voxel per row.
void write_region_csv(std::string const &path, std::vector<std::uint8_t> const &region, int nx, int ny);
std::vector<std::uint8_t> read_region_csv(std::string const &path, int nx, int ny);
/// ".csv" via read_region_csv, anything else as a mask container (first frame).
std::vector<std::uint8_t> load_region(std::string const &path, int nx, int ny);

} // namespace perf
