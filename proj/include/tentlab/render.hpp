#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tentlab/acim.hpp"
#include "tentlab/disk.hpp"
#include "tentlab/stability.hpp"

namespace tentlab {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  Image(int w, int h, Rgb fill = {255, 255, 255});
  void set(int x, int y, Rgb c);
  Rgb get(int x, int y) const;
};

/// Throws std::runtime_error naming the path on any I/O failure.
void write_png(const std::string& path, const Image& img);

struct Rendering {
  Image image;
  std::string csv;
};

/// Bar plot of the Ulam acim; CSV is the density.
Rendering render_acim(const TentMap& map, std::size_t bins, int width = 800, int height = 400);

/// Scatter of (x1, x0) over thread-sampler windows, i.e. a planar shadow of
/// the inverse limit; CSV rows are x0,x1.
Rendering render_delay(const TentMap& map, std::int64_t samples, std::uint64_t seed, int size = 600);

/// Plane trajectory of H_t from `start`; CSV rows are step,y,s,u,v.
Rendering render_disk_orbit(const TentMap& map, const CylinderPoint& start, int steps, std::uint64_t seed,
                            int size = 600);

/// Each y column of a report against its x column, one fixed colour per curve.
Rendering render_sweep_curves(const SweepReport& report, const std::string& x_column,
                              const std::vector<std::string>& y_columns, bool log_y, int width = 800,
                              int height = 500);

/// Reads the column/row part of a report CSV (comment lines are skipped).
SweepReport read_report_csv(std::istream& is);

}  // namespace tentlab
