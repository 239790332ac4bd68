#include "tentlab/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <png.h>

#include "tentlab/error.hpp"
#include "tentlab/format.hpp"
#include "tentlab/inverse_limit.hpp"

namespace tentlab {

namespace {

constexpr Rgb kAxis{150, 150, 150};
constexpr Rgb kBar{70, 110, 170};
constexpr Rgb kPoint{20, 40, 120};
constexpr Rgb kOrbit{200, 60, 30};
constexpr Rgb kDisk{225, 225, 225};
constexpr Rgb kCurve[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40}, {148, 103, 189},
                          {140, 86, 75},  {227, 119, 194}, {127, 127, 127}};

void draw_line(Image& img, double x0, double y0, double x1, double y1, Rgb c) {
  const int steps = static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))) + 1;
  for (int i = 0; i <= steps; ++i) {
    const double a = static_cast<double>(i) / steps;
    img.set(static_cast<int>(std::lround(x0 + a * (x1 - x0))), static_cast<int>(std::lround(y0 + a * (y1 - y0))), c);
  }
}

}  // namespace

Image::Image(int w, int h, Rgb fill) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
  if (w <= 0 || h <= 0) throw DomainError("image dimensions must be positive");
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = fill.r;
    rgb[i + 1] = fill.g;
    rgb[i + 2] = fill.b;
  }
}

void Image::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const auto i = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[i] = c.r;
  rgb[i + 1] = c.g;
  rgb[i + 2] = c.b;
}

Rgb Image::get(int x, int y) const {
  const auto i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

void write_png(const std::string& path, const Image& img) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("cannot open '" + path + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng initialisation failed for '" + path + "'");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("error while writing PNG '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    png_write_row(png, img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::ferror(fp.get())) throw std::runtime_error("I/O error writing '" + path + "'");
}

Rendering render_acim(const TentMap& map, std::size_t bins, int width, int height) {
  const Density d = stationary_density(ulam_operator(map, bins));
  Image img(width, height);
  const double top = *std::max_element(d.weights().begin(), d.weights().end()) * 1.05;
  const int base = height - 1;
  for (int px = 0; px < width; ++px) {
    const double x = -1.0 + 2.0 * (px + 0.5) / width;
    const int bar = static_cast<int>(std::lround(d[d.bin_of(x)] / top * (height - 1)));
    for (int py = base; py > base - bar; --py) img.set(px, py, kBar);
  }
  draw_line(img, 0, base, width - 1, base, kAxis);
  std::ostringstream os;
  write_density_csv(os, d, {std::string("tentlab ") + TENTLAB_VERSION + " render=acim t=" +
                                format_double(map.slope()) + " bins=" + std::to_string(bins)});
  return {std::move(img), os.str()};
}

Rendering render_delay(const TentMap& map, std::int64_t samples, std::uint64_t seed, int size) {
  ThreadSamplerParams sp;
  sp.orbit_length = samples + 1000 + 2 - 1;
  sp.depth = 2;
  sp.burnin = 1000;
  sp.seed = seed;
  ThreadSampler sampler(map, sp);
  Image img(size, size);
  draw_line(img, 0, size / 2.0, size - 1, size / 2.0, kAxis);
  draw_line(img, size / 2.0, 0, size / 2.0, size - 1, kAxis);
  std::ostringstream os;
  os << "# tentlab " << TENTLAB_VERSION << " render=delay t=" << format_double(map.slope())
     << " samples=" << samples << " seed=" << seed << '\n';
  os << "x0,x1\n";
  Thread th;
  while (sampler.next(th)) {
    const double x0 = th.x[0], x1 = th.x[1];
    os << format_double(x0) << ',' << format_double(x1) << '\n';
    const int px = static_cast<int>((x1 + 1.0) / 2.0 * (size - 1));
    const int py = static_cast<int>((1.0 - x0) / 2.0 * (size - 1));
    img.set(px, py, kPoint);
  }
  return {std::move(img), os.str()};
}

Rendering render_disk_orbit(const TentMap& map, const CylinderPoint& start, int steps, std::uint64_t seed,
                            int size) {
  if (steps < 0) throw DomainError("orbit steps must be nonnegative");
  Image img(size, size);
  auto to_px = [&](const PlanePoint& q) {
    return std::pair{(q.u + 2.0) / 4.0 * (size - 1), (2.0 - q.v) / 4.0 * (size - 1)};
  };
  for (int py = 0; py < size; ++py) {
    for (int px = 0; px < size; ++px) {
      const double u = 4.0 * px / (size - 1) - 2.0, v = 2.0 - 4.0 * py / (size - 1);
      if (u * u + v * v <= 4.0) img.set(px, py, kDisk);
    }
  }
  auto [ax, ay] = to_px({-1.0, 0.0});
  auto [bx, by] = to_px({1.0, 0.0});
  draw_line(img, ax, ay, bx, by, kAxis);

  std::ostringstream os;
  os << "# tentlab " << TENTLAB_VERSION << " render=disk_orbit t=" << format_double(map.slope())
     << " y0=" << format_double(start.y) << " s0=" << format_double(start.s) << " steps=" << steps
     << " seed=" << seed << '\n';
  os << "step,y,s,u,v\n";
  CylinderPoint z = start;
  std::unique_ptr<DitheredOrbit> on_i;
  PlanePoint prev = eta(z);
  for (int i = 0; i <= steps; ++i) {
    if (i > 0) {
      if (on_i) {
        z = interval_point(on_i->next());
      } else {
        z = h_step(map, z);
        if (on_interval(z)) on_i = std::make_unique<DitheredOrbit>(map, std::cos(z.y), seed);
      }
    }
    const PlanePoint q = eta(z);
    os << i << ',' << format_double(z.y) << ',' << format_double(z.s) << ',' << format_double(q.u) << ','
       << format_double(q.v) << '\n';
    auto [px, py] = to_px(q);
    if (i > 0 && !on_interval(z)) {
      auto [qx, qy] = to_px(prev);
      draw_line(img, qx, qy, px, py, kOrbit);
    }
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        img.set(static_cast<int>(px) + dx, static_cast<int>(py) + dy, kOrbit);
      }
    }
    prev = q;
  }
  return {std::move(img), os.str()};
}

Rendering render_sweep_curves(const SweepReport& report, const std::string& x_column,
                              const std::vector<std::string>& y_columns, bool log_y, int width, int height) {
  const std::vector<double> xs = report.column(x_column);
  std::vector<std::vector<double>> ys;
  for (const auto& name : y_columns) ys.push_back(report.column(name));
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (const auto& col : ys) {
      const double v = ty(col[i]);
      if (!std::isfinite(v) || !std::isfinite(xs[i])) continue;
      xmin = std::min(xmin, xs[i]);
      xmax = std::max(xmax, xs[i]);
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  Image img(width, height);
  const int pad = 20;
  auto px = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (width - 2 * pad); };
  auto py = [&](double y) { return height - pad - (y - ymin) / (ymax - ymin) * (height - 2 * pad); };
  draw_line(img, pad, height - pad, width - pad, height - pad, kAxis);
  draw_line(img, pad, pad, pad, height - pad, kAxis);

  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::ostringstream os;
  os << "# tentlab " << TENTLAB_VERSION << " render=sweep_curves source=" << report.kind << " log_y=" << log_y
     << '\n';
  os << x_column;
  for (const auto& name : y_columns) os << ',' << name;
  os << '\n';
  for (std::size_t c = 0; c < ys.size(); ++c) {
    const Rgb color = kCurve[c % std::size(kCurve)];
    bool have_prev = false;
    double lx = 0.0, ly = 0.0;
    for (std::size_t i : order) {
      const double v = ty(ys[c][i]);
      if (!std::isfinite(v) || !std::isfinite(xs[i])) {
        have_prev = false;
        continue;
      }
      const double cx = px(xs[i]), cy = py(v);
      if (have_prev) draw_line(img, lx, ly, cx, cy, color);
      for (int d = -2; d <= 2; ++d) {
        img.set(static_cast<int>(cx) + d, static_cast<int>(cy), color);
        img.set(static_cast<int>(cx), static_cast<int>(cy) + d, color);
      }
      lx = cx;
      ly = cy;
      have_prev = true;
    }
  }
  for (std::size_t i : order) {
    os << format_double(xs[i]);
    for (const auto& col : ys) os << ',' << format_double(col[i]);
    os << '\n';
  }
  return {std::move(img), os.str()};
}

SweepReport read_report_csv(std::istream& is) {
  SweepReport rep;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto k = line.find("report=");
      if (k != std::string::npos) rep.kind = line.substr(k + 7);
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (rep.columns.empty()) {
      rep.columns = cells;
      continue;
    }
    if (cells.size() != rep.columns.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(rep.columns.size()) +
                       " columns");
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      if (c == "nan" || c == "-nan") {
        row.push_back(std::nan(""));
      } else if (c == "inf") {
        row.push_back(INFINITY);
      } else {
        row.push_back(parse_double(c));
      }
    }
    rep.rows.push_back(std::move(row));
  }
  if (rep.columns.empty()) throw ParseError("report CSV has no header row");
  return rep;
}

}  // namespace tentlab
