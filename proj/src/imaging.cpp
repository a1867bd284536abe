#include "eustwin/imaging.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace eustwin {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Smallest 2^a 3^b 5^c >= n; sizes kissfft handles without a slow generic radix.
Eigen::Index smooth_size(Eigen::Index n) {
  for (Eigen::Index m = std::max<Eigen::Index>(n, 1);; ++m) {
    Eigen::Index r = m;
    for (Eigen::Index f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

class HilbertEnvelope {
 public:
  Eigen::VectorXd operator()(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const Eigen::Index n = x.size();
    if (n == 0) return Eigen::VectorXd();
    const Eigen::Index m = smooth_size(2 * n);
    time_.assign(static_cast<std::size_t>(m), {0.0, 0.0});
    for (Eigen::Index i = 0; i < n; ++i) time_[static_cast<std::size_t>(i)] = {x[i], 0.0};
    fft_.fwd(freq_, time_);
    // One-sided spectrum: keep DC and Nyquist, double positive, drop negative.
    const Eigen::Index half = m / 2;
    for (Eigen::Index k = 1; k < m; ++k) {
      auto& v = freq_[static_cast<std::size_t>(k)];
      if (k < (m + 1) / 2) v *= 2.0;
      else if (!(m % 2 == 0 && k == half)) v = 0.0;
    }
    fft_.inv(time_, freq_);
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = std::abs(time_[static_cast<std::size_t>(i)]);
    return out;
  }

 private:
  Eigen::FFT<double> fft_;
  std::vector<std::complex<double>> time_, freq_;
};

nlohmann::json meta_to_json(const BModeMeta& m, Eigen::Index width, Eigen::Index height) {
  return {{"format", "eustwin-bmode"},
          {"version", 1},
          {"width", width},
          {"height", height},
          {"dynamic_range_db", m.dynamic_range},
          {"ceiling", m.ceiling},
          {"depth_m", m.depth},
          {"start_range_m", m.start_range},
          {"roi_center_deg", m.roi_center},
          {"roi_span_deg", m.roi_span},
          {"transducer_id", m.transducer_id},
          {"seed", m.seed}};
}

}  // namespace

void ImagePair::validate() const {
  if (low.width() != high.width() || low.height() != high.height())
    throw DimensionMismatch("image pair dimensions differ");
  if (!low.meta.same_geometry(high.meta)) throw DataError("image pair geometry differs");
}

Eigen::VectorXd envelope(const Eigen::Ref<const Eigen::VectorXd>& rf_line) {
  HilbertEnvelope hilbert;
  return hilbert(rf_line);
}

RFMatrix envelope_frame(const RFFrame& frame) {
  HilbertEnvelope hilbert;
  RFMatrix out(frame.data.rows(), frame.data.cols());
  for (Eigen::Index k = 0; k < frame.data.rows(); ++k) {
    if ((frame.data.row(k).array() == 0.0).all()) {
      out.row(k).setZero();
      continue;
    }
    out.row(k) = hilbert(frame.data.row(k).transpose()).transpose();
  }
  return out;
}

Eigen::VectorXd resample_linear(const Eigen::Ref<const Eigen::VectorXd>& line, Eigen::Index rows) {
  if (line.size() < 2 || rows < 2) throw DimensionMismatch("resampling needs at least two samples and rows");
  Eigen::VectorXd out(rows);
  const double scale = static_cast<double>(line.size() - 1) / static_cast<double>(rows - 1);
  for (Eigen::Index j = 0; j < rows; ++j) {
    const double p = static_cast<double>(j) * scale;
    const auto i = std::min(static_cast<Eigen::Index>(p), line.size() - 2);
    const double f = p - static_cast<double>(i);
    out[j] = line[i] + f * (line[i + 1] - line[i]);
  }
  out[rows - 1] = line[line.size() - 1];
  return out;
}

BModeImage to_dataset_image(const RFFrame& frame, double dynamic_range, double ceiling,
                            Eigen::Index rows) {
  const auto& g = frame.geometry;
  if (frame.data.rows() != g.scanlines_per_frame ||
      frame.data.cols() != g.rf_samples_per_line(frame.sound_speed))
    throw DimensionMismatch("RF frame dimensions do not match its scan geometry");
  const RFMatrix env = envelope_frame(frame);
  Image resampled(rows, env.rows());
  for (Eigen::Index k = 0; k < env.rows(); ++k) resampled.col(k) = resample_linear(env.row(k).transpose(), rows);

  BModeImage image;
  image.pixels = log_compress(resampled, dynamic_range, ceiling);
  image.meta.dynamic_range = dynamic_range;
  image.meta.ceiling = ceiling;
  image.meta.depth = g.depth;
  image.meta.start_range = g.start_range;
  image.meta.roi_center = g.roi_center;
  image.meta.roi_span = g.roi_span;
  image.meta.transducer_id = frame.transducer_id;
  return image;
}

ImagePair to_image_pair(const PairedRFFrame& pair, double dynamic_range, double ceiling) {
  pair.verify_alignment();
  ImagePair images{to_dataset_image(pair.low, dynamic_range, ceiling),
                   to_dataset_image(pair.high, dynamic_range, ceiling)};
  images.validate();
  return images;
}

// ---------------------------------------------------------------------------
// Scan conversion

std::optional<Eigen::Vector2d> CartesianRaster::to_grid(const Point& p) const {
  const double range = p.norm();
  if (range < start_range || range > end_range) return std::nullopt;
  const double theta = std::atan2(-p.x(), -p.y());
  const double offset = std::remainder(theta - roi_center * kDeg, 2.0 * std::numbers::pi) / kDeg +
                        roi_span / 2.0;
  if (offset < 0.0 || offset > roi_span) return std::nullopt;
  return Eigen::Vector2d(offset / roi_span * static_cast<double>(source_cols - 1),
                         (range - start_range) / (end_range - start_range) *
                             static_cast<double>(source_rows - 1));
}

Point CartesianRaster::from_grid(double col, double row) const {
  const double angle = (roi_center - roi_span / 2.0 + col / static_cast<double>(source_cols - 1) * roi_span) * kDeg;
  const double range = start_range + row / static_cast<double>(source_rows - 1) * (end_range - start_range);
  return Point(-range * std::sin(angle), -range * std::cos(angle));
}

CartesianRaster scan_convert(const BModeImage& image, const ScanConvertOptions& options) {
  if (!(options.pixel_size > 0.0)) throw ConfigError("pixel_size must be > 0");
  if (image.width() < 2 || image.height() < 2) throw DimensionMismatch("image too small to scan convert");
  const auto& m = image.meta;
  CartesianRaster raster;
  raster.pixel_size = options.pixel_size;
  raster.start_range = m.start_range;
  raster.end_range = m.start_range + m.depth;
  raster.roi_center = m.roi_center;
  raster.roi_span = m.roi_span;
  raster.source_cols = image.width();
  raster.source_rows = image.height();

  // Bounding box of the fan in a frame where the ROI center points along +z,
  // then rotated into the image plane for non-default centers.
  const double half = m.roi_span / 2.0 * kDeg;
  const double x_half = half >= std::numbers::pi / 2.0 ? raster.end_range : raster.end_range * std::sin(half);
  const double z_lo = std::min(raster.start_range * std::cos(half), raster.end_range * std::cos(half));
  raster.x_min = -x_half;
  raster.z_min = z_lo;
  const auto cols = static_cast<Eigen::Index>(std::ceil(2.0 * x_half / options.pixel_size)) + 1;
  const auto rows = static_cast<Eigen::Index>(std::ceil((raster.end_range - z_lo) / options.pixel_size)) + 1;
  raster.pixels = Image::Zero(rows, cols);

  // The raster is laid out for roi_center = 180 deg; other centers rotate
  // the sampling point back into the fan.
  const double rot = (m.roi_center - 180.0) * kDeg;
  const double cr = std::cos(rot), sr = std::sin(rot);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Point q = raster.pixel_center(r, c);
      const Point p(cr * q.x() + sr * q.y(), -sr * q.x() + cr * q.y());
      const auto g = raster.to_grid(p);
      if (!g) continue;
      const double gc = (*g)[0], gr = (*g)[1];
      const auto c0 = std::min(static_cast<Eigen::Index>(gc), raster.source_cols - 2);
      const auto r0 = std::min(static_cast<Eigen::Index>(gr), raster.source_rows - 2);
      const double fc = gc - static_cast<double>(c0), fr = gr - static_cast<double>(r0);
      const auto& px = image.pixels;
      raster.pixels(r, c) = (1 - fr) * ((1 - fc) * px(r0, c0) + fc * px(r0, c0 + 1)) +
                            fr * ((1 - fc) * px(r0 + 1, c0) + fc * px(r0 + 1, c0 + 1));
    }
  }
  return raster;
}

// ---------------------------------------------------------------------------
// Files

void write_pgm(const std::filesystem::path& path, const Image& pixels, double ceiling) {
  if (!(ceiling > 0.0)) throw ConfigError("ceiling must be > 0");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << pixels.cols() << " " << pixels.rows() << "\n255\n";
  std::vector<unsigned char> bytes(static_cast<std::size_t>(pixels.size()));
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < pixels.rows(); ++r)
    for (Eigen::Index c = 0; c < pixels.cols(); ++c)
      bytes[i++] = static_cast<unsigned char>(std::lround(std::clamp(pixels(r, c) * 255.0 / ceiling, 0.0, 255.0)));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  auto token = [&]() {
    std::string t;
    char ch;
    while (in.get(ch)) {
      if (ch == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(ch);
    }
    return t;
  };
  if (token() != "P5") throw DataError(path.string() + " is not a binary PGM");
  long width = 0, height = 0, maxval = 0;
  try {
    width = std::stol(token());
    height = std::stol(token());
    maxval = std::stol(token());
  } catch (const std::exception&) {
    throw DataError(path.string() + ": malformed PGM header");
  }
  if (width <= 0 || height <= 0 || maxval != 255) throw DataError(path.string() + ": unsupported PGM header");
  std::vector<unsigned char> bytes(static_cast<std::size_t>(width * height));
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
    throw DataError(path.string() + ": truncated PGM");
  Image img(height, width);
  std::size_t i = 0;
  for (long r = 0; r < height; ++r)
    for (long c = 0; c < width; ++c) img(r, c) = bytes[i++];
  return img;
}

void write_bmode(const std::filesystem::path& pgm_path, const BModeImage& image) {
  write_pgm(pgm_path, image.pixels, image.meta.ceiling);
  auto sidecar = pgm_path;
  sidecar.replace_extension(".json");
  std::ofstream out(sidecar);
  if (!out) throw DataError("cannot write " + sidecar.string());
  out << meta_to_json(image.meta, image.width(), image.height()).dump(2) << "\n";
}

BModeImage read_bmode(const std::filesystem::path& pgm_path) {
  BModeImage image;
  image.pixels = read_pgm(pgm_path);
  auto sidecar = pgm_path;
  sidecar.replace_extension(".json");
  std::ifstream in(sidecar);
  if (!in) {
    // Bare rasters (e.g. generated patches) carry default metadata.
    return image;
  }
  try {
    const auto doc = nlohmann::json::parse(in);
    auto& m = image.meta;
    m.dynamic_range = doc.at("dynamic_range_db").get<double>();
    m.ceiling = doc.at("ceiling").get<double>();
    m.depth = doc.at("depth_m").get<double>();
    m.start_range = doc.at("start_range_m").get<double>();
    m.roi_center = doc.at("roi_center_deg").get<double>();
    m.roi_span = doc.at("roi_span_deg").get<double>();
    m.transducer_id = doc.at("transducer_id").get<std::string>();
    m.seed = doc.value("seed", std::uint64_t{0});
    if (doc.at("width").get<Eigen::Index>() != image.width() ||
        doc.at("height").get<Eigen::Index>() != image.height())
      throw DimensionMismatch(sidecar.string() + " does not describe " + pgm_path.string());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(sidecar.string() + ": " + e.what());
  }
  // Stored pixels are 8-bit; bring them back to the recorded ceiling.
  if (image.meta.ceiling != 255.0) image.pixels *= image.meta.ceiling / 255.0;
  return image;
}

}  // namespace eustwin
