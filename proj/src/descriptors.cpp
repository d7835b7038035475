#include "vpr/descriptors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "vpr/error.hpp"

namespace vpr {
namespace {

constexpr const char* kModule = "descriptors";

struct Tap {
  int src;
  double weight;
};

// Overlap of each output cell [k*ratio, (k+1)*ratio) with the source pixels.
std::vector<std::vector<Tap>> area_taps(int src_len, int dst_len) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(dst_len));
  const double ratio = static_cast<double>(src_len) / dst_len;
  for (int k = 0; k < dst_len; ++k) {
    const double lo = k * ratio;
    const double hi = (k + 1) * ratio;
    for (int s = static_cast<int>(std::floor(lo)); s < src_len && s < hi; ++s) {
      const double overlap = std::min<double>(s + 1, hi) - std::max<double>(s, lo);
      if (overlap > 0.0) taps[static_cast<std::size_t>(k)].push_back({s, overlap / ratio});
    }
  }
  return taps;
}

std::vector<double> downsample_area(const ImageFrame& img, int width, int height) {
  const auto xt = area_taps(img.width, width);
  const auto yt = area_taps(img.height, height);

  // Horizontal pass, then vertical.
  std::vector<double> rows(static_cast<std::size_t>(img.height) * width, 0.0);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (const auto& t : xt[static_cast<std::size_t>(x)]) acc += t.weight * img.at(t.src, y);
      rows[static_cast<std::size_t>(y) * width + x] = acc;
    }

  std::vector<double> out(static_cast<std::size_t>(height) * width, 0.0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (const auto& t : yt[static_cast<std::size_t>(y)]) acc += t.weight * rows[static_cast<std::size_t>(t.src) * width + x];
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  return out;
}

void normalize_patch(std::vector<double>& img, int width, int x0, int y0, int pw, int ph) {
  const double count = static_cast<double>(pw) * ph;
  double mean = 0.0;
  for (int y = y0; y < y0 + ph; ++y)
    for (int x = x0; x < x0 + pw; ++x) mean += img[static_cast<std::size_t>(y) * width + x];
  mean /= count;

  double var = 0.0;
  for (int y = y0; y < y0 + ph; ++y)
    for (int x = x0; x < x0 + pw; ++x) {
      const double d = img[static_cast<std::size_t>(y) * width + x] - mean;
      var += d * d;
    }
  const double stddev = std::sqrt(var / count);

  // Flat patches (up to rounding of the area average) carry no texture.
  const bool flat = stddev <= 1e-9 * std::max(1.0, std::abs(mean));
  for (int y = y0; y < y0 + ph; ++y)
    for (int x = x0; x < x0 + pw; ++x) {
      auto& v = img[static_cast<std::size_t>(y) * width + x];
      v = flat ? 0.0 : (v - mean) / stddev;
    }
}

bool is_image_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

void ImageFrame::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError(kModule, "image has zero size");
  if (pixels.size() != static_cast<std::size_t>(width) * height)
    throw ValidationError(kModule, "pixel count does not match width*height");
  for (double p : pixels)
    if (!(p >= 0.0 && p <= 255.0)) throw ValidationError(kModule, "pixel intensity outside [0,255]");
}

void SadConfig::validate() const {
  if (width <= 0 || height <= 0 || patch_width <= 0 || patch_height <= 0)
    throw ValidationError(kModule, "SAD resolution and patch size must be positive");
  if (width % patch_width != 0 || height % patch_height != 0) {
    std::ostringstream os;
    os << "resolution " << width << "x" << height << " is not divisible by patch " << patch_width << "x" << patch_height;
    throw ValidationError(kModule, os.str());
  }
}

DescriptorSet::DescriptorSet(Eigen::MatrixXd rows, DescriptorKind kind) : kind_(kind) {
  if (rows.rows() == 0 || rows.cols() == 0) throw ValidationError(kModule, "empty descriptor set");
  for (Eigen::Index r = 0; r < rows.rows(); ++r)
    for (Eigen::Index c = 0; c < rows.cols(); ++c)
      if (!std::isfinite(rows(r, c)))
        throw ValidationError(kModule, "non-finite value at row " + std::to_string(r) + ", column " + std::to_string(c));
  data_ = rows.transpose();
}

DescriptorSet::DescriptorSet(const std::vector<Descriptor>& descriptors, DescriptorKind kind) : kind_(kind) {
  if (descriptors.empty() || descriptors.front().values.empty()) throw ValidationError(kModule, "empty descriptor set");
  const auto dim = descriptors.front().values.size();
  data_.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(descriptors.size()));
  for (std::size_t k = 0; k < descriptors.size(); ++k) {
    const auto& d = descriptors[k];
    if (d.id != k) throw ValidationError(kModule, "descriptor ids must be consecutive from 0; got id " + std::to_string(d.id) + " at position " + std::to_string(k));
    if (d.values.size() != dim) throw ValidationError(kModule, "descriptor " + std::to_string(k) + " has dimension " + std::to_string(d.values.size()) + ", expected " + std::to_string(dim));
    for (std::size_t c = 0; c < dim; ++c) {
      if (!std::isfinite(d.values[c]))
        throw ValidationError(kModule, "non-finite value at row " + std::to_string(k) + ", column " + std::to_string(c));
      data_(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = d.values[c];
    }
  }
}

Descriptor DescriptorSet::operator[](std::size_t id) const {
  if (id >= size()) throw ValidationError(kModule, "descriptor id " + std::to_string(id) + " out of range");
  const auto col = data_.col(static_cast<Eigen::Index>(id));
  return Descriptor{std::vector<double>(col.data(), col.data() + col.size()), id};
}

Descriptor sad_descriptor(const ImageFrame& img, const SadConfig& cfg) {
  img.validate();
  cfg.validate();
  auto small = downsample_area(img, cfg.width, cfg.height);
  for (int y0 = 0; y0 < cfg.height; y0 += cfg.patch_height)
    for (int x0 = 0; x0 < cfg.width; x0 += cfg.patch_width)
      normalize_patch(small, cfg.width, x0, y0, cfg.patch_width, cfg.patch_height);
  return Descriptor{std::move(small), 0};
}

ImageFrame load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError(kModule, "image not found: '" + path.string() + "'");
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError(kModule, "cannot decode image '" + path.string() + "'");
  ImageFrame frame;
  frame.width = bgr.cols;
  frame.height = bgr.rows;
  frame.pixels.resize(static_cast<std::size_t>(bgr.cols) * bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      const double luma = 0.299 * row[x][2] + 0.587 * row[x][1] + 0.114 * row[x][0];
      frame.pixels[static_cast<std::size_t>(y) * bgr.cols + x] = std::clamp(luma, 0.0, 255.0);
    }
  }
  return frame;
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError(kModule, "not a directory: '" + dir.string() + "'");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  if (files.empty()) throw IoError(kModule, "no PNG/JPEG images in '" + dir.string() + "'");
  return files;
}

DescriptorSet sad_descriptors_from_directory(const std::filesystem::path& dir, const SadConfig& cfg) {
  const auto files = list_images(dir);
  std::vector<Descriptor> descriptors;
  descriptors.reserve(files.size());
  for (std::size_t k = 0; k < files.size(); ++k) {
    auto d = sad_descriptor(load_image(files[k]), cfg);
    d.id = k;
    descriptors.push_back(std::move(d));
  }
  return DescriptorSet(descriptors, DescriptorKind::sad);
}

DescriptorSet load_descriptors(const std::filesystem::path& path, MatrixFormat fmt) {
  return DescriptorSet(load_matrix(path, fmt), DescriptorKind::external);
}

DescriptorSet load_descriptors(const std::filesystem::path& path) {
  return load_descriptors(path, format_from_path(path));
}

void save_descriptors(const std::filesystem::path& path, const DescriptorSet& set, MatrixFormat fmt) {
  save_matrix(path, set.as_rows(), fmt);
}

}  // namespace vpr
