#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "vpr/matrix_io.hpp"

namespace vpr {

// Grayscale frame, row-major intensities in [0, 255].
struct ImageFrame {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  void validate() const;
  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Sum-of-absolute-differences front end: area-averaged downsample to
// width x height, then zero-mean / unit-deviation normalization per patch.
struct SadConfig {
  int width = 64;
  int height = 32;
  int patch_width = 8;
  int patch_height = 8;

  void validate() const;
  std::size_t dimension() const { return static_cast<std::size_t>(width) * height; }
};

struct Descriptor {
  std::vector<double> values;
  std::size_t id = 0;
};

enum class DescriptorKind { sad, external };

// Ordered, immutable set of equally sized descriptors. Ids are the 0-based
// frame positions along the traverse; ordering is never changed.
class DescriptorSet {
 public:
  // Rows of `rows` become descriptors 0..rows()-1.
  DescriptorSet(Eigen::MatrixXd rows, DescriptorKind kind);
  DescriptorSet(const std::vector<Descriptor>& descriptors, DescriptorKind kind);

  std::size_t size() const { return static_cast<std::size_t>(data_.cols()); }
  std::size_t dimension() const { return static_cast<std::size_t>(data_.rows()); }
  DescriptorKind kind() const { return kind_; }

  Descriptor operator[](std::size_t id) const;
  // Column `id` is descriptor `id` (dimension x size storage).
  const Eigen::MatrixXd& columns() const { return data_; }
  Eigen::MatrixXd as_rows() const { return data_.transpose(); }

 private:
  Eigen::MatrixXd data_;
  DescriptorKind kind_;
};

Descriptor sad_descriptor(const ImageFrame& img, const SadConfig& cfg = {});

// Decodes PNG/JPEG to grayscale with BT.601 luma weights.
ImageFrame load_image(const std::filesystem::path& path);

// PNG/JPEG files of `dir`, lexicographically sorted by file name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);
DescriptorSet sad_descriptors_from_directory(const std::filesystem::path& dir, const SadConfig& cfg = {});

DescriptorSet load_descriptors(const std::filesystem::path& path, MatrixFormat fmt);
DescriptorSet load_descriptors(const std::filesystem::path& path);
void save_descriptors(const std::filesystem::path& path, const DescriptorSet& set, MatrixFormat fmt);

}  // namespace vpr
