#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace vpr {

// Shared on-disk layouts for descriptor sets and distance/score matrices.
//
//  csv: one row per line, comma-separated decimal floats, no header.
//  bin: "VPRD" magic, u32 LE version (=1), u32 LE rows, u32 LE cols,
//       then rows*cols f64 LE values in row-major order.
enum class MatrixFormat { csv, bin };

inline constexpr std::uint32_t kBinaryVersion = 1;

// `.bin` and `.vprd` select the binary layout, anything else is CSV.
MatrixFormat format_from_path(const std::filesystem::path& path);
MatrixFormat parse_matrix_format(std::string_view name);

// Rejects empty input, ragged rows and non-finite values, naming the offending
// 0-based row and column.
Eigen::MatrixXd load_matrix(const std::filesystem::path& path, MatrixFormat fmt);
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m, MatrixFormat fmt);
void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);

// In-memory codecs used by the file functions above.
Eigen::MatrixXd parse_csv_matrix(std::string_view text, std::string_view source = "<memory>");
std::string format_csv_matrix(const Eigen::MatrixXd& m);
Eigen::MatrixXd decode_binary_matrix(std::string_view bytes, std::string_view source = "<memory>");
std::string encode_binary_matrix(const Eigen::MatrixXd& m);

// One non-negative integer per line (ground truth, prediction masks).
std::vector<std::int64_t> load_integer_column(const std::filesystem::path& path);
void save_integer_column(const std::filesystem::path& path, const std::vector<std::int64_t>& values);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace vpr
