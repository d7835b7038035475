#include "vpr/matrix_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "vpr/error.hpp"

namespace vpr {
namespace {

constexpr std::string_view kModule = "matrix_io";
constexpr std::string_view kMagic = "VPRD";
constexpr std::size_t kHeaderBytes = 16;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string where(std::string_view source, std::size_t row, std::size_t col) {
  std::ostringstream os;
  os << source << ": row " << row << ", column " << col;
  return os.str();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

std::uint64_t get_le(std::string_view bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int b = 0; b < width; ++b)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + b])) << (8 * b);
  return v;
}

}  // namespace

MatrixFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".bin" || ext == ".vprd") ? MatrixFormat::bin : MatrixFormat::csv;
}

MatrixFormat parse_matrix_format(std::string_view name) {
  if (name == "csv") return MatrixFormat::csv;
  if (name == "bin") return MatrixFormat::bin;
  throw ValidationError(std::string(kModule), "unknown matrix format '" + std::string(name) + "'");
}

Eigen::MatrixXd parse_csv_matrix(std::string_view text, std::string_view source) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ValidationError(std::string(kModule), std::string(source) + ": empty file");

  std::vector<std::vector<double>> rows;
  rows.reserve(lines.size());
  for (std::size_t r = 0; r < lines.size(); ++r) {
    std::vector<double> row;
    std::string_view rest = lines[r];
    std::size_t c = 0;
    while (true) {
      const auto comma = rest.find(',');
      const auto token = trim(rest.substr(0, comma));
      if (token.empty()) throw ValidationError(std::string(kModule), where(source, r, c) + ": empty field");
      double value = 0.0;
      const auto* first = token.data();
      const auto* last = token.data() + token.size();
      if (*first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc{} || ptr != last)
        throw ValidationError(std::string(kModule),
                              where(source, r, c) + ": cannot parse '" + std::string(token) + "'");
      if (!std::isfinite(value))
        throw ValidationError(std::string(kModule), where(source, r, c) + ": non-finite value");
      row.push_back(value);
      ++c;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream os;
      os << source << ": row " << r << " has " << row.size() << " columns, expected " << rows.front().size();
      throw ValidationError(std::string(kModule), os.str());
    }
    rows.push_back(std::move(row));
  }

  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

std::string format_csv_matrix(const Eigen::MatrixXd& m) {
  std::string out;
  char buf[32];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out.push_back(',');
      // Shortest representation that round-trips.
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), m(r, c));
      out.append(buf, ptr);
    }
    out.push_back('\n');
  }
  return out;
}

Eigen::MatrixXd decode_binary_matrix(std::string_view bytes, std::string_view source) {
  const std::string src(source);
  if (bytes.empty()) throw ValidationError(std::string(kModule), src + ": empty file");
  if (bytes.size() < kHeaderBytes || bytes.substr(0, 4) != kMagic)
    throw ValidationError(std::string(kModule), src + ": missing VPRD header");
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  if (version != kBinaryVersion)
    throw ValidationError(std::string(kModule), src + ": unsupported version " + std::to_string(version));
  const auto rows = get_le(bytes, 8, 4);
  const auto cols = get_le(bytes, 12, 4);
  if (rows == 0 || cols == 0) throw ValidationError(std::string(kModule), src + ": empty matrix");
  if (bytes.size() != kHeaderBytes + rows * cols * 8) {
    std::ostringstream os;
    os << src << ": expected " << rows * cols * 8 << " payload bytes for " << rows << "x" << cols << ", got "
       << bytes.size() - kHeaderBytes;
    throw ValidationError(std::string(kModule), os.str());
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::size_t offset = kHeaderBytes;
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c, offset += 8) {
      const double v = std::bit_cast<double>(get_le(bytes, offset, 8));
      if (!std::isfinite(v)) throw ValidationError(std::string(kModule), where(src, r, c) + ": non-finite value");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return m;
}

std::string encode_binary_matrix(const Eigen::MatrixXd& m) {
  std::string out(kMagic);
  out.reserve(kHeaderBytes + static_cast<std::size_t>(m.size()) * 8);
  put_u32(out, kBinaryVersion);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string(kModule), "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(std::string(kModule), "read failed for '" + path.string() + "'");
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(std::string(kModule), "cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError(std::string(kModule), "write failed for '" + path.string() + "'");
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path, MatrixFormat fmt) {
  const auto bytes = read_file(path);
  return fmt == MatrixFormat::bin ? decode_binary_matrix(bytes, path.string())
                                  : parse_csv_matrix(bytes, path.string());
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) { return load_matrix(path, format_from_path(path)); }

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m, MatrixFormat fmt) {
  write_file(path, fmt == MatrixFormat::bin ? encode_binary_matrix(m) : format_csv_matrix(m));
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  save_matrix(path, m, format_from_path(path));
}

std::vector<std::int64_t> load_integer_column(const std::filesystem::path& path) {
  const auto text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw ValidationError(std::string(kModule), path.string() + ": empty file");
  std::vector<std::int64_t> values;
  values.reserve(lines.size());
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto token = trim(lines[r]);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size() || v < 0)
      throw ValidationError(std::string(kModule), where(path.string(), r, 0) + ": expected a non-negative integer");
    values.push_back(v);
  }
  return values;
}

void save_integer_column(const std::filesystem::path& path, const std::vector<std::int64_t>& values) {
  std::string out;
  for (auto v : values) {
    out += std::to_string(v);
    out.push_back('\n');
  }
  write_file(path, out);
}

}  // namespace vpr
