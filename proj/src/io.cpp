#include "maskblur/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace maskblur {

namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
  fail(ErrorCode::IoFailure, path + ": " + what);
}

std::ifstream open_input(const std::string& path, std::ios_base::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) io_fail(path, "cannot open for reading");
  return in;
}

std::ofstream open_output(const std::string& path, std::ios_base::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) io_fail(path, "cannot open for writing");
  return out;
}

// Next whitespace-delimited token in a PGM header, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) continue;
    tok.push_back(static_cast<char>(c));
    while ((c = in.get()) != EOF && !std::isspace(c) && c != '#') tok.push_back(static_cast<char>(c));
    if (c == '#')
      while ((c = in.get()) != EOF && c != '\n') {
      }
    break;
  }
  return tok;
}

}  // namespace

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ImageGrid read_pgm(const std::string& path, int* maxval_out) {
  std::ifstream in = open_input(path, std::ios::binary);
  const std::string magic = pgm_token(in);
  require(magic == "P5", ErrorCode::UnsupportedFormat, path + ": expected binary PGM (P5)");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(pgm_token(in));
    height = std::stoi(pgm_token(in));
    maxval = std::stoi(pgm_token(in));
  } catch (const std::exception&) {
    fail(ErrorCode::UnsupportedFormat, path + ": malformed PGM header");
  }
  require(width > 0 && height > 0, ErrorCode::UnsupportedFormat, path + ": bad dimensions");
  require(maxval > 0 && maxval <= 65535, ErrorCode::UnsupportedFormat,
          path + ": maxval out of range");

  const int bytes_per_sample = (maxval > 255) ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<unsigned char> raw(count * bytes_per_sample);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) io_fail(path, "truncated pixel data");

  ImageGrid img(width, height);
  for (std::size_t i = 0; i < count; ++i) {
    img.values[i] = (bytes_per_sample == 2)
                        ? static_cast<double>((raw[2 * i] << 8) | raw[2 * i + 1])
                        : static_cast<double>(raw[i]);
  }
  if (maxval_out) *maxval_out = maxval;
  return img;
}

void write_pgm16(const std::string& path, const ImageGrid& img, double full_scale) {
  require(full_scale > 0.0, ErrorCode::InvalidArgument, "full_scale must be positive");
  std::ofstream out = open_output(path, std::ios::binary);
  out << "P5\n" << img.width << " " << img.height << "\n65535\n";
  std::vector<unsigned char> raw(img.values.size() * 2);
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    double v = img.values[i] / full_scale * 65535.0;
    v = std::max(0.0, std::min(65535.0, std::round(v)));
    const auto s = static_cast<std::uint16_t>(v);
    raw[2 * i] = static_cast<unsigned char>(s >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(s & 0xFF);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) io_fail(path, "write failed");
}

ImageGrid read_csv_image(const std::string& path) {
  std::ifstream in = open_input(path, std::ios::in);
  std::string line;
  if (!std::getline(in, line)) io_fail(path, "empty file");
  require(line == "width,height", ErrorCode::UnsupportedFormat,
          path + ": missing \"width,height\" header");
  if (!std::getline(in, line)) io_fail(path, "missing dimension line");
  int width = 0, height = 0;
  if (std::sscanf(line.c_str(), "%d,%d", &width, &height) != 2 || width <= 0 || height <= 0)
    fail(ErrorCode::UnsupportedFormat, path + ": bad dimension line \"" + line + "\"");
  ImageGrid img(width, height);
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    if (!std::getline(in, line)) io_fail(path, "truncated value list");
    try {
      img.values[i] = std::stod(line);
    } catch (const std::exception&) {
      fail(ErrorCode::UnsupportedFormat, path + ": bad value \"" + line + "\"");
    }
  }
  return img;
}

void write_csv_image(const std::string& path, const ImageGrid& img) {
  std::ofstream out = open_output(path, std::ios::out);
  out << "width,height\n" << img.width << "," << img.height << "\n";
  for (double v : img.values) out << format_g17(v) << "\n";
  if (!out) io_fail(path, "write failed");
}

Eigen::SparseMatrix<double> read_matrix_market(const std::string& path) {
  std::ifstream in = open_input(path, std::ios::in);
  std::string line;
  if (!std::getline(in, line)) io_fail(path, "empty file");
  require(line.rfind("%%MatrixMarket matrix coordinate real", 0) == 0,
          ErrorCode::UnsupportedFormat, path + ": not a real coordinate Matrix Market file");
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  long long rows = 0, cols = 0, nnz = 0;
  if (std::sscanf(line.c_str(), "%lld %lld %lld", &rows, &cols, &nnz) != 3)
    fail(ErrorCode::UnsupportedFormat, path + ": bad size line");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(nnz));
  for (long long i = 0; i < nnz; ++i) {
    if (!std::getline(in, line)) io_fail(path, "truncated entry list");
    long long r = 0, c = 0;
    double v = 0.0;
    if (std::sscanf(line.c_str(), "%lld %lld %lf", &r, &c, &v) != 3)
      fail(ErrorCode::UnsupportedFormat, path + ": bad entry \"" + line + "\"");
    trips.emplace_back(static_cast<int>(r - 1), static_cast<int>(c - 1), v);
  }
  Eigen::SparseMatrix<double> m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

void write_matrix_market(const std::string& path, const Eigen::SparseMatrix<double>& m) {
  std::ofstream out = open_output(path, std::ios::out);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  for (int outer = 0; outer < m.outerSize(); ++outer)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, outer); it; ++it)
      out << (it.row() + 1) << " " << (it.col() + 1) << " " << format_g17(it.value()) << "\n";
  if (!out) io_fail(path, "write failed");
}

void write_matrix_market_dense(const std::string& path, const Eigen::MatrixXd& m) {
  write_matrix_market(path, Eigen::SparseMatrix<double>(m.sparseView()));
}

void write_pattern_file(const std::string& path, const PatternSet& set) {
  require(!set.patterns.empty(), ErrorCode::InvalidArgument, "pattern set is empty");
  const int side = set.patterns.front().side;
  for (const MaskPattern& p : set.patterns) {
    validate_pattern(p);
    require(p.side == side, ErrorCode::DimensionMismatch, "patterns must share one side");
  }
  const std::uint32_t elements = static_cast<std::uint32_t>(side) * side;
  const std::uint32_t count = static_cast<std::uint32_t>(set.patterns.size());
  const std::uint32_t version = 1;

  std::ofstream out = open_output(path, std::ios::binary);
  out.write("SRFP", 4);
  auto put_u32 = [&out](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  put_u32(version);
  put_u32(elements);
  put_u32(count);

  const std::size_t bytes_per = (elements + 7) / 8;
  std::vector<unsigned char> packed(bytes_per);
  for (const MaskPattern& p : set.patterns) {
    std::fill(packed.begin(), packed.end(), 0);
    for (std::uint32_t i = 0; i < elements; ++i)
      if (p.bits[i]) packed[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
    out.write(reinterpret_cast<const char*>(packed.data()),
              static_cast<std::streamsize>(packed.size()));
  }
  if (!out) io_fail(path, "write failed");
}

PatternSet read_pattern_file(const std::string& path) {
  std::ifstream in = open_input(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  require(in.gcount() == 4 && std::memcmp(magic, "SRFP", 4) == 0, ErrorCode::UnsupportedFormat,
          path + ": bad magic");
  auto get_u32 = [&in, &path]() {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) io_fail(path, "truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  };
  const std::uint32_t version = get_u32();
  require(version == 1, ErrorCode::UnsupportedFormat, path + ": unsupported version");
  const std::uint32_t elements = get_u32();
  const std::uint32_t count = get_u32();
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(elements))));
  require(static_cast<std::uint32_t>(side) * static_cast<std::uint32_t>(side) == elements,
          ErrorCode::UnsupportedFormat, path + ": element count is not a perfect square");

  PatternSet set;
  const std::size_t bytes_per = (elements + 7) / 8;
  std::vector<unsigned char> packed(bytes_per);
  for (std::uint32_t k = 0; k < count; ++k) {
    in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
    if (static_cast<std::size_t>(in.gcount()) != packed.size()) io_fail(path, "truncated patterns");
    MaskPattern p;
    p.side = side;
    p.id = static_cast<int>(k);
    p.bits.resize(elements);
    for (std::uint32_t i = 0; i < elements; ++i)
      p.bits[i] = (packed[i / 8] >> (i % 8)) & 1u;
    set.patterns.push_back(std::move(p));
  }
  return set;
}

void write_pattern_csv(const std::string& path, const PatternSet& set) {
  require(!set.patterns.empty(), ErrorCode::InvalidArgument, "pattern set is empty");
  std::ofstream out = open_output(path, std::ios::out);
  out << "side,count\n" << set.patterns.front().side << "," << set.patterns.size() << "\n";
  for (const MaskPattern& p : set.patterns) {
    out << p.id;
    for (auto b : p.bits) out << "," << static_cast<int>(b);
    out << "\n";
  }
  if (!out) io_fail(path, "write failed");
}

void write_spectrum_csv(const std::string& path, const SpectrumReport& report) {
  std::ofstream out = open_output(path, std::ios::out);
  out << "index,eigenvalue,normalized\n";
  for (std::size_t i = 0; i < report.eigenvalues.size(); ++i)
    out << i << "," << format_g17(report.eigenvalues[i]) << ","
        << format_g17(report.normalized[i]) << "\n";
  if (!out) io_fail(path, "write failed");
}

void write_pairs_csv(const std::string& path, const std::string& header,
                     const std::vector<std::pair<double, double>>& rows) {
  std::ofstream out = open_output(path, std::ios::out);
  out << header << "\n";
  for (const auto& [a, b] : rows) out << format_g17(a) << "," << format_g17(b) << "\n";
  if (!out) io_fail(path, "write failed");
}

std::string sha256_file(const std::string& path) {
  std::ifstream in = open_input(path, std::ios::binary);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  require(ctx != nullptr, ErrorCode::NumericFailure, "cannot allocate digest context");
  if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    fail(ErrorCode::NumericFailure, "cannot initialise sha256");
  }
  char buf[65536];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    if (got > 0 && EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(got)) != 1) {
      EVP_MD_CTX_free(ctx);
      fail(ErrorCode::NumericFailure, "sha256 update failed");
    }
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    fail(ErrorCode::NumericFailure, "sha256 final failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in = open_input(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out = open_output(path, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) io_fail(path, "write failed");
}

}  // namespace maskblur
