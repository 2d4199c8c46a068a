#pragma once

#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "maskblur/image.hpp"
#include "maskblur/mask.hpp"
#include "maskblur/spectral.hpp"

namespace maskblur {

/// Formats a double with enough digits to round-trip exactly.
std::string format_g17(double v);

/// Binary PGM (P5). Reading accepts maxval up to 65535 (one or two bytes per
/// sample, big-endian) and returns raw sample values; writing always emits
/// 16-bit samples, mapping [0, full_scale] to [0, 65535] with clamping.
ImageGrid read_pgm(const std::string& path, int* maxval_out = nullptr);
void write_pgm16(const std::string& path, const ImageGrid& img, double full_scale);

/// Flat CSV image: line 1 is the literal header "width,height", line 2 the
/// dimensions, then width*height values one per line in row-major order.
ImageGrid read_csv_image(const std::string& path);
void write_csv_image(const std::string& path, const ImageGrid& img);

/// Matrix Market coordinate format (real general, 1-based indices).
Eigen::SparseMatrix<double> read_matrix_market(const std::string& path);
void write_matrix_market(const std::string& path, const Eigen::SparseMatrix<double>& m);
void write_matrix_market_dense(const std::string& path, const Eigen::MatrixXd& m);

/// Packed-bit pattern container: 16-byte header (magic "SRFP", u32 version,
/// u32 elements-per-pattern, u32 pattern count, little-endian) followed by
/// ceil(elements/8) bytes per pattern, bits filled LSB-first in row-major
/// element order. Patterns must be square.
void write_pattern_file(const std::string& path, const PatternSet& set);
PatternSet read_pattern_file(const std::string& path);

/// One line per pattern: the pattern id then every bit, comma-separated; a
/// header line carries "side,count".
void write_pattern_csv(const std::string& path, const PatternSet& set);

void write_spectrum_csv(const std::string& path, const SpectrumReport& report);

/// Two-column CSV with an arbitrary header, e.g. sweep curves ("delta,mse").
void write_pairs_csv(const std::string& path, const std::string& header,
                     const std::vector<std::pair<double, double>>& rows);

std::string sha256_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace maskblur
