#pragma once

#include "beamlearn/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace beamlearn {

// Binary layout ("BLRN", little-endian):
//   char[4] magic | u32 version (=1) | u32 rows | u32 cols | u8 scalar kind (0 = complex f64)
//   followed by rows*cols entries in row-major order, each as re:f64, im:f64.
// CSV layout: one matrix row per line, entries "re+imj" separated by commas.

enum class MatrixFormat { Binary, Csv };

inline constexpr char kBlrnMagic[4] = {'B', 'L', 'R', 'N'};
inline constexpr std::uint32_t kBlrnVersion = 1;

/// ".csv" selects CSV, everything else is binary.
MatrixFormat format_from_path(const std::filesystem::path& path);

void write_matrix_binary(std::ostream& os, const CMatrix& m);
CMatrix read_matrix_binary(std::istream& is);

void write_matrix_csv(std::ostream& os, const CMatrix& m);
CMatrix read_matrix_csv(std::istream& is);

void save_matrix(const CMatrix& m, const std::filesystem::path& path, MatrixFormat format);
void save_matrix(const CMatrix& m, const std::filesystem::path& path);
CMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
CMatrix load_matrix(const std::filesystem::path& path);

/// Formats a complex value as "re+imj" with round-trip precision.
std::string format_complex(Complex z);
/// Parses "re+imj" / "re-imj"; throws ParseError on anything else.
Complex parse_complex(std::string_view text);

}  // namespace beamlearn
