#include "beamlearn/matrix_io.hpp"

#include "beamlearn/errors.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace beamlearn {

namespace {

static_assert(std::endian::native == std::endian::little,
              "BLRN I/O assumes a little-endian host");

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is, const char* what) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw ParseError(std::string("truncated BLRN stream while reading ") + what);
  return v;
}

std::string where(Eigen::Index r, Eigen::Index c) {
  return "row " + std::to_string(r) + ", col " + std::to_string(c);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// strtod-compatible parse of a leading double; returns characters consumed (0 on failure)
std::size_t parse_double(std::string_view s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;  // from_chars rejects a leading '+'
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc()) return 0;
  return static_cast<std::size_t>(ptr - s.data());
}

}  // namespace

MatrixFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext == ".csv" ? MatrixFormat::Csv : MatrixFormat::Binary;
}

void write_matrix_binary(std::ostream& os, const CMatrix& m) {
  os.write(kBlrnMagic, 4);
  put_u32(os, kBlrnVersion);
  put_u32(os, static_cast<std::uint32_t>(m.rows()));
  put_u32(os, static_cast<std::uint32_t>(m.cols()));
  const std::uint8_t kind = 0;
  os.write(reinterpret_cast<const char*>(&kind), 1);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put_f64(os, m(r, c).real());
      put_f64(os, m(r, c).imag());
    }
  if (!os) throw IoError("failed writing BLRN stream");
}

CMatrix read_matrix_binary(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || std::memcmp(magic.data(), kBlrnMagic, 4) != 0)
    throw ParseError("bad BLRN header: magic mismatch");
  const auto version = get<std::uint32_t>(is, "version");
  if (version != kBlrnVersion)
    throw ParseError("bad BLRN header: unsupported version " + std::to_string(version));
  const auto rows = get<std::uint32_t>(is, "rows");
  const auto cols = get<std::uint32_t>(is, "cols");
  const auto kind = get<std::uint8_t>(is, "scalar kind");
  if (kind != 0)
    throw ParseError("bad BLRN header: unsupported scalar kind " + std::to_string(kind));
  if (rows == 0 || cols == 0) throw ParseError("bad BLRN header: empty matrix");
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double re = get<double>(is, "payload");
      const double im = get<double>(is, "payload");
      if (!std::isfinite(re) || !std::isfinite(im))
        throw ParseError("non-finite entry at " + where(r, c));
      m(r, c) = Complex(re, im);
    }
  if (is.peek() != std::char_traits<char>::eof())
    throw ParseError("BLRN payload longer than header dimensions");
  return m;
}

std::string format_complex(Complex z) {
  std::array<char, 64> buf{};
  auto out = std::to_chars(buf.data(), buf.data() + buf.size(), z.real()).ptr;
  const bool neg_im = std::signbit(z.imag());
  *out++ = neg_im ? '-' : '+';
  out = std::to_chars(out, buf.data() + buf.size(), std::abs(z.imag())).ptr;
  *out++ = 'j';
  return std::string(buf.data(), out);
}

Complex parse_complex(std::string_view text) {
  const auto s = trim(text);
  double re = 0.0;
  const std::size_t n_re = parse_double(s, re);
  if (n_re == 0) throw ParseError("cannot parse complex value '" + std::string(s) + "'");
  auto rest = s.substr(n_re);
  if (rest.empty() || (rest.front() != '+' && rest.front() != '-') || rest.back() != 'j')
    throw ParseError("complex value '" + std::string(s) + "' is not of the form re+imj");
  const bool negative = rest.front() == '-';
  rest = rest.substr(1, rest.size() - 2);
  double im = 0.0;
  if (rest.empty() || rest.front() == '+' || rest.front() == '-' ||
      parse_double(rest, im) != rest.size())
    throw ParseError("complex value '" + std::string(s) + "' has a malformed imaginary part");
  return {re, negative ? -im : im};
}

void write_matrix_csv(std::ostream& os, const CMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << format_complex(m(r, c));
    }
    os << '\n';
  }
  if (!os) throw IoError("failed writing CSV matrix");
}

CMatrix read_matrix_csv(std::istream& is) {
  std::vector<std::vector<Complex>> rows;
  std::string line;
  while (std::getline(is, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<Complex> row;
    std::string_view rest = t;
    while (true) {
      const auto comma = rest.find(',');
      const auto field = rest.substr(0, comma);
      const auto r = static_cast<Eigen::Index>(rows.size());
      const auto c = static_cast<Eigen::Index>(row.size());
      Complex z;
      try {
        z = parse_complex(field);
      } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()) + " at " + where(r, c));
      }
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw ParseError("non-finite entry at " + where(r, c));
      row.push_back(z);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("CSV row " + std::to_string(rows.size()) + " has " +
                       std::to_string(row.size()) + " entries, expected " +
                       std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("CSV matrix is empty");
  CMatrix m(static_cast<Eigen::Index>(rows.size()),
            static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

void save_matrix(const CMatrix& m, const std::filesystem::path& path, MatrixFormat format) {
  std::ofstream os(path, format == MatrixFormat::Binary ? std::ios::binary : std::ios::out);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  if (format == MatrixFormat::Binary)
    write_matrix_binary(os, m);
  else
    write_matrix_csv(os, m);
}

void save_matrix(const CMatrix& m, const std::filesystem::path& path) {
  save_matrix(m, path, format_from_path(path));
}

CMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
  std::ifstream is(path, format == MatrixFormat::Binary ? std::ios::binary : std::ios::in);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  try {
    return format == MatrixFormat::Binary ? read_matrix_binary(is) : read_matrix_csv(is);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

CMatrix load_matrix(const std::filesystem::path& path) {
  return load_matrix(path, format_from_path(path));
}

}  // namespace beamlearn
