#include "npy.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <regex>
#include <vector>

#include "varflow/errors.hpp"

namespace varflow::cli {

namespace {
constexpr char kMagic[] = "\x93NUMPY";
}

void write_npy(const std::string& path, const num::Matrix& m) {
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" + std::to_string(m.rows()) + ", " +
                       std::to_string(m.cols()) + "), }";
  // Magic, version and length take 10 bytes; pad so data starts on 64.
  const std::size_t total = ((10 + header.size() + 1 + 63) / 64) * 64;
  header.append(total - 10 - header.size() - 1, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(kMagic, 6);
  const char version[2] = {1, 0};
  out.write(version, 2);
  const auto len = static_cast<std::uint16_t>(header.size());
  const char len_bytes[2] = {static_cast<char>(len & 0xff), static_cast<char>(len >> 8)};
  out.write(len_bytes, 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  std::vector<float> values(m.data().begin(), m.data().end());
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!out) throw DataError("failed writing " + path);
}

num::Matrix read_npy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  char head[10];
  in.read(head, 10);
  if (!in || std::memcmp(head, kMagic, 6) != 0 || head[6] != 1) throw DataError(path + ": not a version 1 .npy file");
  const std::size_t len = static_cast<unsigned char>(head[8]) | (static_cast<std::size_t>(static_cast<unsigned char>(head[9])) << 8);
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  std::smatch match;
  static const std::regex shape(R"('descr': '<f4', 'fortran_order': False, 'shape': \((\d+), (\d+)\))");
  if (!std::regex_search(header, match, shape)) throw DataError(path + ": expected a 2-D float32 C-order array");
  num::Matrix m(std::stoul(match[1].str()), std::stoul(match[2].str()));
  std::vector<float> values(m.data().size());
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!in) throw DataError(path + ": truncated array data");
  for (std::size_t i = 0; i < values.size(); ++i) m.data()[i] = values[i];
  return m;
}

}  // namespace varflow::cli
