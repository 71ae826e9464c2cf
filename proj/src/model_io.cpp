#include "centropy/model_io.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "centropy/errors.hpp"

#include "json.hpp"

namespace centropy {

void write_container_header(std::ostream& out, const std::string& json_metadata) {
  out.write(kModelMagic, 4);
  write_u32(out, kModelFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(json_metadata.size()));
  out.write(json_metadata.data(), static_cast<std::streamsize>(json_metadata.size()));
}

std::string read_container_header(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
    throw DataError("not a centropy model file (bad magic)");
  std::uint32_t version = read_u32(in);
  if (version != kModelFormatVersion) throw DataError("unsupported model format version");
  std::uint32_t len = read_u32(in);
  std::string meta(len, '\0');
  in.read(meta.data(), len);
  if (!in) throw DataError("truncated model header");
  return meta;
}

void write_u32(std::ostream& out, std::uint32_t x) {
  out.write(reinterpret_cast<const char*>(&x), sizeof(x));
}
void write_u64(std::ostream& out, std::uint64_t x) {
  out.write(reinterpret_cast<const char*>(&x), sizeof(x));
}
void write_f64(std::ostream& out, double x) {
  out.write(reinterpret_cast<const char*>(&x), sizeof(x));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t x = 0;
  in.read(reinterpret_cast<char*>(&x), sizeof(x));
  if (!in) throw DataError("truncated model file");
  return x;
}
std::uint64_t read_u64(std::istream& in) {
  std::uint64_t x = 0;
  in.read(reinterpret_cast<char*>(&x), sizeof(x));
  if (!in) throw DataError("truncated model file");
  return x;
}
double read_f64(std::istream& in) {
  double x = 0;
  in.read(reinterpret_cast<char*>(&x), sizeof(x));
  if (!in) throw DataError("truncated model file");
  return x;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  write_u32(out, static_cast<std::uint32_t>(m.rows));
  write_u32(out, static_cast<std::uint32_t>(m.cols));
  for (double x : m.v) write_f64(out, x);
}

Matrix read_matrix(std::istream& in) {
  int rows = static_cast<int>(read_u32(in));
  int cols = static_cast<int>(read_u32(in));
  Matrix m(rows, cols);
  for (double& x : m.v) x = read_f64(in);
  return m;
}

std::string peek_model_kind(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  std::string meta = read_container_header(in);
  auto parsed = nlohmann::json::parse(meta, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("kind"))
    throw DataError("model metadata missing kind: " + path);
  return parsed["kind"].get<std::string>();
}

}  // namespace centropy
