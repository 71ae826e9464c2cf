#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "centropy/nn.hpp"

namespace centropy {

// Versioned binary container shared by all model files: magic "CELM",
// format version, JSON metadata, then a model-kind-specific payload.
// Little-endian, byte-stable given identical inputs.
constexpr char kModelMagic[4] = {'C', 'E', 'L', 'M'};
constexpr std::uint32_t kModelFormatVersion = 1;

void write_container_header(std::ostream& out, const std::string& json_metadata);
// Returns the metadata; throws DataError on bad magic or version.
std::string read_container_header(std::istream& in);

void write_u32(std::ostream& out, std::uint32_t x);
void write_u64(std::ostream& out, std::uint64_t x);
void write_f64(std::ostream& out, double x);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);

void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);

// Peeks a model file's metadata without loading the payload.
std::string peek_model_kind(const std::string& path);

}  // namespace centropy
