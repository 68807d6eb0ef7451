#include "synmind/io/tensor_file.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "synmind/common/errors.hpp"

namespace synmind::io {

namespace {

constexpr char kMagicF32[4] = {'S', 'Y', 'N', 'M'};
constexpr char kMagicF64[4] = {'S', 'Y', 'N', 'D'};

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& in, const char* field,
                       const std::filesystem::path& path) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) {
    throw FormatError("tensor file " + path.string() +
                      ": truncated while reading field '" + field + "'");
  }
  return v;
}

template <typename T>
void write_impl(const std::filesystem::path& path, const nn::Tensor<T>& t,
                const char magic[4]) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError("tensor file " + path.string() + ": cannot open for write");
  }
  out.write(magic, 4);
  write_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) {
    write_u32(out, static_cast<std::uint32_t>(d));
  }
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(T)));
  if (!out) {
    throw FormatError("tensor file " + path.string() + ": short write");
  }
}

template <typename T>
nn::Tensor<T> read_impl(const std::filesystem::path& path,
                        const char magic[4]) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingInputError("tensor file " + path.string() + ": cannot open");
  }
  char got[4] = {};
  in.read(got, 4);
  if (!in || std::memcmp(got, magic, 4) != 0) {
    throw FormatError("tensor file " + path.string() +
                      ": bad field 'magic' (expected " +
                      std::string(magic, 4) + ")");
  }
  const std::uint32_t rank = read_u32(in, "rank", path);
  if (rank > 8) {
    throw FormatError("tensor file " + path.string() +
                      ": bad field 'rank' (" + std::to_string(rank) + ")");
  }
  std::vector<std::size_t> shape(rank);
  std::size_t total = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    shape[i] = read_u32(in, "dims", path);
    if (shape[i] == 0) {
      throw FormatError("tensor file " + path.string() +
                        ": bad field 'dims' (zero dimension)");
    }
    total *= shape[i];
  }
  std::vector<T> data(total);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(total * sizeof(T)));
  if (!in || static_cast<std::size_t>(in.gcount()) != total * sizeof(T)) {
    throw FormatError("tensor file " + path.string() +
                      ": bad field 'payload' (dimension mismatch with data)");
  }
  return nn::Tensor<T>(std::move(shape), std::move(data));
}

}  // namespace

void write_tensor_f32(const std::filesystem::path& path,
                      const nn::Tensor<float>& t) {
  write_impl(path, t, kMagicF32);
}

void write_tensor_f64(const std::filesystem::path& path,
                      const nn::Tensor<double>& t) {
  write_impl(path, t, kMagicF64);
}

nn::Tensor<float> read_tensor_f32(const std::filesystem::path& path) {
  return read_impl<float>(path, kMagicF32);
}

nn::Tensor<double> read_tensor_f64(const std::filesystem::path& path) {
  return read_impl<double>(path, kMagicF64);
}

bool tensor_file_is_f64(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingInputError("tensor file " + path.string() + ": cannot open");
  }
  char got[4] = {};
  in.read(got, 4);
  return in && std::memcmp(got, kMagicF64, 4) == 0;
}

}  // namespace synmind::io
