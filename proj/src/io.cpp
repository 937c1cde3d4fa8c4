#include "stconv/io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>

namespace stconv {

namespace {

constexpr std::array<char, 4> kTensorMagic{'S', 'T', 'T', '1'};
constexpr std::array<char, 4> kCheckpointMagic{'S', 'T', 'M', '1'};
constexpr std::uint8_t kTensorVersion = 1;

template <typename UInt>
void put_le(std::ostream& out, UInt value) {
  std::array<char, sizeof(UInt)> bytes;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename UInt>
UInt get_le(std::istream& in) {
  std::array<unsigned char, sizeof(UInt)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  require(in.good(), ErrorCode::format, "unexpected end of stream");
  UInt value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    value |= static_cast<UInt>(bytes[i]) << (8 * i);
  }
  return value;
}

void expect_magic(std::istream& in, const std::array<char, 4>& magic) {
  std::array<char, 4> got{};
  in.read(got.data(), got.size());
  require(in.good() && got == magic, ErrorCode::format,
          std::string("bad magic, expected ") + std::string(magic.data(), magic.size()));
}

void write_shape_and_values(std::ostream& out, const Tensor& tensor) {
  require(tensor.rank() >= 1 && tensor.rank() <= 255, ErrorCode::invalid_shape,
          "tensor rank must be in [1, 255] for serialization");
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(tensor.rank()));
  for (auto extent : tensor.shape()) put_le<std::uint64_t>(out, extent);
  for (float v : tensor.values()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
}

Tensor read_shape_and_values(std::istream& in) {
  const auto rank = get_le<std::uint8_t>(in);
  require(rank >= 1, ErrorCode::format, "tensor rank 0 in stream");
  Shape shape(rank);
  for (auto& extent : shape) {
    extent = static_cast<std::size_t>(get_le<std::uint64_t>(in));
    require(extent >= 1, ErrorCode::format, "zero extent in stream");
  }
  std::vector<float> values(shape_product(shape));
  for (auto& v : values) v = std::bit_cast<float>(get_le<std::uint32_t>(in));
  return Tensor(std::move(shape), std::move(values));
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.is_open(), ErrorCode::io, "cannot open " + path.string());
  return in;
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& tensor) {
  out.write(kTensorMagic.data(), kTensorMagic.size());
  put_le<std::uint8_t>(out, kTensorVersion);
  write_shape_and_values(out, tensor);
}

Tensor read_tensor(std::istream& in) {
  expect_magic(in, kTensorMagic);
  const auto version = get_le<std::uint8_t>(in);
  require(version == kTensorVersion, ErrorCode::format,
          "unsupported tensor file version " + std::to_string(version));
  return read_shape_and_values(in);
}

void save_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  write_file_atomic(path, [&](std::ostream& out) { write_tensor(out, tensor); });
}

Tensor load_tensor(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_tensor(in);
}

void write_checkpoint(std::ostream& out, const std::vector<NamedTensor>& entries) {
  require(entries.size() <= UINT32_MAX, ErrorCode::invalid_config, "too many checkpoint entries");
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& entry : entries) {
    require(entry.name.size() <= UINT16_MAX, ErrorCode::invalid_config,
            "checkpoint entry name too long");
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(entry.name.size()));
    out.write(entry.name.data(), static_cast<std::streamsize>(entry.name.size()));
    write_shape_and_values(out, entry.tensor);
  }
}

std::vector<NamedTensor> read_checkpoint(std::istream& in) {
  expect_magic(in, kCheckpointMagic);
  const auto count = get_le<std::uint32_t>(in);
  std::vector<NamedTensor> entries;
  entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto length = get_le<std::uint16_t>(in);
    std::string name(length, '\0');
    in.read(name.data(), length);
    require(in.good(), ErrorCode::format, "truncated checkpoint entry name");
    entries.push_back({std::move(name), read_shape_and_values(in)});
  }
  return entries;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& entries) {
  write_file_atomic(path, [&](std::ostream& out) { write_checkpoint(out, entries); });
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_checkpoint(in);
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer) {
  auto temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    require(out.is_open(), ErrorCode::io, "cannot write " + temp.string());
    writer(out);
    out.flush();
    require(out.good(), ErrorCode::io, "write failed for " + temp.string());
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  require(!ec, ErrorCode::io, "cannot rename " + temp.string() + ": " + ec.message());
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, [&](std::ostream& out) { out << text; });
}

}  // namespace stconv
