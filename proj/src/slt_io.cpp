#include "slottta/slt_io.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace slottta {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'T', '1'};

void put_u32(std::ostream& os, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

uint32_t get_u32(std::istream& is, const std::string& context) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw FormatError(context + ": truncated tensor header");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

template <typename T>
void write_record(std::ostream& os, const Tensor<T>& t, uint8_t dtype) {
  os.write(kMagic, 4);
  os.put(static_cast<char>(dtype));
  put_u32(os, static_cast<uint32_t>(t.shape.size()));
  for (int d : t.shape) put_u32(os, static_cast<uint32_t>(d));
  // little-endian host assumed for the payload; asserted once below
  os.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * sizeof(T)));
}

template <typename T>
Tensor<T> read_record(std::istream& is, const std::string& context, uint8_t want_dtype) {
  char magic[4];
  if (!is.read(magic, 4)) throw FormatError(context + ": missing SLT1 magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError(context + ": bad SLT1 magic");
  const int dtype = is.get();
  if (dtype == EOF) throw FormatError(context + ": truncated tensor header");
  if (dtype != want_dtype)
    throw FormatError(context + ": dtype code " + std::to_string(dtype) + " does not match expected " +
                      std::to_string(static_cast<int>(want_dtype)));
  const uint32_t ndim = get_u32(is, context);
  if (ndim > 8) throw FormatError(context + ": implausible rank " + std::to_string(ndim));
  Shape shape(ndim);
  uint64_t numel = 1;
  for (uint32_t i = 0; i < ndim; ++i) {
    const uint32_t d = get_u32(is, context);
    shape[i] = static_cast<int>(d);
    numel *= d;
  }
  if (numel > (1ull << 31)) throw FormatError(context + ": implausible tensor size");
  std::vector<T> data(static_cast<size_t>(numel));
  if (!is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(numel * sizeof(T))))
    throw FormatError(context + ": payload length does not match dims (truncated tensor file)");
  return Tensor<T>(std::move(shape), std::move(data));
}

static_assert(std::endian::native == std::endian::little, "SLT1 payload io assumes a little-endian host");

}  // namespace

void write_slt(std::ostream& os, const Tensor<float>& t) { write_record(os, t, 0); }
void write_slt(std::ostream& os, const Tensor<double>& t) { write_record(os, t, 1); }

Tensor<float> read_slt_f32(std::istream& is, const std::string& context) { return read_record<float>(is, context, 0); }
Tensor<double> read_slt_f64(std::istream& is, const std::string& context) { return read_record<double>(is, context, 1); }

bool at_eof(std::istream& is) {
  return is.peek() == std::char_traits<char>::eof();
}

}  // namespace slottta
