#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "bwe/error.hpp"

// Small text and binary helpers shared by the file formats. All number
// formatting goes through std::to_chars, so output is locale independent.
namespace bwe {

std::vector<std::string> split(std::string_view line, char sep);

// Shortest representation that round-trips exactly.
std::string format_double(double v);

double parse_double(std::string_view s, const std::string &where);
std::int64_t parse_int(std::string_view s, const std::string &where);
std::uint64_t parse_uint(std::string_view s, const std::string &where);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view contents);

// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_escape(std::string_view field);
std::vector<std::string> parse_csv_line(std::string_view line);

template <typename T>
void put_le(std::string &buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                  std::conditional_t<sizeof(T) == 2,
                                                                     std::uint16_t, std::uint8_t>>>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t k = 0; k < sizeof(T); ++k)
    buf.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
}

class ByteReader {
public:
  ByteReader(std::string_view data, std::string where)
      : data_(data), where_(std::move(where)) {}

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    if (pos_ + sizeof(T) > data_.size()) throw InputError(where_ + ": unexpected end of file");
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2,
                                                                       std::uint16_t, std::uint8_t>>>;
    U bits = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k)
      bits |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + k])) << (8 * k);
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, &bits, sizeof(T));
    return value;
  }

  void skip(std::size_t n) {
    if (pos_ + n > data_.size()) throw InputError(where_ + ": unexpected end of file");
    pos_ += n;
  }
  bool at_end() const { return pos_ == data_.size(); }

private:
  std::string_view data_;
  std::string where_;
  std::size_t pos_ = 0;
};

} // namespace bwe
