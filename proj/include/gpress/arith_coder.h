#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gpress {

/// MSB-first bit sink.
class BitWriter {
 public:
    void put(bool bit);
    /// Writes the low `width` bits of `value`, most significant first (width <= 64).
    void put_bits(std::uint64_t value, int width);

    std::uint64_t bit_count() const { return bits_; }
    const std::vector<std::uint8_t> &bytes() const { return bytes_; }
    std::vector<std::uint8_t> take_bytes() { return std::move(bytes_); }

 private:
    std::vector<std::uint8_t> bytes_;
    std::uint64_t bits_ = 0;
};

/// MSB-first bit source over the first `bit_limit` bits of a buffer. Reads past the
/// limit return zeros.
class BitReader {
 public:
    BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bit_limit, std::uint64_t start_bit = 0);

    bool get();
    std::uint64_t get_bits(int width);
    std::uint64_t position() const { return pos_; }

 private:
    std::span<const std::uint8_t> bytes_;
    std::uint64_t limit_;
    std::uint64_t pos_;
};

/// Cumulative frequency table for a static model whose frequencies sum to 2^precision.
struct FrequencyTable {
    int precision = 0;
    std::vector<std::uint64_t> cumulative;  // size alphabet + 1, cumulative[0] = 0

    static FrequencyTable from_frequencies(std::span<const std::uint64_t> freqs, int precision);
    int alphabet() const { return static_cast<int>(cumulative.size()) - 1; }
};

// Binary arithmetic coder with 64-bit low/high registers and 128-bit products.
//
// Each symbol narrows [low, high] to
//   low' = low + floor(range * cum[s] / 2^B),  high' = low + floor(range * cum[s+1] / 2^B) - 1
// with range = high - low + 1. Renormalization runs after every symbol:
//   high < 1/2       -> emit 0 (then any pending 1s)
//   low >= 1/2       -> emit 1 (then any pending 0s), subtract 1/2
//   1/4 <= low, high < 3/4 -> defer one bit (pending), subtract 1/4
// and doubles the interval until none applies. Pending bits carry the undecided
// outcome until the next emitted bit resolves it. After renormalization the range
// exceeds 2^62 >= 2^B, so every symbol with frequency >= 1 keeps a nonempty interval.
// finish() emits two disambiguating bits (plus pending), after which any continuation,
// including zero padding, decodes identically.
class ArithmeticEncoder {
 public:
    explicit ArithmeticEncoder(FrequencyTable table);

    void encode(int symbol);
    /// Flushes and returns the bitstream; the encoder must not be used afterwards.
    BitWriter finish();

 private:
    void emit(bool bit);

    FrequencyTable table_;
    std::uint64_t low_ = 0;
    std::uint64_t high_ = ~std::uint64_t{0};
    std::uint64_t pending_ = 0;
    BitWriter out_;
};

class ArithmeticDecoder {
 public:
    ArithmeticDecoder(FrequencyTable table, BitReader reader);

    int decode();

 private:
    FrequencyTable table_;
    BitReader reader_;
    std::uint64_t low_ = 0;
    std::uint64_t high_ = ~std::uint64_t{0};
    std::uint64_t value_ = 0;
};

}  // namespace gpress
