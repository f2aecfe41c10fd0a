#include "gpress/arith_coder.h"

#include <stdexcept>

namespace gpress {

namespace {

using u128 = unsigned __int128;

constexpr std::uint64_t kHalf = std::uint64_t{1} << 63;
constexpr std::uint64_t kQuarter = std::uint64_t{1} << 62;
constexpr std::uint64_t kThreeQuarters = kHalf + kQuarter;

std::uint64_t scaled(u128 range, std::uint64_t cum, int precision) {
    return static_cast<std::uint64_t>((range * cum) >> precision);
}

}  // namespace

void BitWriter::put(bool bit) {
    if (bits_ % 8 == 0) {
        bytes_.push_back(0);
    }
    if (bit) {
        bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
    }
    ++bits_;
}

void BitWriter::put_bits(std::uint64_t value, int width) {
    for (int i = width - 1; i >= 0; --i) {
        put((value >> i) & 1u);
    }
}

BitReader::BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bit_limit, std::uint64_t start_bit)
    : bytes_(bytes), limit_(bit_limit), pos_(start_bit) {
    if (bit_limit > static_cast<std::uint64_t>(bytes.size()) * 8) {
        throw std::invalid_argument("BitReader: bit limit exceeds buffer");
    }
}

bool BitReader::get() {
    if (pos_ >= limit_) {
        ++pos_;
        return false;
    }
    bool bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
    ++pos_;
    return bit;
}

std::uint64_t BitReader::get_bits(int width) {
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
        v = (v << 1) | static_cast<std::uint64_t>(get());
    }
    return v;
}

FrequencyTable FrequencyTable::from_frequencies(std::span<const std::uint64_t> freqs, int precision) {
    if (precision < 1 || precision > 62) {
        throw std::invalid_argument("FrequencyTable: precision must lie in [1, 62]");
    }
    if (freqs.empty()) {
        throw std::invalid_argument("FrequencyTable: empty alphabet");
    }
    FrequencyTable table;
    table.precision = precision;
    table.cumulative.push_back(0);
    std::uint64_t total = 0;
    for (std::uint64_t f : freqs) {
        if (f == 0) {
            throw std::invalid_argument("FrequencyTable: zero frequency");
        }
        total += f;
        table.cumulative.push_back(total);
    }
    if (total != (std::uint64_t{1} << precision)) {
        throw std::invalid_argument("FrequencyTable: frequencies must sum to 2^precision");
    }
    return table;
}

ArithmeticEncoder::ArithmeticEncoder(FrequencyTable table) : table_(std::move(table)) {}

void ArithmeticEncoder::emit(bool bit) {
    out_.put(bit);
    for (; pending_ > 0; --pending_) {
        out_.put(!bit);
    }
}

void ArithmeticEncoder::encode(int symbol) {
    if (symbol < 0 || symbol >= table_.alphabet()) {
        throw std::invalid_argument("ArithmeticEncoder: symbol out of alphabet");
    }
    const u128 range = static_cast<u128>(high_ - low_) + 1;
    const auto s = static_cast<std::size_t>(symbol);
    high_ = low_ + scaled(range, table_.cumulative[s + 1], table_.precision) - 1;
    low_ = low_ + scaled(range, table_.cumulative[s], table_.precision);
    while (true) {
        if (high_ < kHalf) {
            emit(false);
        } else if (low_ >= kHalf) {
            emit(true);
            low_ -= kHalf;
            high_ -= kHalf;
        } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
            ++pending_;
            low_ -= kQuarter;
            high_ -= kQuarter;
        } else {
            break;
        }
        low_ <<= 1;
        high_ = (high_ << 1) | 1u;
    }
}

BitWriter ArithmeticEncoder::finish() {
    ++pending_;
    emit(low_ >= kQuarter);
    return std::move(out_);
}

ArithmeticDecoder::ArithmeticDecoder(FrequencyTable table, BitReader reader)
    : table_(std::move(table)), reader_(reader) {
    value_ = reader_.get_bits(64);
}

int ArithmeticDecoder::decode() {
    const u128 range = static_cast<u128>(high_ - low_) + 1;
    const std::uint64_t offset = value_ - low_;
    int lo = 0;
    int hi = table_.alphabet() - 1;
    // Largest symbol whose scaled lower edge does not exceed the offset.
    while (lo < hi) {
        int mid = lo + (hi - lo + 1) / 2;
        if (scaled(range, table_.cumulative[static_cast<std::size_t>(mid)], table_.precision) <= offset) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    const auto s = static_cast<std::size_t>(lo);
    high_ = low_ + scaled(range, table_.cumulative[s + 1], table_.precision) - 1;
    low_ = low_ + scaled(range, table_.cumulative[s], table_.precision);
    while (true) {
        if (high_ < kHalf) {
            // nothing to subtract
        } else if (low_ >= kHalf) {
            low_ -= kHalf;
            high_ -= kHalf;
            value_ -= kHalf;
        } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
            low_ -= kQuarter;
            high_ -= kQuarter;
            value_ -= kQuarter;
        } else {
            break;
        }
        low_ <<= 1;
        high_ = (high_ << 1) | 1u;
        value_ = (value_ << 1) | static_cast<std::uint64_t>(reader_.get());
    }
    return lo;
}

}  // namespace gpress
