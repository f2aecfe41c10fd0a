#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gpress/qmath.h"

namespace gpress {

class Rng;

/// Malformed blob.
class FormatError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

/// Blob ends before the fields its header promises.
class TruncatedError : public FormatError {
 public:
    using FormatError::FormatError;
};

inline constexpr int kMinPrecision = 8;
inline constexpr int kMaxPrecision = 62;
inline constexpr std::uint8_t kBlobVersion = 1;
inline constexpr std::size_t kFixedHeaderBytes = 16;  // magic, version, d, n, B

/// Quantized state description shared by encoder and decoder.
///
/// coefficients[k] = round(c_k 2^(B-2)) for the Gell-Mann coefficients of the regularized
/// estimate. basis holds the eigenvectors of the reconstructed matrix in descending
/// eigenvalue order, and model[i] is the integer frequency (sum 2^B, every entry >= 1)
/// assigned to basis[i].
struct RegularizedEstimate {
    int dim = 0;
    int precision = 0;
    std::vector<std::int64_t> coefficients;
    std::vector<std::uint64_t> model;
    std::vector<PureState> basis;
    std::optional<double> delta;  // known on the encoding side only

    /// Rebuilds the estimate from header fields alone.
    static RegularizedEstimate from_fields(int d, int precision, std::vector<std::int64_t> coefficients,
                                           std::vector<std::uint64_t> model);

    /// I/d + sum_k coefficients[k] 2^(2-B) sigma_k.
    Matrix reconstructed() const;
    /// model[i] / 2^B.
    std::vector<double> model_probabilities() const;
};

struct SymbolSequence {
    int alphabet = 0;
    std::vector<std::uint8_t> symbols;

    bool operator==(const SymbolSequence &) const = default;
};

/// Parsed form of a compressed blob.
///
/// payload holds payload_bits bits packed MSB-first, zero padded to whole bytes. When
/// payload_bits equals n ceil(log2 d) the payload stores each symbol in ceil(log2 d) raw
/// bits; otherwise it is an arithmetic-coded stream.
struct EncodedBlob {
    std::uint8_t version = kBlobVersion;
    int dim = 0;
    std::uint64_t n = 0;
    int precision = 0;
    std::vector<std::int64_t> coefficients;
    std::vector<std::uint64_t> model;
    std::uint64_t payload_bits = 0;
    std::vector<std::uint8_t> payload;

    bool raw_payload() const;
    bool operator==(const EncodedBlob &) const = default;
};

/// (1 - delta) rho + delta I/d, for 0 <= delta < 1.
DensityMatrix regularize(const DensityMatrix &rho, double delta);

/// Quantizes a state to B bits per coefficient and builds the integer model.
///
/// If the rounded reconstruction has a smaller minimum eigenvalue than rho (beyond 1e-9),
/// rho is first mixed toward I/d just enough to absorb the worst-case rounding error and
/// quantized again, so lambda_min never drops below lambda_min(rho) - 1e-9.
RegularizedEstimate quantize_estimate(const DensityMatrix &rho, int precision);

/// Largest-remainder apportionment of nonnegative weights to integers summing to
/// 2^precision with every entry >= 1. Ties go to the lower index.
std::vector<std::uint64_t> apportion_model(std::span<const double> weights, int precision);

/// <v_i|rho|v_i> over the estimate's basis.
std::vector<double> diagonal_distribution(const DensityMatrix &rho, const RegularizedEstimate &est);

/// -sum_i q_i log2(model_i / 2^B) with q = diagonal_distribution(rho, est). Bits per symbol.
double expected_rate(const DensityMatrix &rho, const RegularizedEstimate &est);

/// n i.i.d. symbols from q.
SymbolSequence sample_symbols(std::span<const double> q, std::uint64_t n, Rng &rng);

/// ceil(log2 d).
int raw_symbol_bits(int d);
/// Width of the payload-length field: ceil(log2(n ceil(log2 d) + 1)).
int length_register_width(std::uint64_t n, int d);

EncodedBlob encode(const SymbolSequence &symbols, const RegularizedEstimate &est);
SymbolSequence decode(const EncodedBlob &blob);

std::vector<std::uint8_t> serialize(const EncodedBlob &blob);
/// Throws TruncatedError for short input and FormatError for any other defect.
EncodedBlob parse_blob(std::span<const std::uint8_t> bytes);

RegularizedEstimate estimate_from_blob(const EncodedBlob &blob);

/// Total serialized size in bits (header included).
std::uint64_t blob_bits(const EncodedBlob &blob);

}  // namespace gpress
