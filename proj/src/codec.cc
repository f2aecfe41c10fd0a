#include "gpress/codec.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "gpress/arith_coder.h"
#include "gpress/rng.h"

namespace gpress {

namespace {

constexpr char kMagic[4] = {'G', 'Q', 'C', '1'};

void check_precision(int precision, const char *who) {
    if (precision < kMinPrecision || precision > kMaxPrecision) {
        throw std::invalid_argument(std::string(who) + ": precision must lie in [8, 62]");
    }
}

std::size_t coefficient_count(int d) {
    return static_cast<std::size_t>(d) * static_cast<std::size_t>(d) - 1;
}

std::uint64_t total_of(int precision) { return std::uint64_t{1} << precision; }

std::vector<std::int64_t> round_coefficients(const DensityMatrix &rho, const TracelessBasis &basis,
                                             int precision) {
    std::vector<double> c = bloch_decompose(rho, basis);
    std::vector<std::int64_t> out(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
        out[k] = std::llround(std::ldexp(c[k], precision - 2));
    }
    return out;
}

std::vector<double> dequantize(const std::vector<std::int64_t> &v, int precision) {
    std::vector<double> c(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        c[k] = std::ldexp(static_cast<double>(v[k]), 2 - precision);
    }
    return c;
}

void validate_model(const std::vector<std::uint64_t> &model, int d, int precision) {
    if (model.size() != static_cast<std::size_t>(d)) {
        throw std::invalid_argument("model must have d entries");
    }
    std::uint64_t total = 0;
    for (std::uint64_t m : model) {
        if (m == 0) {
            throw std::invalid_argument("model entry 0");
        }
        if (m > total_of(precision) - total) {
            throw std::invalid_argument("model must sum to 2^B");
        }
        total += m;
    }
    if (total != total_of(precision)) {
        throw std::invalid_argument("model must sum to 2^B");
    }
}

std::uint64_t read_be(std::span<const std::uint8_t> bytes, std::size_t offset, int width) {
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
        v = (v << 8) | bytes[offset + static_cast<std::size_t>(i)];
    }
    return v;
}

void write_be(std::vector<std::uint8_t> &out, std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

std::uint64_t header_field_bits(int d, int precision, std::uint64_t n) {
    return static_cast<std::uint64_t>(coefficient_count(d) + static_cast<std::size_t>(d)) *
               static_cast<std::uint64_t>(precision) +
           static_cast<std::uint64_t>(length_register_width(n, d));
}

}  // namespace

RegularizedEstimate RegularizedEstimate::from_fields(int d, int precision,
                                                     std::vector<std::int64_t> coefficients,
                                                     std::vector<std::uint64_t> model) {
    if (d < 2) {
        throw std::invalid_argument("RegularizedEstimate: dimension must be at least 2");
    }
    check_precision(precision, "RegularizedEstimate");
    if (coefficients.size() != coefficient_count(d)) {
        throw std::invalid_argument("RegularizedEstimate: need d^2 - 1 coefficients");
    }
    validate_model(model, d, precision);
    RegularizedEstimate est;
    est.dim = d;
    est.precision = precision;
    est.coefficients = std::move(coefficients);
    est.model = std::move(model);
    est.basis = eig_hermitian(est.reconstructed()).eigenvectors;
    return est;
}

Matrix RegularizedEstimate::reconstructed() const {
    std::vector<double> c = dequantize(coefficients, precision);
    return bloch_reconstruct(c, gell_mann_basis(dim));
}

std::vector<double> RegularizedEstimate::model_probabilities() const {
    std::vector<double> p(model.size());
    for (std::size_t i = 0; i < model.size(); ++i) {
        p[i] = std::ldexp(static_cast<double>(model[i]), -precision);
    }
    return p;
}

bool EncodedBlob::raw_payload() const {
    return payload_bits == n * static_cast<std::uint64_t>(raw_symbol_bits(dim));
}

DensityMatrix regularize(const DensityMatrix &rho, double delta) {
    if (!(delta >= 0.0 && delta < 1.0)) {
        throw std::invalid_argument("regularize: delta must lie in [0, 1)");
    }
    if (delta == 0.0) {
        return rho;
    }
    const int d = rho.dim();
    return DensityMatrix((1.0 - delta) * rho.matrix() +
                         (delta / d) * Matrix::Identity(d, d));
}

std::vector<std::uint64_t> apportion_model(std::span<const double> weights, int precision) {
    check_precision(precision, "apportion_model");
    const std::size_t d = weights.size();
    const std::uint64_t total = total_of(precision);
    if (d == 0 || d > total) {
        throw std::invalid_argument("apportion_model: alphabet size out of range");
    }
    std::vector<double> w(d);
    double sum = 0;
    for (std::size_t i = 0; i < d; ++i) {
        w[i] = std::max(weights[i], 0.0);
        sum += w[i];
    }
    if (!(sum > 0) || !std::isfinite(sum)) {
        throw std::invalid_argument("apportion_model: weights must have a positive finite sum");
    }

    std::vector<std::uint64_t> counts(d);
    std::vector<double> remainder(d);
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < d; ++i) {
        double scaled = std::ldexp(w[i] / sum, precision);
        double base = std::floor(scaled);
        counts[i] = std::min(static_cast<std::uint64_t>(base), total);
        remainder[i] = scaled - base;
        assigned += counts[i];
    }
    // Overshoot is possible only through rounding of w/sum; trim from the largest.
    while (assigned > total) {
        auto it = std::max_element(counts.begin(), counts.end());
        --*it;
        --assigned;
    }
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % d) {
        ++counts[order[k]];
        ++assigned;
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (counts[i] == 0) {
            // max_element returns the first maximum, i.e. the lowest index among ties
            auto donor = std::max_element(counts.begin(), counts.end());
            --*donor;
            counts[i] = 1;
        }
    }
    return counts;
}

RegularizedEstimate quantize_estimate(const DensityMatrix &rho, int precision) {
    check_precision(precision, "quantize_estimate");
    const int d = rho.dim();
    const TracelessBasis basis = gell_mann_basis(d);
    const double target_min = min_eigenvalue(rho.matrix());

    std::vector<std::int64_t> v = round_coefficients(rho, basis, precision);
    Matrix m = bloch_reconstruct(dequantize(v, precision), basis);
    if (min_eigenvalue(m) < target_min - 1e-9) {
        // Rounding moves each coefficient by at most 2^(1-B), so the operator norm of the
        // error is at most sqrt(d^2 - 1) 2^(1-B). Mixing with weight eta lifts the minimum
        // eigenvalue by eta (1/d - lambda_min), which covers that margin.
        const double margin = std::sqrt(static_cast<double>(d) * d - 1.0) * std::ldexp(1.0, 1 - precision);
        const double gap = 1.0 / d - target_min;
        const double eta = std::min(1.0, margin / gap);
        DensityMatrix lifted((1.0 - eta) * rho.matrix() + (eta / d) * Matrix::Identity(d, d));
        v = round_coefficients(lifted, basis, precision);
        m = bloch_reconstruct(dequantize(v, precision), basis);
    }

    SpectralDecomposition eig = eig_hermitian(m);
    RegularizedEstimate est;
    est.dim = d;
    est.precision = precision;
    est.coefficients = std::move(v);
    est.model = apportion_model(eig.eigenvalues, precision);
    est.basis = std::move(eig.eigenvectors);
    return est;
}

std::vector<double> diagonal_distribution(const DensityMatrix &rho, const RegularizedEstimate &est) {
    if (rho.dim() != est.dim || est.basis.size() != static_cast<std::size_t>(est.dim)) {
        throw std::invalid_argument("diagonal_distribution: dimension mismatch");
    }
    return measured_distribution(rho, est.basis);
}

double expected_rate(const DensityMatrix &rho, const RegularizedEstimate &est) {
    std::vector<double> q = diagonal_distribution(rho, est);
    double rate = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0) {
            rate -= q[i] * (std::log2(static_cast<double>(est.model[i])) - est.precision);
        }
    }
    return rate;
}

SymbolSequence sample_symbols(std::span<const double> q, std::uint64_t n, Rng &rng) {
    if (q.empty() || q.size() > 256) {
        throw std::invalid_argument("sample_symbols: alphabet size must lie in [1, 256]");
    }
    std::vector<double> cdf(q.size());
    double running = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!(q[i] >= 0)) {
            throw std::invalid_argument("sample_symbols: negative probability");
        }
        running += q[i];
        cdf[i] = running;
    }
    if (!(running > 0)) {
        throw std::invalid_argument("sample_symbols: probabilities sum to zero");
    }
    SymbolSequence out;
    out.alphabet = static_cast<int>(q.size());
    out.symbols.resize(n);
    const std::size_t last = q.size() - 1;
    for (std::uint64_t t = 0; t < n; ++t) {
        double u = rng.uniform() * running;
        std::size_t i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (i > last) {
            // u rounded up to the total; take the last symbol with positive weight
            i = last;
            while (q[i] == 0) {
                --i;
            }
        }
        out.symbols[t] = static_cast<std::uint8_t>(i);
    }
    return out;
}

int raw_symbol_bits(int d) {
    if (d < 2) {
        throw std::invalid_argument("raw_symbol_bits: dimension must be at least 2");
    }
    return std::bit_width(static_cast<unsigned>(d - 1));
}

int length_register_width(std::uint64_t n, int d) {
    const std::uint64_t cap = n * static_cast<std::uint64_t>(raw_symbol_bits(d));
    // ceil(log2(cap + 1)) is the bit width of cap
    return std::bit_width(cap);
}

EncodedBlob encode(const SymbolSequence &symbols, const RegularizedEstimate &est) {
    validate_model(est.model, est.dim, est.precision);
    if (symbols.symbols.empty()) {
        throw std::invalid_argument("encode: need at least one symbol");
    }
    if (symbols.alphabet != est.dim) {
        throw std::invalid_argument("encode: alphabet does not match estimate dimension");
    }
    for (std::uint8_t s : symbols.symbols) {
        if (s >= est.dim) {
            throw std::invalid_argument("encode: symbol out of alphabet");
        }
    }
    if (est.coefficients.size() != coefficient_count(est.dim)) {
        throw std::invalid_argument("encode: need d^2 - 1 coefficients");
    }

    EncodedBlob blob;
    blob.dim = est.dim;
    blob.n = symbols.symbols.size();
    blob.precision = est.precision;
    blob.coefficients = est.coefficients;
    blob.model = est.model;

    ArithmeticEncoder enc(FrequencyTable::from_frequencies(est.model, est.precision));
    for (std::uint8_t s : symbols.symbols) {
        enc.encode(s);
    }
    BitWriter coded = enc.finish();

    const int width = raw_symbol_bits(est.dim);
    const std::uint64_t raw_bits = blob.n * static_cast<std::uint64_t>(width);
    if (coded.bit_count() < raw_bits) {
        blob.payload_bits = coded.bit_count();
        blob.payload = coded.take_bytes();
    } else {
        BitWriter raw;
        for (std::uint8_t s : symbols.symbols) {
            raw.put_bits(s, width);
        }
        blob.payload_bits = raw.bit_count();
        blob.payload = raw.take_bytes();
    }
    return blob;
}

SymbolSequence decode(const EncodedBlob &blob) {
    if (blob.version != kBlobVersion) {
        throw FormatError("decode: unsupported version");
    }
    if (blob.dim < 2 || blob.n == 0) {
        throw FormatError("decode: invalid dimension or length");
    }
    try {
        validate_model(blob.model, blob.dim, blob.precision);
    } catch (const std::invalid_argument &e) {
        throw FormatError(std::string("decode: ") + e.what());
    }
    if (blob.payload_bits > static_cast<std::uint64_t>(blob.payload.size()) * 8) {
        throw TruncatedError("decode: payload shorter than its length register");
    }

    SymbolSequence out;
    out.alphabet = blob.dim;
    out.symbols.resize(blob.n);
    BitReader reader(blob.payload, blob.payload_bits);
    if (blob.raw_payload()) {
        const int width = raw_symbol_bits(blob.dim);
        for (std::uint64_t t = 0; t < blob.n; ++t) {
            std::uint64_t s = reader.get_bits(width);
            if (s >= static_cast<std::uint64_t>(blob.dim)) {
                throw FormatError("decode: raw symbol out of alphabet");
            }
            out.symbols[t] = static_cast<std::uint8_t>(s);
        }
        return out;
    }
    ArithmeticDecoder dec(FrequencyTable::from_frequencies(blob.model, blob.precision), reader);
    for (std::uint64_t t = 0; t < blob.n; ++t) {
        out.symbols[t] = static_cast<std::uint8_t>(dec.decode());
    }
    return out;
}

std::vector<std::uint8_t> serialize(const EncodedBlob &blob) {
    if (blob.dim < 2 || blob.dim > 255) {
        throw std::invalid_argument("serialize: dimension must lie in [2, 255]");
    }
    check_precision(blob.precision, "serialize");
    if (blob.coefficients.size() != coefficient_count(blob.dim) ||
        blob.model.size() != static_cast<std::size_t>(blob.dim)) {
        throw std::invalid_argument("serialize: field sizes do not match the dimension");
    }
    const int w = length_register_width(blob.n, blob.dim);
    if (blob.payload_bits > blob.n * static_cast<std::uint64_t>(raw_symbol_bits(blob.dim)) ||
        blob.payload_bits > static_cast<std::uint64_t>(blob.payload.size()) * 8) {
        throw std::invalid_argument("serialize: payload length out of range");
    }

    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    out.push_back(blob.version);
    out.push_back(static_cast<std::uint8_t>(blob.dim));
    write_be(out, blob.n, 8);
    write_be(out, static_cast<std::uint64_t>(blob.precision), 2);

    const std::uint64_t mask = total_of(blob.precision) - 1;
    const std::int64_t limit = std::int64_t{1} << (blob.precision - 1);
    BitWriter bits;
    for (std::int64_t c : blob.coefficients) {
        if (c < -limit || c >= limit) {
            throw std::invalid_argument("serialize: coefficient does not fit in B bits");
        }
        bits.put_bits(static_cast<std::uint64_t>(c) & mask, blob.precision);
    }
    for (std::uint64_t m : blob.model) {
        if (m > mask) {
            throw std::invalid_argument("serialize: model entry does not fit in B bits");
        }
        bits.put_bits(m, blob.precision);
    }
    bits.put_bits(blob.payload_bits, w);
    BitReader payload(blob.payload, blob.payload_bits);
    for (std::uint64_t i = 0; i < blob.payload_bits; ++i) {
        bits.put(payload.get());
    }
    const std::vector<std::uint8_t> &body = bits.bytes();
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

EncodedBlob parse_blob(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFixedHeaderBytes) {
        throw TruncatedError("parse_blob: shorter than the fixed header");
    }
    if (!std::equal(kMagic, kMagic + 4, bytes.begin())) {
        throw FormatError("parse_blob: bad magic");
    }
    EncodedBlob blob;
    blob.version = bytes[4];
    if (blob.version != kBlobVersion) {
        throw FormatError("parse_blob: unsupported version " + std::to_string(blob.version));
    }
    blob.dim = bytes[5];
    blob.n = read_be(bytes, 6, 8);
    blob.precision = static_cast<int>(read_be(bytes, 14, 2));
    if (blob.dim < 2) {
        throw FormatError("parse_blob: dimension must be at least 2");
    }
    if (blob.n == 0) {
        throw FormatError("parse_blob: n must be positive");
    }
    if (blob.precision < kMinPrecision || blob.precision > kMaxPrecision) {
        throw FormatError("parse_blob: precision out of range");
    }
    const std::uint64_t raw_cap = blob.n * static_cast<std::uint64_t>(raw_symbol_bits(blob.dim));
    if (raw_cap / static_cast<std::uint64_t>(raw_symbol_bits(blob.dim)) != blob.n) {
        throw FormatError("parse_blob: n too large");
    }

    std::span<const std::uint8_t> body = bytes.subspan(kFixedHeaderBytes);
    const std::uint64_t available = static_cast<std::uint64_t>(body.size()) * 8;
    const std::uint64_t fields = header_field_bits(blob.dim, blob.precision, blob.n);
    if (available < fields) {
        throw TruncatedError("parse_blob: header fields truncated");
    }
    BitReader reader(body, available);
    const int p = blob.precision;
    for (std::size_t k = 0; k < coefficient_count(blob.dim); ++k) {
        std::uint64_t raw = reader.get_bits(p);
        // sign-extend from B bits
        std::int64_t v = static_cast<std::int64_t>(raw << (64 - p)) >> (64 - p);
        blob.coefficients.push_back(v);
    }
    std::uint64_t total = 0;
    for (int i = 0; i < blob.dim; ++i) {
        std::uint64_t m = reader.get_bits(p);
        if (m == 0) {
            throw FormatError("parse_blob: model entry 0");
        }
        if (m > total_of(p) - total) {
            throw FormatError("parse_blob: model does not sum to 2^B");
        }
        total += m;
        blob.model.push_back(m);
    }
    if (total != total_of(p)) {
        throw FormatError("parse_blob: model does not sum to 2^B");
    }
    blob.payload_bits = reader.get_bits(length_register_width(blob.n, blob.dim));
    if (blob.payload_bits > raw_cap) {
        throw FormatError("parse_blob: length register exceeds n ceil(log2 d)");
    }
    const std::uint64_t used = fields + blob.payload_bits;
    const std::uint64_t needed_bytes = (used + 7) / 8;
    if (body.size() < needed_bytes) {
        throw TruncatedError("parse_blob: payload truncated (length register promises " +
                             std::to_string(blob.payload_bits) + " bits)");
    }
    if (body.size() > needed_bytes) {
        throw FormatError("parse_blob: trailing bytes after payload");
    }
    BitWriter payload;
    for (std::uint64_t i = 0; i < blob.payload_bits; ++i) {
        payload.put(reader.get());
    }
    for (std::uint64_t i = used; i < needed_bytes * 8; ++i) {
        if (reader.get()) {
            throw FormatError("parse_blob: nonzero padding");
        }
    }
    blob.payload = payload.take_bytes();
    return blob;
}

RegularizedEstimate estimate_from_blob(const EncodedBlob &blob) {
    try {
        return RegularizedEstimate::from_fields(blob.dim, blob.precision, blob.coefficients, blob.model);
    } catch (const std::invalid_argument &e) {
        throw FormatError(std::string("estimate_from_blob: ") + e.what());
    }
}

std::uint64_t blob_bits(const EncodedBlob &blob) {
    const std::uint64_t used = header_field_bits(blob.dim, blob.precision, blob.n) + blob.payload_bits;
    return 8 * (kFixedHeaderBytes + (used + 7) / 8);
}

}  // namespace gpress
