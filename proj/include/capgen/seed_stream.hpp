#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capgen/errors.hpp"

namespace capgen {

namespace detail {

inline std::uint32_t rotl32(std::uint32_t x, int k) {
    return (x << k) | (x >> (32 - k));
}

inline void chacha_quarter(std::uint32_t& a, std::uint32_t& b, std::uint32_t& c, std::uint32_t& d) {
    a += b; d ^= a; d = rotl32(d, 16);
    c += d; b ^= c; b = rotl32(b, 12);
    a += b; d ^= a; d = rotl32(d, 8);
    c += d; b ^= c; b = rotl32(b, 7);
}

// Standard ChaCha20 block function (RFC 7539 layout): 32-byte key, 32-bit
// block counter, 12-byte nonce, 64-byte keystream block out.
inline std::array<std::uint8_t, 64> chacha20_block(const std::array<std::uint8_t, 32>& key,
                                                   std::uint32_t counter,
                                                   const std::array<std::uint8_t, 12>& nonce) {
    std::array<std::uint32_t, 16> st;
    st[0] = 0x61707865u; st[1] = 0x3320646eu; st[2] = 0x79622d32u; st[3] = 0x6b206574u;
    auto le32 = [](const std::uint8_t* p) {
        return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
               std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
    };
    for (int i = 0; i < 8; ++i) st[4 + i] = le32(key.data() + 4 * i);
    st[12] = counter;
    for (int i = 0; i < 3; ++i) st[13 + i] = le32(nonce.data() + 4 * i);

    std::array<std::uint32_t, 16> x = st;
    for (int round = 0; round < 10; ++round) {
        chacha_quarter(x[0], x[4], x[8], x[12]);
        chacha_quarter(x[1], x[5], x[9], x[13]);
        chacha_quarter(x[2], x[6], x[10], x[14]);
        chacha_quarter(x[3], x[7], x[11], x[15]);
        chacha_quarter(x[0], x[5], x[10], x[15]);
        chacha_quarter(x[1], x[6], x[11], x[12]);
        chacha_quarter(x[2], x[7], x[8], x[13]);
        chacha_quarter(x[3], x[4], x[9], x[14]);
    }
    std::array<std::uint8_t, 64> out;
    for (int i = 0; i < 16; ++i) {
        std::uint32_t v = x[i] + st[i];
        out[4 * i + 0] = std::uint8_t(v);
        out[4 * i + 1] = std::uint8_t(v >> 8);
        out[4 * i + 2] = std::uint8_t(v >> 16);
        out[4 * i + 3] = std::uint8_t(v >> 24);
    }
    return out;
}

} // namespace detail

// An exhaustible, counted stream of deterministic pseudorandom bits.
//
// The first 8*len(seed_bytes) bits are the seed bytes themselves, MSB first
// within each byte. Beyond that, block i of 64 bytes is
// ChaCha20(key, counter=i, nonce), where key is the seed XOR-folded into 32
// bytes and the nonce encodes the seed byte length plus a fixed domain tag.
// Identical seeds therefore always yield identical streams, and distinct
// seeds of equal length get distinct keys.
//
// Single-owner: not shareable across concurrent readers. Concurrent use
// requires independent streams derived from disjoint seed prefixes.
class SeedStream {
public:
    // seed_hex: nonempty, even-length, lowercase hex.
    static SeedStream from_hex(std::string_view seed_hex,
                               std::optional<std::uint64_t> bit_budget = std::nullopt) {
        if (seed_hex.empty()) throw ValidationError("seed_stream: empty seed");
        if (seed_hex.size() % 2 != 0) throw ValidationError("seed_stream: odd-length hex seed");
        std::vector<std::uint8_t> bytes(seed_hex.size() / 2);
        for (std::size_t i = 0; i < bytes.size(); ++i) {
            int hi = hex_nibble(seed_hex[2 * i]);
            int lo = hex_nibble(seed_hex[2 * i + 1]);
            if (hi < 0 || lo < 0)
                throw ValidationError("seed_stream: invalid hex (lowercase [0-9a-f] required)");
            bytes[i] = std::uint8_t(hi << 4 | lo);
        }
        return SeedStream(std::move(bytes), bit_budget);
    }

    // Stream whose first nbits reads reproduce `value` MSB-first; budget = nbits.
    // Used to enumerate raw seeds exhaustively.
    static SeedStream from_counter(std::uint64_t value, int nbits) {
        if (nbits < 1 || nbits > 64) throw ValidationError("seed_stream: counter width out of range");
        int nbytes = (nbits + 7) / 8;
        std::uint64_t shifted = value << (8 * nbytes - nbits);
        std::vector<std::uint8_t> bytes(nbytes);
        for (int i = 0; i < nbytes; ++i)
            bytes[i] = std::uint8_t(shifted >> (8 * (nbytes - 1 - i)));
        return SeedStream(std::move(bytes), std::uint64_t(nbits));
    }

    static SeedStream from_bytes(std::vector<std::uint8_t> bytes,
                                 std::optional<std::uint64_t> bit_budget = std::nullopt) {
        if (bytes.empty()) throw ValidationError("seed_stream: empty seed");
        return SeedStream(std::move(bytes), bit_budget);
    }

    // Stream that skips the raw-seed region and reads the PRF expansion
    // directly. Counter-indexed streams would otherwise start with the
    // counter's leading zero bytes.
    static SeedStream expansion_of(std::vector<std::uint8_t> bytes,
                                   std::optional<std::uint64_t> bit_budget = std::nullopt) {
        if (bytes.empty()) throw ValidationError("seed_stream: empty seed");
        SeedStream s(std::move(bytes), bit_budget);
        s.offset_ = s.seed_.size();
        return s;
    }

    // Reads b <= 64 bits, MSB first, advancing bits_consumed by exactly b.
    std::uint64_t read_bits(int b) {
        if (b < 0 || b > 64) throw ValidationError("seed_stream: read width out of range");
        if (budget_ && consumed_ + std::uint64_t(b) > *budget_)
            throw ResourceError("seed_stream: bit budget exceeded");
        std::uint64_t v = 0;
        for (int i = 0; i < b; ++i) {
            std::uint64_t pos = consumed_ + std::uint64_t(i);
            std::uint8_t byte = byte_at(pos / 8);
            v = (v << 1) | ((byte >> (7 - pos % 8)) & 1u);
        }
        consumed_ += std::uint64_t(b);
        return v;
    }

    std::uint64_t bits_consumed() const { return consumed_; }
    std::optional<std::uint64_t> bit_budget() const { return budget_; }
    std::uint64_t bits_remaining() const {
        return budget_ ? *budget_ - consumed_ : UINT64_MAX;
    }

private:
    SeedStream(std::vector<std::uint8_t> bytes, std::optional<std::uint64_t> budget)
        : seed_(std::move(bytes)), budget_(budget) {
        key_.fill(0);
        for (std::size_t i = 0; i < seed_.size(); ++i) key_[i % 32] ^= seed_[i];
        nonce_.fill(0);
        std::uint64_t len = seed_.size();
        for (int i = 0; i < 8; ++i) nonce_[i] = std::uint8_t(len >> (8 * i));
        nonce_[8] = 'c'; nonce_[9] = 'g'; nonce_[10] = '0'; nonce_[11] = '1';
    }

    static int hex_nibble(char c) {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return -1;
    }

    std::uint8_t byte_at(std::uint64_t index) {
        index += offset_;
        if (index < seed_.size()) return seed_[index];
        std::uint64_t block = (index - seed_.size()) / 64;
        if (!cached_block_ || *cached_block_ != block) {
            block_bytes_ = detail::chacha20_block(key_, std::uint32_t(block), nonce_);
            cached_block_ = block;
        }
        return block_bytes_[(index - seed_.size()) % 64];
    }

    std::vector<std::uint8_t> seed_;
    std::optional<std::uint64_t> budget_;
    std::uint64_t offset_ = 0;
    std::uint64_t consumed_ = 0;
    std::array<std::uint8_t, 32> key_;
    std::array<std::uint8_t, 12> nonce_;
    std::optional<std::uint64_t> cached_block_;
    std::array<std::uint8_t, 64> block_bytes_{};
};

// Stream number `index` of a family of pseudo-independent streams: the
// counter bytes are the seed, and reads come from the PRF expansion. Used to
// enumerate arbitrarily many test/sampling seeds.
inline SeedStream indexed_stream(std::uint64_t index,
                                 std::optional<std::uint64_t> bit_budget = std::nullopt) {
    std::vector<std::uint8_t> bytes(8);
    for (int i = 0; i < 8; ++i) bytes[i] = std::uint8_t(index >> (8 * (7 - i)));
    return SeedStream::expansion_of(std::move(bytes), bit_budget);
}

} // namespace capgen
