#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "capgen/seed_stream.hpp"

using namespace capgen;

TEST_CASE("seed bytes are served verbatim, then PRF expansion") {
    auto s = SeedStream::from_hex("00");
    CHECK(s.read_bits(8) == 0);  // the raw seed byte
    CHECK(s.read_bits(8) == 238);
    CHECK(s.bits_consumed() == 16);
    // frozen continuation of the expansion
    CHECK(s.read_bits(8) == 71);
    CHECK(s.read_bits(8) == 80);
}

TEST_CASE("chacha block function matches the RFC 7539 vector") {
    std::array<std::uint8_t, 32> key;
    for (int i = 0; i < 32; ++i) key[std::size_t(i)] = std::uint8_t(i);
    std::array<std::uint8_t, 12> nonce{0, 0, 0, 9, 0, 0, 0, 0x4a, 0, 0, 0, 0};
    auto block = detail::chacha20_block(key, 1, nonce);
    const std::uint8_t expect[8] = {0x10, 0xf1, 0xe7, 0xe4, 0xd1, 0x3b, 0x59, 0x15};
    for (int i = 0; i < 8; ++i) CHECK(block[std::size_t(i)] == expect[i]);
}

TEST_CASE("reading past the bit budget is an error") {
    auto s = SeedStream::from_hex("ab", 4);
    CHECK_THROWS_AS(s.read_bits(8), ResourceError);
    CHECK(s.bits_consumed() == 0);
    CHECK(s.read_bits(4) == 0xa);
    CHECK_THROWS_AS(s.read_bits(1), ResourceError);
}

TEST_CASE("distinct seeds diverge within the first 128 bits") {
    auto a = SeedStream::from_hex("01");
    auto b = SeedStream::from_hex("02");
    int differing = 0;
    for (int i = 0; i < 128; ++i) differing += int(a.read_bits(1) != b.read_bits(1));
    CHECK(differing >= 1);
    CHECK(differing == 70);  // frozen from the expansion function
}

TEST_CASE("replay purity: any read pattern reproduces the same bits") {
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<int> width(1, 64);
    for (int trial = 0; trial < 20; ++trial) {
        auto reference = SeedStream::from_hex("c0ffee");
        std::vector<int> bits;
        for (int i = 0; i < 512; ++i) bits.push_back(int(reference.read_bits(1)));

        auto replay = SeedStream::from_hex("c0ffee");
        std::size_t pos = 0;
        while (pos < bits.size()) {
            int w = std::min<int>(width(rng), int(bits.size() - pos));
            std::uint64_t v = replay.read_bits(w);
            for (int i = 0; i < w; ++i)
                REQUIRE(((v >> (w - 1 - i)) & 1u) == std::uint64_t(bits[pos + std::size_t(i)]));
            pos += std::size_t(w);
        }
        REQUIRE(replay.bits_consumed() == 512);
    }
}

TEST_CASE("invalid hex seeds are rejected") {
    CHECK_THROWS_AS(SeedStream::from_hex(""), ValidationError);
    CHECK_THROWS_AS(SeedStream::from_hex("0"), ValidationError);
    CHECK_THROWS_AS(SeedStream::from_hex("AB"), ValidationError);
    CHECK_THROWS_AS(SeedStream::from_hex("0g"), ValidationError);
}

TEST_CASE("counter streams replay the counter bits MSB-first") {
    auto s = SeedStream::from_counter(0b1011, 4);
    CHECK(s.read_bits(4) == 0b1011);
    CHECK_THROWS_AS(s.read_bits(1), ResourceError);

    auto t = SeedStream::from_counter(0x2cafe, 18);
    CHECK(t.read_bits(18) == 0x2cafe);

    // non-byte-aligned widths still enumerate distinct prefixes
    auto u0 = SeedStream::from_counter(5, 3);
    auto u1 = SeedStream::from_counter(6, 3);
    CHECK(u0.read_bits(3) != u1.read_bits(3));
}

TEST_CASE("indexed streams are pairwise distinct") {
    auto a = indexed_stream(1);
    auto b = indexed_stream(2);
    bool differ = false;
    for (int i = 0; i < 64; ++i) differ |= (a.read_bits(1) != b.read_bits(1));
    CHECK(differ);
}
