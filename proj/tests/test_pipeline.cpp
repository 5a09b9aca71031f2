#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "capgen/pipeline.hpp"
#include "capgen/special_functions.hpp"
#include "capgen/stats.hpp"

using namespace capgen;

TEST_CASE("schedule base cases and the frozen ladder") {
    Schedule s16 = make_schedule(16, 0.25);
    CHECK(s16.t() == 0);  // 16 is at or below every floor
    CHECK(s16.levels == std::vector<std::uint64_t>{16});

    Schedule big = make_schedule(std::uint64_t(1) << 32, std::ldexp(1.0, -10));
    CHECK(big.t() == 2);
    CHECK(big.levels == std::vector<std::uint64_t>{std::uint64_t(1) << 32, 65536, 256});
    CHECK(big.eps_prime == Catch::Approx(std::ldexp(1.0, -10) / 6.0));

    CHECK_THROWS_AS(make_schedule(3, 0.1), ValidationError);
    CHECK_THROWS_AS(make_schedule(16, 0.0), ValidationError);
}

TEST_CASE("error budget invariant holds for random inputs") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::uint64_t> un(4, std::uint64_t(1) << 40);
    std::uniform_real_distribution<double> ue(-18.0, -0.2);
    for (int trial = 0; trial < 200; ++trial) {
        std::uint64_t n = un(rng);
        double eps = std::exp2(ue(rng));
        Schedule s = make_schedule(n, eps);
        REQUIRE(double(s.t() + 1) * s.eps_prime <= eps + 1e-15);
        for (int i = 0; i < s.t(); ++i)
            REQUIRE(s.levels[std::size_t(i + 1)] ==
                    ceil_sqrt_u64(s.levels[std::size_t(i)]));
    }
}

TEST_CASE("seed length at the degenerate ladder is the base budget") {
    PipelineParams params;
    CHECK(seed_length(16, 0.25, params) ==
          inw_seed_length(16, 0.125, params.c_inw));
    // frozen regression constant for the deep ladder
    CHECK(seed_length(std::uint64_t(1) << 32, std::ldexp(1.0, -10)) == 8242);
}

TEST_CASE("seed growth under dimension quadrupling stays modest") {
    // the added cost of n -> 4n is a per-level adjustment, far below the total
    for (std::uint64_t n : {std::uint64_t(256), std::uint64_t(1024), std::uint64_t(4096)}) {
        std::uint64_t a = seed_length(n, 0.1);
        std::uint64_t b = seed_length(4 * n, 0.1);
        REQUIRE(b > a);
        REQUIRE(double(b - a) <= 0.5 * double(a));
    }
}

TEST_CASE("generate emits unit vectors and consumes exactly the seed length") {
    for (int s = 0; s < 100; ++s) {
        SeedStream stream = indexed_stream(std::uint64_t(s));
        std::vector<double> x = generate(256, 0.1, stream);
        REQUIRE(stream.bits_consumed() == seed_length(256, 0.1));
        double n2 = 0.0;
        for (double v : x) n2 += v * v;
        REQUIRE(std::fabs(std::sqrt(n2) - 1.0) <= 1e-12);
    }
}

TEST_CASE("seed accounting is exact across random parameters") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::uint64_t> un(4, 4096);
    std::uniform_real_distribution<double> ue(-10.0, -0.5);
    for (int trial = 0; trial < 20; ++trial) {
        std::uint64_t n = un(rng);
        double eps = std::exp2(ue(rng));
        std::uint64_t bits = seed_length(n, eps);
        SeedStream stream = indexed_stream(std::uint64_t(trial), bits);
        std::vector<double> x = generate(n, eps, stream);
        REQUIRE(x.size() == n);
        REQUIRE(stream.bits_consumed() == bits);  // and the budget was not exceeded
    }
}

TEST_CASE("generate is a pure function of the seed") {
    SeedStream a = SeedStream::from_hex("00aa11bb");
    SeedStream b = SeedStream::from_hex("00aa11bb");
    std::vector<double> xa = generate(100, 0.15, a);
    CHECK(xa == generate(100, 0.15, b));
    SeedStream c = SeedStream::from_hex("00aa11bc");
    CHECK(generate(100, 0.15, c) != xa);
}

TEST_CASE("degenerate ladder reduces to the base generator") {
    PipelineParams params;
    SeedStream s1 = SeedStream::from_hex("77aa");
    SeedStream s2 = SeedStream::from_hex("77aa");
    std::vector<double> full = generate(16, 0.25, s1, params);
    BaseGenConfig base = make_base_config(16, 0.125, params.c_inw, params.b_slack);
    std::vector<double> direct = inw_generate(base, s2);
    CHECK(full == direct);
}

TEST_CASE("chi grid bits follow the delta budget") {
    ChiConfig cfg = make_chi_config(64, std::ldexp(1.0, -8));
    CHECK(cfg.grid_bits == 8);
    CHECK_THROWS_AS(ChiConfig({64, 0.1, 2}).validate(), ValidationError);  // 2^-2 > 0.1
}

TEST_CASE("one-bit chi grid splits at the quartiles") {
    ChiConfig cfg{64, 0.5, 1};
    SeedStream s0 = SeedStream::from_counter(0, 1);
    SeedStream s1 = SeedStream::from_counter(1, 1);
    CHECK(chi_discretize(cfg, s0) == Catch::Approx(chi_quantile(64, 0.25)).margin(1e-9));
    CHECK(chi_discretize(cfg, s1) == Catch::Approx(chi_quantile(64, 0.75)).margin(1e-9));
}

TEST_CASE("chi discretization stays within the CDF budget") {
    // midpoint atoms: the exact grid distance is 2^-(b+1), within the 2^-b
    // contract
    const int b = 8;
    const int atoms = 1 << b;
    double maxd = 0.0;
    for (int j = 0; j < atoms; ++j) {
        double atom = chi_quantile(64, (j + 0.5) / atoms);
        double fc = chi_cdf(64, atom);
        maxd = std::max(maxd, std::fabs(fc - double(j) / atoms));
        maxd = std::max(maxd, std::fabs(double(j + 1) / atoms - fc));
    }
    CHECK(maxd <= std::ldexp(1.0, -b));
    CHECK(maxd == Catch::Approx(std::ldexp(1.0, -(b + 1))).epsilon(1e-5));
}

TEST_CASE("discretized chi second moment approaches n") {
    const int atoms = 1 << 12;
    double m2 = 0.0;
    for (int j = 0; j < atoms; ++j) {
        double q = chi_quantile(64, (j + 0.5) / atoms);
        m2 += q * q;
    }
    m2 /= atoms;
    CHECK(m2 == Catch::Approx(64.0).margin(0.64));
}

TEST_CASE("gaussian variant scales a unit vector by the chi sample") {
    PipelineParams params;
    SeedStream s1 = SeedStream::from_hex("0123");
    std::vector<double> out = gaussian_generate(64, 0.2, s1, params);
    // replay the chi segment: it is read first
    SeedStream s2 = SeedStream::from_hex("0123");
    ChiConfig chi_cfg = make_chi_config(64, 0.1);
    double scale = chi_discretize(chi_cfg, s2);
    double n2 = 0.0;
    for (double v : out) n2 += v * v;
    CHECK(std::sqrt(n2) == Catch::Approx(scale).epsilon(1e-12));
    CHECK(s1.bits_consumed() == seed_length(64, 0.2, params, /*gaussian=*/true));
}

TEST_CASE("gaussian variant second moment is near n") {
    double sum = 0.0;
    const int n = 2000;
    for (int s = 0; s < n; ++s) {
        SeedStream stream = indexed_stream(std::uint64_t(s));
        std::vector<double> x = gaussian_generate(64, 0.2, stream);
        double n2 = 0.0;
        for (double v : x) n2 += v * v;
        sum += n2;
    }
    CHECK(sum / n == Catch::Approx(64.0).margin(2.0));
}

TEST_CASE("forced ladders activate through the floor override") {
    PipelineParams params;
    params.floor_override = 4;
    Schedule s = make_schedule(16, 0.25, params);
    CHECK(s.t() == 1);
    CHECK(s.levels == std::vector<std::uint64_t>{16, 4});
    CHECK(s.eps_prime == Catch::Approx(0.0625));
}
