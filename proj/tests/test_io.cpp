#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nospread/errors.hpp"
#include "nospread/io.hpp"
#include "nospread/packets.hpp"
#include "support.hpp"

using namespace nospread;

namespace {

const PhysicalParams unit{1.0, 1.0, 1.0};

Field random_field(std::mt19937_64& gen) {
    Field f({-3.0, 7.0, 13}, {0.0, 2.5, 6}, 0.37, {1.3, 0.7, 1.1});
    for (auto& v : f.values) {
        // spread exponents widely so the 17-digit claim is actually exercised
        const double scale = std::pow(10.0, ref::uniform(gen, -300.0, 300.0));
        v = ref::random_complex(gen) * scale;
    }
    return f;
}

} // namespace

TEST(FormatDouble, RoundTripsRandomBitPatterns) {
    std::mt19937_64 gen(3);
    for (int k = 0; k < 20000; ++k) {
        double x;
        const std::uint64_t bits = gen();
        std::memcpy(&x, &bits, sizeof x);
        if (!std::isfinite(x)) {
            continue;
        }
        EXPECT_EQ(parse_number(format_double(x), "x"), x) << format_double(x);
    }
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(1.0), "1");
}

TEST(ParseNumber, AcceptsPaddingAndSubnormals) {
    EXPECT_EQ(parse_number("  2.5\r", "x"), 2.5);
    EXPECT_EQ(parse_number("4.9406564584124654e-324", "x"), std::numeric_limits<double>::denorm_min());
    EXPECT_THROW(parse_number("", "x"), ArgumentError);
    EXPECT_THROW(parse_number("1.0abc", "x"), ArgumentError);
    EXPECT_THROW(parse_number("1e999", "x"), ArgumentError);
}

TEST(WeightsTable, RoundTripIsExact) {
    const auto table = tabulate_weights(SpectralWeights(PowerExp{{0.3, -1.7}, {2.0, 0.25}, 1.5, 0.8}), unit, 33);
    std::stringstream ss;
    save_weights_table(ss, table);
    const std::string text = ss.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), kWeightsHeader);

    const auto back = load_weights_table(ss);
    ASSERT_EQ(back.q.size(), table.q.size());
    for (std::size_t i = 0; i < table.q.size(); ++i) {
        EXPECT_EQ(back.q[i], table.q[i]);
        EXPECT_EQ(back.a[i], table.a[i]);
        EXPECT_EQ(back.b[i], table.b[i]);
    }
    EXPECT_EQ(back.q.front(), 0.0);
    EXPECT_EQ(back.q.back(), unit.q_max());

    // and saving again gives the same bytes
    std::stringstream again;
    save_weights_table(again, back);
    EXPECT_EQ(again.str(), text);
}

TEST(WeightsTable, IgnoresCommentsAndBlankLines) {
    std::istringstream in("# comment\n\n0 1 0 0 0\n   # indented comment\n1.0 0.5 0.5 0 0\r\n");
    const auto t = load_weights_table(in);
    ASSERT_EQ(t.q.size(), 2u);
    EXPECT_EQ(t.a[1], cplx(0.5, 0.5));
}

TEST(WeightsTable, MalformedInputIsAnArgumentError) {
    const char* bad[] = {
        "0 1 0 0\n1 1 0 0 0\n",         // short row
        "0 1 0 0 0 9\n1 1 0 0 0\n",     // trailing column
        "0 1 0 0 x\n1 1 0 0 0\n",       // not a number
        "1 1 0 0 0\n0 1 0 0 0\n",       // q descending
        "0 1 0 0 0\n",                  // single row
        "",                             // empty
    };
    for (const char* text : bad) {
        std::istringstream in(text);
        EXPECT_THROW(load_weights_table(in), ArgumentError) << text;
    }
    EXPECT_THROW(load_weights_table(std::string("/nonexistent/weights.txt")), ArgumentError);
    EXPECT_THROW(tabulate_weights(SpectralWeights::preset(), unit, 1), ArgumentError);
}

TEST(FieldCsv, RoundTripIsExact) {
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 5; ++trial) {
        const Field f = random_field(gen);
        std::stringstream ss;
        write_field_csv(ss, f, {{"note", "x"}});
        const Field back = read_field_csv(ss);
        EXPECT_EQ(back.z, f.z);
        EXPECT_EQ(back.r, f.r);
        EXPECT_EQ(back.time, f.time);
        EXPECT_EQ(back.params.mass, f.params.mass);
        EXPECT_EQ(back.params.speed, f.params.speed);
        EXPECT_EQ(back.params.hbar, f.params.hbar);
        ASSERT_EQ(back.values.size(), f.values.size());
        for (std::size_t k = 0; k < f.values.size(); ++k) {
            EXPECT_EQ(back.values[k], f.values[k]) << k;
        }
    }
}

TEST(FieldCsv, PacketDumpRoundTrips) {
    const Field f = eval_packet_grid(unit, SpectralWeights::preset(1.0, 0.5), 64, {-4.0, 4.0, 9}, {0.0, 3.0, 4}, 0.5);
    std::stringstream ss;
    write_field_csv(ss, f);
    const std::string text = ss.str();
    const Field back = read_field_csv(ss);
    std::stringstream again;
    write_field_csv(again, back);
    EXPECT_EQ(again.str(), text);
}

TEST(FieldCsv, LayoutIsZMajorWithAbs2Column) {
    Field f({0.0, 1.0, 2}, {0.0, 1.0, 2}, 0.0, unit);
    f.at(1, 0) = cplx(3.0, 4.0);
    std::ostringstream os;
    write_field_csv(os, f);
    const std::string text = os.str();
    EXPECT_NE(text.find("z,r,re,im,abs2\n0,0,0,0,0\n0,1,0,0,0\n1,0,3,4,25\n1,1,0,0,0\n"), std::string::npos);
}

TEST(FieldCsv, MalformedInputIsAnArgumentError) {
    Field f({0.0, 1.0, 2}, {0.0, 1.0, 2}, 0.0, unit);
    std::ostringstream os;
    write_field_csv(os, f);
    const std::string good = os.str();
    auto replaced = [&](const std::string& from, const std::string& to) {
        std::string s = good;
        const auto at = s.find(from);
        EXPECT_NE(at, std::string::npos) << from;
        return s.replace(at, from.size(), to);
    };
    const std::string bad[] = {
        replaced("z,r,re,im,abs2\n", ""),                  // no header
        replaced("# r_grid = 0 1 2\n", ""),                // missing metadata
        replaced("# z_grid = 0 1 2", "# z_grid = 0 one 2"), // malformed grid
        replaced("1,1,0,0,0\n", ""),                       // too few rows
        good + "1,1,0,0,0\n",                              // too many rows
        replaced("1,1,0,0,0\n", "1,1,0,0\n"),              // short row
        replaced("1,1,0,0,0\n", "1,1,0,0,0,7\n"),          // long row
        replaced("1,1,0,0,0\n", "1,1,zz,0,0\n"),           // bad value
        replaced("1,1,0,0,0\n", "1,0.5,0,0,0\n"),          // off-grid r
        replaced("# nospread field\n", "garbage\n"),       // stray text
    };
    for (const auto& text : bad) {
        std::istringstream in(text);
        EXPECT_THROW(read_field_csv(in), ArgumentError) << text;
    }
}
