#include <gtest/gtest.h>

#include <filesystem>

#include "rmtres/pgm.hpp"

using namespace rmtres;

TEST(Pgm, AsciiWithComments) {
    const ImageGray img = parse_pgm("P2\n# a comment\n3 2\n# another\n255\n0 1 2\n253 254 255\n");
    EXPECT_EQ(img.width, 3u);
    EXPECT_EQ(img.height, 2u);
    EXPECT_EQ(img.bit_depth(), 8);
    EXPECT_EQ(img.pixels, (std::vector<std::uint16_t>{0, 1, 2, 253, 254, 255}));
    EXPECT_EQ(img.at(1, 0), 253);
}

TEST(Pgm, MinimalAscii) {
    const ImageGray img = parse_pgm("P2 2 2 255 0 128 255 64");
    EXPECT_EQ(img.pixels, (std::vector<std::uint16_t>{0, 128, 255, 64}));
    EXPECT_EQ(img.at(1, 1), 64);
}

TEST(Pgm, Binary16BitIsBigEndian) {
    const std::string data = std::string("P5 2 1 65535\n") + '\x01' + '\x02' + '\xff' + '\xfe';
    const ImageGray img = parse_pgm(data);
    EXPECT_EQ(img.bit_depth(), 16);
    EXPECT_EQ(img.pixels, (std::vector<std::uint16_t>{0x0102, 0xfffe}));
}

TEST(Pgm, RoundTrip) {
    for (unsigned maxval : {255u, 4095u}) {
        ImageGray img;
        img.width = 5;
        img.height = 4;
        img.maxval = maxval;
        for (std::size_t i = 0; i < 20; ++i) img.pixels.push_back(static_cast<std::uint16_t>(i * maxval / 19));
        EXPECT_EQ(parse_pgm(encode_pgm(img)), img);
    }
}

TEST(Pgm, RejectsOtherFormats) {
    try {
        parse_pgm("P6\n2 2\n255\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 0u);
    }
    EXPECT_THROW(parse_pgm("hello"), ParseError);
    EXPECT_THROW(parse_pgm("P2 2 2 70000 1 2 3 4"), ParseError);
    EXPECT_THROW(parse_pgm("P2 2 x 255"), ParseError);
    EXPECT_THROW(parse_pgm("P2 1 1 10 11"), ParseError);
}

TEST(Pgm, Truncated) {
    EXPECT_THROW(parse_pgm("P2 2 2 255 1 2 3"), TruncatedFile);
    EXPECT_THROW(parse_pgm(std::string("P5 2 2 255\n") + "abc"), TruncatedFile);
    EXPECT_THROW(parse_pgm("P5 2 2 255"), TruncatedFile);
}

TEST(Pgm, MissingFileIsInputError) { EXPECT_THROW(read_pgm("/nonexistent/missing.pgm"), InputError); }

TEST(Pgm, FileRoundTrip) {
    ImageGray img;
    img.width = img.height = 3;
    img.pixels = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    const auto path = std::filesystem::temp_directory_path() / "rmtres_pgm_test.pgm";
    write_pgm(path.string(), img);
    EXPECT_EQ(read_pgm(path.string()), img);
    std::filesystem::remove(path);
}

TEST(CentralBlock, OffsetsAndStandardization) {
    ImageGray img;
    img.width = 7;
    img.height = 6;
    for (std::size_t i = 0; i < 42; ++i) img.pixels.push_back(static_cast<std::uint16_t>(i));
    const ImageBlock raw = central_block(img, 3, false);
    EXPECT_EQ(raw.row0, 1u);
    EXPECT_EQ(raw.col0, 2u);
    EXPECT_EQ(raw.block(0, 0), 9.0);
    EXPECT_EQ(raw.block(2, 2), 25.0);

    const ImageBlock z = central_block(img, 3);
    EXPECT_NEAR(z.mean, 17.0, 1e-12);
    double s = 0.0, sq = 0.0;
    for (double v : z.block.values()) {
        s += v;
        sq += v * v;
    }
    EXPECT_NEAR(s, 0.0, 1e-12);
    EXPECT_NEAR(sq / 9.0, 1.0, 1e-12);
    for (std::size_t i = 0; i < 9; ++i)
        EXPECT_NEAR(z.block.values()[i], (raw.block.values()[i] - z.mean) / z.stddev, 1e-12);
}

TEST(CentralBlock, SmallCases) {
    ImageGray img;
    img.width = img.height = 4;
    for (std::uint16_t i = 0; i < 16; ++i) img.pixels.push_back(i);
    const ImageBlock b = central_block(img, 2, false);
    EXPECT_EQ(b.row0, 1u);
    EXPECT_EQ(b.col0, 1u);
    EXPECT_EQ(b.block, Matrix::from_rows({{5, 6}, {9, 10}}));
    const ImageBlock full = central_block(img, 4, false);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(full.block(i, j), img.at(i, j));
}

TEST(CentralBlock, Errors) {
    ImageGray img;
    img.width = img.height = 4;
    img.pixels.assign(16, 7);
    EXPECT_THROW(central_block(img, 5), InvalidSize);
    EXPECT_THROW(central_block(img, 0), InvalidSize);
    EXPECT_THROW(central_block(img, 2), ZeroVariance);
}

TEST(ToImage, ShiftsToZero) {
    double shift = 0.0;
    const ImageGray img = to_image(Matrix::from_rows({{-2, 0}, {1, 5}}), &shift);
    EXPECT_EQ(shift, -2.0);
    EXPECT_EQ(img.maxval, 7u);
    EXPECT_EQ(img.pixels, (std::vector<std::uint16_t>{0, 2, 3, 7}));
}
