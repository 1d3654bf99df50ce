#include <gouy/cascade.hpp>
#include <gouy/io.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace gouy;

TEST(FormatNumber, SignificantDigitsAndNegativeZero) {
    EXPECT_EQ(io::format_number(-0.0), "0");
    EXPECT_EQ(io::format_number(555.6123456, 6), "555.612");
    EXPECT_EQ(io::format_number(1e-13, 6), "1e-13");
}

TEST(Csv, RoundTrip) {
    const io::CsvTable t{{"source: unit test", "n: 2"}, {"a", "b"}, {{"1", "x"}, {"2.5", ""}}};
    std::stringstream ss;
    io::write_csv(ss, t);
    const auto back = io::read_csv(ss);
    EXPECT_EQ(back.comments, t.comments);
    EXPECT_EQ(back.header, t.header);
    EXPECT_EQ(back.rows, t.rows);
    EXPECT_EQ(back.number(1, "a"), 2.5);
    EXPECT_THROW(back.number(0, "b"), invalid_input);
    EXPECT_THROW(back.column("zzz"), invalid_input);
}

TEST(Csv, MalformedInput) {
    std::istringstream ragged("a,b\n1,2,3\n");
    EXPECT_THROW(io::read_csv(ragged), invalid_input);
    std::istringstream only_comments("# nothing\n");
    EXPECT_THROW(io::read_csv(only_comments), invalid_input);
    std::istringstream crlf("a,b\r\n1,2\r\n");
    EXPECT_EQ(io::read_csv(crlf).rows[0][1], "2");
}

TEST(Csv, SearchTableRoundTrip) {
    ConfigurationRecord r;
    r.f1 = 0.5;
    r.f2 = 0.04;
    r.f3 = 0.3;
    r.d1 = 0.5596081;
    r.d2 = 0.3427142;
    r.delta_gouy = 0.4951 * pi;
    r.q_residual = 1.2e-15;
    r.vis_p0 = 0.999812;
    r.vis_pn = 0.9981;
    std::stringstream ss;
    io::write_csv(ss, io::search_table({r, r}, {"target_n: 2"}));
    const auto t = io::read_csv(ss);
    EXPECT_EQ(t.header.size(), 9u);
    EXPECT_EQ(t.header[5], "delta_gouy_over_pi");
    const auto back = io::records_from_table(t);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_NEAR(back[0].d1, r.d1, 5e-7);  // 6 significant digits in mm
    EXPECT_NEAR(back[0].delta_gouy, r.delta_gouy, 1e-6);
    EXPECT_EQ(back[0].f2, r.f2);
    EXPECT_EQ(t.rows[0][3], "559.608");
}

TEST(Csv, SweepAndRoutingTables) {
    const std::vector<SweepEntry> sweep{{LGMode{2, 1}, PortResult::from_intensities(0.9, 0.1)}};
    const auto st = io::sweep_table(sweep, {});
    EXPECT_EQ(st.header, (std::vector<std::string>{"p", "ell", "m", "I1", "I2", "visibility"}));
    EXPECT_EQ(st.rows[0][2], "6");
    EXPECT_EQ(st.number(0, "visibility"), 0.8);

    const std::vector<LGMode> modes{{0, 0}, {1, 0}};
    const auto rt = io::routing_table(routing_matrix(radial_sorter_tree(1), modes), {"tree: radial 1"});
    std::stringstream ss;
    io::write_csv(ss, rt);
    const auto back = io::read_csv(ss);
    EXPECT_EQ(back.header, (std::vector<std::string>{"p", "ell", "ch1", "ch2"}));
    EXPECT_NEAR(back.number(0, "ch1"), 1.0, 1e-12);
    EXPECT_NEAR(back.number(1, "ch2"), 1.0, 1e-12);
}

TEST(IntensityIO, CsvRoundTrip) {
    const auto g = sample_intensity(ModeSuperposition::single(1, 2),
                                    BeamState::local(ComplexBeamParameter::from_waist(1e-3, 810e-9)), 3e-3, 17);
    std::stringstream ss;
    io::write_intensity_csv(ss, g);
    EXPECT_NE(ss.str().find("# extent_mm: x -3 3 y -3 3"), std::string::npos);
    const auto back = io::read_intensity_csv(ss);
    ASSERT_EQ(back.size, g.size);
    EXPECT_NEAR(back.half_width, g.half_width, 1e-15);
    for (std::size_t i = 0; i < g.values.size(); ++i) EXPECT_NEAR(back.values[i], g.values[i], 1e-9 * g.max());
}

TEST(IntensityIO, PgmRoundTrip) {
    IntensityGrid g{3, 1e-3, {0, 1, 2, 3, 4, 5, 6, 7, 8}};
    std::stringstream ss;
    io::write_pgm(ss, g);
    const auto img = io::read_pgm(ss);
    EXPECT_EQ(img.width, 3);
    EXPECT_EQ(img.height, 3);
    ASSERT_EQ(img.comments.size(), 1u);
    EXPECT_EQ(img.comments[0], " extent_mm: x -1 1 y -1 1");
    EXPECT_EQ(img.pixels.front(), 0);
    EXPECT_EQ(img.pixels.back(), 255);
    EXPECT_EQ(img.pixels[4], 128);
    std::istringstream bad("P2\n1 1\n255\n");
    EXPECT_THROW(io::read_pgm(bad), invalid_input);
}
