#include "helpers.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace gftc;
using gftc::test::map;

TEST(ParseSpec, CantorConfig)
{
    const IFSSpec s = parse_spec(R"({"maps": [{"rho": "1/3", "b": "0"}, {"rho": "1/3", "b": "2/3"}]})");
    EXPECT_EQ(s.size(), 2u);
    EXPECT_EQ(s.scheme, Scheme::Sigma);
    EXPECT_EQ(s.mode, Mode::Standard);
    EXPECT_EQ(s.first().ratio, make_rational(1, 3));
}

TEST(ParseSpec, FourQuarterMaps)
{
    const IFSSpec s = load_spec(test::config("touching_quarters"));
    ASSERT_EQ(s.size(), 4u);
    EXPECT_EQ(s.maps[1].offset, make_rational(1, 4));
    EXPECT_EQ(s.maps[2].offset, make_rational(3, 8));
}

TEST(ParseSpec, SortsMapsAndRecordsPermutation)
{
    const IFSSpec s = parse_spec(
        R"({"maps": [{"rho": "1/3", "b": "2/3"}, {"rho": "1/9", "b": "8/27"}, {"rho": "1/3", "b": "0"}], "scheme": "lambda"})");
    EXPECT_EQ(s.maps[0].offset, Rational(0));
    EXPECT_EQ(s.maps[1].offset, make_rational(8, 27));
    EXPECT_EQ(s.maps[2].offset, make_rational(2, 3));
    EXPECT_EQ(s.permutation, (std::vector<int>{2, 1, 0}));
    EXPECT_EQ(s.scheme, Scheme::Lambda);
}

TEST(ParseSpec, RejectsInvalidConfigs)
{
    EXPECT_THROW(parse_spec(R"({"maps": [{"rho": "1", "b": "0"}, {"rho": "1/3", "b": "2/3"}]})"), SpecError);
    EXPECT_THROW(parse_spec(R"({"maps": [{"rho": "-1/3", "b": "1/3"}, {"rho": "1/3", "b": "2/3"}]})"), SpecError);
    EXPECT_THROW(parse_spec(R"({"maps": [{"rho": "1/2", "b": "0"}, {"rho": "1/2", "b": "2/3"}]})"), SpecError);
    EXPECT_THROW(parse_spec(R"({"maps": [{"rho": "1/3", "b": "1/9"}, {"rho": "1/3", "b": "2/3"}]})"), SpecError);
    EXPECT_THROW(parse_spec(R"({"maps": [{"rho": "1/3", "b": "0"}, {"rho": "1/3", "b": "1/2"}]})"), SpecError);
    EXPECT_THROW(parse_spec(R"({"maps": [{"rho": "1/3", "b": "0"}]})"), SpecError);
    EXPECT_THROW(parse_spec(R"({"maps": [{"rho": "1/3"}, {"rho": "1/3", "b": "2/3"}]})"), SpecError);
    EXPECT_THROW(parse_spec(R"({"maps": [{"rho": "1/3", "b": "0"}, {"rho": "1/3", "b": "2/3"}], "scheme": "tau"})"),
                 SpecError);
    EXPECT_THROW(parse_spec(R"({"maps": [{"rho": "1/3", "b": "0"}, {"rho": "1/3", "b": "2/3"}], "scheme": 3})"),
                 SpecError);
    EXPECT_THROW(parse_spec("{not json"), SpecError);
}

TEST(ParseSpec, RatioOutOfRangeMessage)
{
    try {
        parse_spec(R"({"maps": [{"rho": "1", "b": "0"}, {"rho": "1/3", "b": "2/3"}]})");
        FAIL();
    } catch (const SpecError& e) {
        EXPECT_NE(std::string(e.what()).find("contraction ratio out of range"), std::string::npos);
    }
}

TEST(ComposeWord, CantorWord)
{
    const IFSSpec s = load_spec(test::config("cantor"));
    const AffineMap m = compose_word(s, Word{0, 1});
    EXPECT_EQ(m.ratio, make_rational(1, 9));
    EXPECT_EQ(m.offset, make_rational(2, 9));
    EXPECT_EQ(compose_word(s, Word{}), AffineMap::identity());
    EXPECT_THROW(compose_word(s, Word{2}), std::out_of_range);
}

TEST(ComposeWord, ExactIdentityInLambdaExample)
{
    const IFSSpec s = load_spec(test::config("lambda_ninth"));
    EXPECT_EQ(compose_word(s, Word{0, 2, 2}), compose_word(s, Word{1, 0}));
}

TEST(ComposeWord, ConcatenationIsComposition)
{
    const IFSSpec s = load_spec(test::config("touching_quarters"));
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> sym(0, 3), len(0, 6);
    for (int t = 0; t < 50; ++t) {
        Word a, b;
        for (int i = len(rng); i > 0; --i) {
            a.push_back(static_cast<std::uint16_t>(sym(rng)));
        }
        for (int i = len(rng); i > 0; --i) {
            b.push_back(static_cast<std::uint16_t>(sym(rng)));
        }
        Word ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        const AffineMap lhs = compose_word(s, ab);
        EXPECT_EQ(lhs, compose_word(s, a).compose(compose_word(s, b)));
        Rational prod = 1;
        for (auto x : ab) {
            prod *= s.maps[x].ratio;
        }
        EXPECT_EQ(lhs.ratio, prod);
    }
}
