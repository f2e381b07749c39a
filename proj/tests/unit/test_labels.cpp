#include "doctest.h"

#include "srcsel/labels.hpp"
#include "srcsel/utf8.hpp"

using namespace srcsel;

TEST_CASE("labels parse case-insensitively and keep the fixed order") {
    CHECK(parse_label("Positive") == Label::positive);
    CHECK(parse_label("NEGATIVE") == Label::negative);
    CHECK(parse_label("neutral") == Label::neutral);
    CHECK_FALSE(parse_label("happy"));
    CHECK_FALSE(parse_label(""));
    for (std::size_t i = 0; i < kNumClasses; ++i) {
        CHECK(index_of(label_at(i)) == i);
        CHECK(parse_label(to_string(label_at(i))) == label_at(i));
    }
    CHECK(Label::negative < Label::neutral);
    CHECK(Label::neutral < Label::positive);
}

TEST_CASE("utf8 validation reports the first bad byte") {
    CHECK_FALSE(utf8::first_invalid("plain ascii"));
    CHECK_FALSE(utf8::first_invalid("caf\xc3\xa9 \xf0\x9f\x98\x80"));
    CHECK(utf8::first_invalid("ab\xff") == 2u);
    CHECK(utf8::first_invalid("\xc3") == 0u);           // truncated sequence
    CHECK(utf8::first_invalid("x\xc0\xaf") == 1u);      // overlong encoding
    CHECK(utf8::first_invalid("\xed\xa0\x80") == 0u);   // surrogate
}

TEST_CASE("utf8 units split on code points") {
    const auto u = utf8::units("a\xc3\xa9\xf0\x9f\x98\x80");
    REQUIRE(u.size() == 3);
    CHECK(u[0] == "a");
    CHECK(u[1] == "\xc3\xa9");
    CHECK(u[2] == "\xf0\x9f\x98\x80");
    CHECK(utf8::units("\xff" "a").size() == 2);
}
