#include "monoglm/error.hpp"
#include "monoglm/observation_table.hpp"

#include <gtest/gtest.h>

#include <sstream>

using monoglm::InputError;
using monoglm::ObservationTable;

namespace {

ObservationTable parse(const std::string& text) {
    std::istringstream in(text);
    return ObservationTable::from_csv(in);
}

std::string error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(ObservationTable, ParsesHeaderAndColumns) {
    const auto t = parse("y,grade,age\n1.5,a,30\n2,b,41\n");
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.cols(), 3u);
    EXPECT_EQ(t.labels("grade")[1], "b");
    const auto y = t.numeric("y");
    EXPECT_DOUBLE_EQ(y[0], 1.5);
    EXPECT_DOUBLE_EQ(y[1], 2.0);
}

TEST(ObservationTable, QuotedFieldsAndBlankLines) {
    const auto t = parse("name,v\n\"a,b\",1\n\n\"say \"\"hi\"\"\",2\n");
    ASSERT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.labels("name")[0], "a,b");
    EXPECT_EQ(t.labels("name")[1], "say \"hi\"");
    EXPECT_EQ(t.line_of(1), 4u);
}

TEST(ObservationTable, MalformedRowNamesLine) {
    const auto msg = error_of([] { parse("a,b\n1,2\n3\n"); });
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ObservationTable, MissingValuesAreErrors) {
    const auto t = parse("a,b\n1,\n2,NA\n");
    const auto msg = error_of([&] { t.numeric("b"); });
    EXPECT_NE(msg.find("missing value"), std::string::npos);
    EXPECT_NE(msg.find("line 2"), std::string::npos);
}

TEST(ObservationTable, UnparsableNumberNamesColumnAndLine) {
    const auto t2 = parse("a\n1\nx1\n");
    const auto msg = error_of([&] { t2.numeric("a"); });
    EXPECT_NE(msg.find("'a'"), std::string::npos);
    EXPECT_NE(msg.find("line 3"), std::string::npos);
}

TEST(ObservationTable, UnknownColumnNamed) {
    const auto t = parse("a\n1\n");
    const auto msg = error_of([&] { t.numeric("response"); });
    EXPECT_NE(msg.find("'response'"), std::string::npos);
}

TEST(ObservationTable, DuplicateHeaderRejected) {
    EXPECT_THROW(parse("a,a\n1,2\n"), InputError);
    EXPECT_THROW(parse(""), InputError);
}
