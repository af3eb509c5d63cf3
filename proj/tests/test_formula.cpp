#include <doctest.h>

#include "sheetaudit/formula.hpp"

using namespace sheetaudit;

namespace {

ExprPtr parse_ok(const std::string& src) {
    auto r = parse_formula(src);
    REQUIRE_MESSAGE(parsed_ok(r), src);
    return std::get<ExprPtr>(r);
}

SyntaxError parse_err(const std::string& src) {
    auto r = parse_formula(src);
    REQUIRE_MESSAGE(!parsed_ok(r), src);
    return std::get<SyntaxError>(r);
}

ExprPtr ref(const char* a1) { return make_ref(parse_a1(a1)); }

}  // namespace

TEST_CASE("division and multiplication associate to the left") {
    auto ast = parse_ok("=B2/A2*100");
    auto expected = make_binary(BinaryOp::Mul, make_binary(BinaryOp::Div, ref("B2"), ref("A2")), make_number(100));
    CHECK(equal(ast, expected));
}

TEST_CASE("precedence ladder") {
    CHECK(equal(parse_ok("=1+2*3"),
                make_binary(BinaryOp::Add, make_number(1), make_binary(BinaryOp::Mul, make_number(2), make_number(3)))));
    CHECK(equal(parse_ok("=2^3^2"),
                make_binary(BinaryOp::Pow, make_number(2), make_binary(BinaryOp::Pow, make_number(3), make_number(2)))));
    CHECK(equal(parse_ok("=-2^2"), make_binary(BinaryOp::Pow, make_neg(make_number(2)), make_number(2))));
    CHECK(equal(parse_ok("=(1+2)*3"),
                make_binary(BinaryOp::Mul, make_binary(BinaryOp::Add, make_number(1), make_number(2)), make_number(3))));
    CHECK(equal(parse_ok("=10-4-3"),
                make_binary(BinaryOp::Sub, make_binary(BinaryOp::Sub, make_number(10), make_number(4)), make_number(3))));
}

TEST_CASE("function calls") {
    auto ast = parse_ok("=SUM(G7/D7)");
    CHECK(equal(ast, make_call("SUM", {make_binary(BinaryOp::Div, ref("G7"), ref("D7"))})));
    CHECK(equal(parse_ok("=sum(C6:D6)"), make_call("SUM", {make_range(parse_a1("C6"), parse_a1("D6"))})));
    CHECK(equal(parse_ok("=SUM (B8:B99)"), make_call("SUM", {make_range(parse_a1("B8"), parse_a1("B99"))})));
    CHECK(equal(parse_ok("=IF(A1,2,3)"), make_call("IF", {ref("A1"), make_number(2), make_number(3)})));
    CHECK(equal(parse_ok("=FOO()"), make_call("FOO", {})));
}

TEST_CASE("literals") {
    CHECK(equal(parse_ok("=\"abc\""), make_text("abc")));
    CHECK(equal(parse_ok("=#09/02/1915#"), make_date({1915, 2, 9})));
    CHECK(equal(parse_ok("=1.5e3"), make_number(1500)));
    CHECK(equal(parse_ok("=.5"), make_number(0.5)));
    CHECK(equal(parse_ok("=#REF!+1"), make_binary(BinaryOp::Add, make_broken(), make_number(1))));
}

TEST_CASE("cross-sheet references") {
    auto ast = parse_ok("=Rates!B1*'Tax rates'!A1:A3");
    const auto& b = std::get<Binary>(ast->node);
    CHECK(std::get<CellRef>(b.lhs->node).addr.sheet == "Rates");
    const auto& r = std::get<RangeRef>(b.rhs->node);
    CHECK(r.first.sheet == "Tax rates");
    CHECK(r.last.sheet == "Tax rates");
}

TEST_CASE("syntax errors report an offset") {
    CHECK(parse_err("=A1+").position == 4);
    CHECK(parse_err("=SUM(B2:B5").message.find("missing ')'") != std::string::npos);
    CHECK(parse_err("=A1)").message.find("unmatched ')'") != std::string::npos);
    CHECK(parse_err("A1+1").position == 0);
    CHECK(parse_err("=").position == 1);
    CHECK(parse_err("=1 2").position == 3);
    CHECK(parse_err("=SUM(1,,2)").message.find("empty") != std::string::npos);
    CHECK(parse_err("=A1 x 1.04").position == 4);
    CHECK(parse_err("=5%").position == 2);
    CHECK(parse_err("=\"open").position > 0);
}

TEST_CASE("serialize uses minimal parentheses") {
    CHECK(serialize(make_binary(BinaryOp::Div, ref("G8"), ref("D8"))) == "=G8/D8");
    CHECK(serialize(make_binary(BinaryOp::Mul, make_binary(BinaryOp::Add, ref("A1"), ref("B1")), ref("C1"))) ==
          "=(A1+B1)*C1");
    CHECK(serialize(make_call("SUM", {make_range(parse_a1("C6"), parse_a1("D6"))})) == "=SUM(C6:D6)");
    CHECK(serialize(parse_ok("=((A1))+(B1*C1)")) == "=A1+B1*C1");
    CHECK(serialize(parse_ok("=A1-(B1-C1)")) == "=A1-(B1-C1)");
    CHECK(serialize(parse_ok("=(2^3)^2")) == "=(2^3)^2");
    CHECK(serialize(parse_ok("=-(A1+B1)")) == "=-(A1+B1)");
    CHECK(serialize(parse_ok("=$A$1*Rates!B$2")) == "=$A$1*Rates!B$2");
    CHECK(serialize(parse_ok("=#1/1/2000#")) == "=#01/01/2000#");
    CHECK(serialize(parse_ok("=\"a\"\"b\"")) == "=\"a\"\"b\"");
}

TEST_CASE("format_number is the shortest round-trip text") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(100) == "100");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1.04) == "1.04");
}

TEST_CASE("extract_refs lists references in source order") {
    auto refs = extract_refs(*parse_ok("=G6/D6"));
    REQUIRE(refs.size() == 2);
    CHECK(to_a1(refs[0].first) == "G6");
    CHECK(to_a1(refs[1].first) == "D6");

    auto f5 = extract_refs(*parse_ok("=SUM(B2:B5,D2:D5)*F2"));
    REQUIRE(f5.size() == 3);
    CHECK(f5[0].is_range);
    CHECK(to_a1(f5[0].first) == "B2");
    CHECK(to_a1(f5[0].last) == "B5");
    CHECK(f5[1].is_range);
    CHECK(to_a1(f5[1].last) == "D5");
    CHECK_FALSE(f5[2].is_range);
    CHECK(to_a1(f5[2].first) == "F2");

    CHECK(extract_refs(*parse_ok("=1+2")).empty());
}

TEST_CASE("rebase shifts relative axes only") {
    CHECK(serialize(rebase(parse_ok("=G6/D6"), parse_a1("H6"), parse_a1("H7"))) == "=G7/D7");
    CHECK(serialize(rebase(parse_ok("=$A$1*B1"), parse_a1("C1"), parse_a1("C2"))) == "=$A$1*B2");
    CHECK(serialize(rebase(parse_ok("=A$1+$A1"), parse_a1("B2"), parse_a1("C4"))) == "=B$1+$A3");
    CHECK(serialize(rebase(parse_ok("=SUM(A1:A3)"), parse_a1("A4"), parse_a1("B4"))) == "=SUM(B1:B3)");
    CHECK(serialize(rebase(parse_ok("=A1+1"), parse_a1("B2"), parse_a1("B1"))) == "=#REF!+1");
}

TEST_CASE("replace_node swaps exactly the targeted subtree") {
    auto ast = parse_ok("=A1+A1");
    const auto& b = std::get<Binary>(ast->node);
    auto swapped = replace_node(ast, b.rhs.get(), make_number(9));
    CHECK(serialize(swapped) == "=A1+9");
    CHECK(serialize(ast) == "=A1+A1");
}
