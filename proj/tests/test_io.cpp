// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>
#include <iterator>

#include "lyacert/io_json.hpp"
#include "lyacert/runners.hpp"
#include "lyacert/verification.hpp"

using namespace lyacert;
using io::Json;

namespace {

std::string read(const std::string& name) {
    std::ifstream f(std::string(LYACERT_DATA_DIR) + "/" + name, std::ios::binary);
    REQUIRE(f.good());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

/// Parses `text`, expecting a schema error at `line` and `pointer`.
void expect_error(const std::string& text, int line, const std::string& pointer) {
    CAPTURE(text);
    try {
        io::parse_document(text);
        FAIL("accepted an invalid document");
    } catch (const io::SchemaError& e) {
        CHECK(e.line() == line);
        CHECK(e.pointer() == pointer);
        CHECK(std::string(e.what()).find("line " + std::to_string(line)) == 0);
    }
}

}  // namespace

TEST_CASE("expression round trip") {
    ScalarExpr e(1.5);
    e.add_lin(2, -1.0);
    e.add_quad(0, 1, 0.25);
    e.add_quad(1, 1, 3.0);
    const Json j = io::to_json(e);
    CHECK(j.dump() == R"({"a":1.5,"b":[[2,-1.0]],"D":[[0,1,0.25],[1,1,3.0]]})");
}

TEST_CASE("conic program round trip") {
    const auto doc = io::parse_document(read("psd-example.json"));
    const auto& p = std::get<conic::ConicProgram>(doc);
    CHECK(p.num_vars() == 1);
    CHECK(p.cones.size() == 1);
    CHECK(p.cones[0].type == conic::ConeType::Psd);
    const std::string again = io::to_json(p).dump(2);
    const auto q = std::get<conic::ConicProgram>(io::parse_document(again));
    CHECK(q.c == p.c);
    CHECK(q.b == p.b);
    CHECK(Matrix(q.A) == Matrix(p.A));
    CHECK(io::to_json(q).dump(2) == again);
}

TEST_CASE("lyapunov document round trip reproduces the assembled program") {
    const Scenario s = gd_scenario(GdConfig{});
    const Json j = io::lyapunov_document(s.model, s.outcomes, s.spec, s.nonneg_names);
    const auto doc = std::get<io::LyapunovDocument>(io::parse_document(j.dump(2)));
    CHECK(doc.nonneg_names == s.nonneg_names);
    CHECK(doc.model.leaf_count() == s.model.leaf_count());
    CHECK(doc.model.constraints().size() == s.model.constraints().size());
    const CertificateProblem a = assemble(s.model, s.outcomes, s.spec);
    const CertificateProblem b = assemble(doc.model, doc.outcomes, doc.spec);
    CHECK(io::to_json(a.program).dump() == io::to_json(b.program).dump());
    CHECK(io::lyapunov_document(doc.model, doc.outcomes, doc.spec, doc.nonneg_names).dump() == j.dump());
}

TEST_CASE("shipped example matches the built-in scenario") {
    const auto doc = io::parse_document(read("gd-example.json"));
    RunOptions opt;
    const GenericRun g = run_generic(doc, opt);
    const GdRun r = run_gd(GdConfig{}, false, opt);
    CHECK(g.status == RunStatus::Feasible);
    CHECK(g.output["certificate"].dump() == to_json(r)["certificate"].dump());
}

TEST_CASE("empty model with zero decrease") {
    const auto doc = io::parse_document(read("zero-decrease.json"));
    const GenericRun g = run_generic(doc, RunOptions{});
    CHECK(g.status == RunStatus::Feasible);
    CHECK(g.output["certificate"]["verification"]["passed"] == true);

    // Descent mode is a feasibility problem, so the solver may return any
    // certificate; the zero one must verify as well.
    const auto& d = std::get<io::LyapunovDocument>(doc);
    const CertificateProblem p = assemble(d.model, d.outcomes, d.spec);
    Certificate zero;
    zero.Q = Matrix::Zero(1, 1);
    zero.q = Vector::Zero(0);
    zero.systems.push_back(SystemMultipliers{SystemKind::Descent, Vector::Zero(0), {}, {}});
    CHECK(verify_certificate(p, zero).passed);
}

TEST_CASE("schema errors carry the line of the offending value") {
    expect_error(read("malformed-cone.json"), 7, "/cones/0/dim");
    expect_error("{\n  \"kind\": \"conic_program\",\n  \"c\": [1],\n  \"b\": [1],\n  \"A\": [],\n  \"cones\": [\n"
                 "    {\"type\": \"cube\", \"dim\": 1}\n  ]\n}\n",
                 7, "/cones/0/type");
    expect_error("{\"kind\": \"polytope\"}", 1, "/kind");
    expect_error("{\n\"kind\": \"conic_program\",\n\"c\": [1],\n\"b\": [1],\n\"A\": [[0, 0, 1]],\n"
                 "\"cones\": [{\"type\": \"zero\", \"dim\": 1}],\n\"extra\": true\n}",
                 7, "/extra");
    expect_error("{\n\"kind\": \"conic_program\",\n\"c\": [1],\n\"b\": [1],\n\"A\": [[0, 3, 1]],\n"
                 "\"cones\": [{\"type\": \"zero\", \"dim\": 1}]\n}",
                 5, "/A/0");
    expect_error("{\n\"kind\": \"conic_program\",\n\"c\": [1],\n\"b\": [1, 2],\n\"A\": [],\n"
                 "\"cones\": [{\"type\": \"zero\", \"dim\": 1}]\n}",
                 6, "/cones");
    expect_error("{\n  \"kind\": \"conic_program\",\n  \"c\": [\"one\"]\n}", 3, "/c/0");
    expect_error("{\"kind\": \"conic_program\",\n", 2, "");
}

TEST_CASE("lyapunov schema errors") {
    std::string text = read("zero-decrease.json");
    SUBCASE("bad probability") {
        text.replace(text.find("\"prob\": 1.0"), 11, "\"prob\": 0.5");
        expect_error(text, 8, "/outcomes");
    }
    SUBCASE("bad mode") {
        text.replace(text.find("\"descent\""), 9, "\"fastest\"");
        expect_error(text, 13, "/lyapunov/mode");
    }
    SUBCASE("sigma of the wrong size") {
        text.replace(text.find("[[0.5]]"), 7, "[[0.5, 1]]");
        expect_error(text, 9, "/outcomes/0/sigma/0");
    }
}

TEST_CASE("certificate output embeds its verification") {
    const GdRun r = run_gd(GdConfig{}, false, RunOptions{});
    const Json j = to_json(r);
    CHECK(j["result"] == "feasible");
    CHECK(j["certificate"]["verification"]["passed"] == true);
    CHECK(j["verification"]["sample"]["passed"] == true);
    CHECK(j["certificate"]["q"][0]["name"] == "f(x0)-f*");
    CHECK(j["certificate"]["systems"][0]["kind"] == "descent");
    CHECK(j.dump().find("wall") == std::string::npos);
}
