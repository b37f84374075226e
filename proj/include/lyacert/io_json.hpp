// SPDX-License-Identifier: Apache-2.0
//
// JSON documents read and written by the command-line tool.
//
//   expression  {"a": c, "b": [[f, v], ...], "D": [[i, j, v], ...]}
//               meaning a + sum b_f F_f + <D, G>; D lists the upper triangle
//               (i <= j) of a symmetric matrix, all fields optional
//   program     {"kind": "conic_program", "c": [...], "b": [...],
//                "A": [[row, col, value], ...],
//                "cones": [{"type": "zero" | "nonneg" | "psd", "dim": k}, ...]}
//   lyapunov    {"kind": "lyapunov", "model": {...}, "outcomes": [...],
//                "lyapunov": {...}}
//
// Parsing errors carry the line of the offending value.

#ifndef LYACERT_IO_JSON_HPP
#define LYACERT_IO_JSON_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lyacert/certificate.hpp"
#include "lyacert/conic.hpp"
#include "lyacert/verification.hpp"

namespace lyacert::io {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent document. line is 1-based, 0 when unknown.
class SchemaError : public std::runtime_error {
public:
    SchemaError(const std::string& pointer, int line, const std::string& message);
    const std::string& pointer() const { return pointer_; }
    int line() const { return line_; }

private:
    std::string pointer_;
    int line_ = 0;
};

struct LyapunovDocument {
    PepModel model;
    OutcomeSet outcomes;
    LyapunovSpec spec;
    std::vector<std::string> nonneg_names;
};

using Document = std::variant<conic::ConicProgram, LyapunovDocument>;

/// Parses either document kind. Throws SchemaError.
Document parse_document(const std::string& text);

Json to_json(const ScalarExpr& e);
Json to_json(const conic::ConicProgram& p);
Json to_json(const PepModel& m);
Json to_json(const OutcomeSet& o);
Json to_json(const LyapunovSpec& s, const std::vector<std::string>& nonneg_names);
Json lyapunov_document(const PepModel& model, const OutcomeSet& outcomes, const LyapunovSpec& spec,
                       const std::vector<std::string>& nonneg_names);

Json to_json(const conic::SolveReport& r);
Json to_json(const VerificationReport& v);
Json to_json(const SampleReport& s);
/// Certificate with its verification report embedded.
Json to_json(const CertificateProblem& problem, const Certificate& cert,
             const std::vector<std::string>& nonneg_names);

/// JSON pointer -> line of the value's first character.
std::map<std::string, int> line_map(const std::string& text);

}  // namespace lyacert::io

#endif  // LYACERT_IO_JSON_HPP
