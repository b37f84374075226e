// SPDX-License-Identifier: Apache-2.0

#include "lyacert/io_json.hpp"

#include <cmath>
#include <iterator>

#include "lyacert/cone_ops.hpp"

namespace lyacert::io {

SchemaError::SchemaError(const std::string& pointer, int line, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (pointer.empty() ? std::string() : pointer + ": ") + message),
      pointer_(pointer),
      line_(line) {}

namespace {

// ------------------------------------------------------------ line tracking

struct LineState {
    int line = 1;
    bool after_newline = false;
};

// Counts lines as the parser consumes characters. The line advances only
// when the character after a newline is read, so a one-character lookahead
// past the end of a token does not shift the token to the next line.
class CountingIterator {
public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    CountingIterator(const char* p, LineState* state) : p_(p), state_(state) {}

    reference operator*() const { return *p_; }
    CountingIterator& operator++() {
        if (state_->after_newline) ++state_->line;
        state_->after_newline = *p_ == '\n';
        ++p_;
        return *this;
    }
    CountingIterator operator++(int) {
        CountingIterator old = *this;
        ++*this;
        return old;
    }
    friend bool operator==(const CountingIterator& a, const CountingIterator& b) { return a.p_ == b.p_; }
    friend bool operator!=(const CountingIterator& a, const CountingIterator& b) { return a.p_ != b.p_; }

private:
    const char* p_;
    LineState* state_;
};

std::string escape_token(const std::string& key) {
    std::string out;
    for (char ch : key) {
        if (ch == '~') out += "~0";
        else if (ch == '/') out += "~1";
        else out += ch;
    }
    return out;
}

class LineSax {
public:
    LineSax(std::map<std::string, int>& out, const LineState& state) : out_(out), state_(state) {}

    bool null() { return scalar(); }
    bool boolean(bool) { return scalar(); }
    bool number_integer(Json::number_integer_t) { return scalar(); }
    bool number_unsigned(Json::number_unsigned_t) { return scalar(); }
    bool number_float(Json::number_float_t, const std::string&) { return scalar(); }
    bool string(std::string&) { return scalar(); }
    bool binary(Json::binary_t&) { return scalar(); }
    bool start_object(std::size_t) { return open(false); }
    bool start_array(std::size_t) { return open(true); }
    bool end_object() { return close(); }
    bool end_array() { return close(); }
    bool key(std::string& k) {
        frames_.back().key = escape_token(k);
        return true;
    }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) { return false; }

private:
    struct Frame {
        bool array = false;
        std::size_t index = 0;
        std::string key;
    };

    std::string here() const {
        std::string s;
        for (const auto& f : frames_) s += '/' + (f.array ? std::to_string(f.index) : f.key);
        return s;
    }
    bool scalar() {
        out_[here()] = state_.line;
        if (!frames_.empty() && frames_.back().array) ++frames_.back().index;
        return true;
    }
    bool open(bool array) {
        out_[here()] = state_.line;
        frames_.push_back(Frame{array, 0, {}});
        return true;
    }
    bool close() {
        frames_.pop_back();
        if (!frames_.empty() && frames_.back().array) ++frames_.back().index;
        return true;
    }

    std::map<std::string, int>& out_;
    const LineState& state_;
    std::vector<Frame> frames_;
};

// ------------------------------------------------------------ reading

class Reader {
public:
    explicit Reader(std::map<std::string, int> lines) : lines_(std::move(lines)) {}

    [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
        auto it = lines_.find(ptr);
        throw SchemaError(ptr.empty() ? "/" : ptr, it == lines_.end() ? 0 : it->second, msg);
    }

    const Json& member(const Json& j, const std::string& ptr, const std::string& key) const {
        object(j, ptr);
        auto it = j.find(key);
        if (it == j.end()) fail(ptr, "missing required field \"" + key + "\"");
        return *it;
    }
    const Json* optional(const Json& j, const std::string& ptr, const std::string& key) const {
        object(j, ptr);
        auto it = j.find(key);
        return it == j.end() || it->is_null() ? nullptr : &*it;
    }
    void object(const Json& j, const std::string& ptr) const {
        if (!j.is_object()) fail(ptr, "expected an object");
    }
    void only(const Json& j, const std::string& ptr, std::initializer_list<const char*> keys) const {
        object(j, ptr);
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool known = false;
            for (const char* k : keys) known = known || it.key() == k;
            if (!known) fail(ptr + "/" + escape_token(it.key()), "unknown field \"" + it.key() + "\"");
        }
    }
    const Json& array(const Json& j, const std::string& ptr) const {
        if (!j.is_array()) fail(ptr, "expected an array");
        return j;
    }
    Scalar number(const Json& j, const std::string& ptr) const {
        if (!j.is_number()) fail(ptr, "expected a number");
        const Scalar v = j.get<Scalar>();
        if (!std::isfinite(v)) fail(ptr, "expected a finite number");
        return v;
    }
    std::size_t index(const Json& j, const std::string& ptr) const {
        if (j.is_number_unsigned()) return j.get<std::size_t>();
        if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::size_t>(j.get<long long>());
        fail(ptr, "expected a nonnegative integer");
    }
    std::string string(const Json& j, const std::string& ptr) const {
        if (!j.is_string()) fail(ptr, "expected a string");
        return j.get<std::string>();
    }
    Vector vector(const Json& j, const std::string& ptr) const {
        array(j, ptr);
        Vector v(static_cast<Eigen::Index>(j.size()));
        for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], at(ptr, i));
        return v;
    }
    Matrix rows(const Json& j, const std::string& ptr, std::size_t r, std::size_t c) const {
        array(j, ptr);
        if (j.size() != r) fail(ptr, "expected " + std::to_string(r) + " rows");
        Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        for (std::size_t i = 0; i < r; ++i) {
            const Vector row = vector(j[i], at(ptr, i));
            if (static_cast<std::size_t>(row.size()) != c) fail(at(ptr, i), "expected " + std::to_string(c) + " columns");
            m.row(static_cast<Eigen::Index>(i)) = row.transpose();
        }
        return m;
    }
    /// [[i, j, v], ...]
    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> triplets(const Json& j, const std::string& ptr) const {
        array(j, ptr);
        std::vector<std::tuple<std::size_t, std::size_t, Scalar>> out;
        for (std::size_t t = 0; t < j.size(); ++t) {
            const std::string p = at(ptr, t);
            if (!j[t].is_array() || j[t].size() != 3) fail(p, "expected [row, col, value]");
            out.emplace_back(index(j[t][0], at(p, 0)), index(j[t][1], at(p, 1)), number(j[t][2], at(p, 2)));
        }
        return out;
    }
    /// [[k, v], ...]
    std::vector<std::pair<std::size_t, Scalar>> pairs(const Json& j, const std::string& ptr) const {
        array(j, ptr);
        std::vector<std::pair<std::size_t, Scalar>> out;
        for (std::size_t t = 0; t < j.size(); ++t) {
            const std::string p = at(ptr, t);
            if (!j[t].is_array() || j[t].size() != 2) fail(p, "expected [index, value]");
            out.emplace_back(index(j[t][0], at(p, 0)), number(j[t][1], at(p, 1)));
        }
        return out;
    }

    static std::string at(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }
    static std::string at(const std::string& ptr, const std::string& key) { return ptr + "/" + escape_token(key); }

    ScalarExpr expr(const Json& j, const std::string& ptr) const {
        only(j, ptr, {"a", "b", "D"});
        return expr_fields(j, ptr);
    }

    /// Reads the a, b, D fields of j, ignoring any others.
    ScalarExpr expr_fields(const Json& j, const std::string& ptr) const {
        ScalarExpr e;
        if (const Json* a = optional(j, ptr, "a")) e.add_constant(number(*a, at(ptr, "a")));
        if (const Json* b = optional(j, ptr, "b"))
            for (auto [f, v] : pairs(*b, at(ptr, "b"))) e.add_lin(f, v);
        if (const Json* d = optional(j, ptr, "D")) {
            std::size_t t = 0;
            for (auto [r, c, v] : triplets(*d, at(ptr, "D"))) {
                if (r > c) fail(at(at(ptr, "D"), t), "quadratic entries must be in the upper triangle (row <= col)");
                e.add_quad(r, c, v);
                ++t;
            }
        }
        return e;
    }

    void check_expr(const PepModel& m, const ScalarExpr& e, const std::string& ptr) const {
        if (e.leaf_extent() > m.leaf_count()) fail(ptr, "refers to a leaf outside 0.." + std::to_string(m.leaf_count()));
        if (e.f_extent() > m.f_count()) fail(ptr, "refers to a function value outside 0.." + std::to_string(m.f_count()));
    }

    conic::ConicProgram program(const Json& j) const {
        only(j, "", {"kind", "c", "A", "b", "cones"});
        conic::ConicProgram p;
        p.c = vector(member(j, "", "c"), "/c");
        p.b = vector(member(j, "", "b"), "/b");
        std::vector<conic::Triplet> trip;
        std::size_t t = 0;
        for (auto [r, c, v] : triplets(member(j, "", "A"), "/A")) {
            if (r >= static_cast<std::size_t>(p.b.size())) fail(at("/A", t), "row index outside b");
            if (c >= static_cast<std::size_t>(p.c.size())) fail(at("/A", t), "column index outside c");
            trip.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c), v);
            ++t;
        }
        p.A.resize(p.b.size(), p.c.size());
        p.A.setFromTriplets(trip.begin(), trip.end());
        const Json& cones = array(member(j, "", "cones"), "/cones");
        for (std::size_t k = 0; k < cones.size(); ++k) {
            const std::string ptr = at("/cones", k);
            only(cones[k], ptr, {"type", "dim"});
            const std::string type = string(member(cones[k], ptr, "type"), ptr + "/type");
            conic::Cone cone;
            if (type == "zero") cone.type = conic::ConeType::Zero;
            else if (type == "nonneg") cone.type = conic::ConeType::NonNeg;
            else if (type == "psd") cone.type = conic::ConeType::Psd;
            else fail(ptr + "/type", "unknown cone type \"" + type + "\" (expected zero, nonneg or psd)");
            cone.dim = index(member(cones[k], ptr, "dim"), ptr + "/dim");
            if (cone.dim == 0) fail(ptr + "/dim", "cone dimension must be positive");
            p.cones.push_back(cone);
        }
        if (p.cone_rows() != p.num_rows())
            fail("/cones", "cones cover " + std::to_string(p.cone_rows()) + " rows but b has " +
                               std::to_string(p.num_rows()));
        return p;
    }

    PepModel model(const Json& j, const std::string& ptr) const {
        only(j, ptr, {"leaf_count", "leaf_subspaces", "f_count", "constraints", "lmi_blocks", "names"});
        PepModel m;
        if (const Json* s = optional(j, ptr, "leaf_subspaces")) {
            array(*s, ptr + "/leaf_subspaces");
            for (std::size_t i = 0; i < s->size(); ++i) m.new_leaf(index((*s)[i], at(ptr + "/leaf_subspaces", i)));
            if (const Json* n = optional(j, ptr, "leaf_count"); n && index(*n, ptr + "/leaf_count") != s->size())
                fail(ptr + "/leaf_count", "disagrees with the length of leaf_subspaces");
        } else {
            const std::size_t n = index(member(j, ptr, "leaf_count"), ptr + "/leaf_count");
            for (std::size_t i = 0; i < n; ++i) m.new_leaf();
        }
        const std::size_t nf = index(member(j, ptr, "f_count"), ptr + "/f_count");
        for (std::size_t i = 0; i < nf; ++i) m.new_f_symbol();

        const std::string cptr = ptr + "/constraints";
        const Json& cons = array(member(j, ptr, "constraints"), cptr);
        for (std::size_t k = 0; k < cons.size(); ++k) {
            const std::string p = at(cptr, k);
            only(cons[k], p, {"a", "b", "D", "sense", "tag"});
            const ScalarExpr e = expr_fields(cons[k], p);
            check_expr(m, e, p);
            const std::string sense = string(member(cons[k], p, "sense"), p + "/sense");
            Sense s = Sense::Leq0;
            if (sense == "eq") s = Sense::Eq0;
            else if (sense != "leq") fail(p + "/sense", "expected \"leq\" or \"eq\"");
            std::string tag = "c" + std::to_string(k);
            if (const Json* t = optional(cons[k], p, "tag")) tag = string(*t, p + "/tag");
            m.add_constraint(e, s, tag);
        }
        if (const Json* blocks = optional(j, ptr, "lmi_blocks")) {
            const std::string bptr = ptr + "/lmi_blocks";
            array(*blocks, bptr);
            for (std::size_t k = 0; k < blocks->size(); ++k) {
                const std::string p = at(bptr, k);
                const Json& b = (*blocks)[k];
                only(b, p, {"dim", "tag", "entries"});
                LmiBlock blk;
                blk.dim = index(member(b, p, "dim"), p + "/dim");
                if (blk.dim == 0) fail(p + "/dim", "block dimension must be positive");
                blk.entries.assign(blk.dim * blk.dim, ScalarExpr{});
                if (const Json* t = optional(b, p, "tag")) blk.tag = string(*t, p + "/tag");
                const std::string eptr = p + "/entries";
                const Json& entries = array(member(b, p, "entries"), eptr);
                for (std::size_t t = 0; t < entries.size(); ++t) {
                    const std::string q = at(eptr, t);
                    if (!entries[t].is_array() || entries[t].size() != 3) fail(q, "expected [row, col, expression]");
                    const std::size_t r = index(entries[t][0], at(q, 0)), c = index(entries[t][1], at(q, 1));
                    if (r > c || c >= blk.dim) fail(q, "entry must satisfy row <= col < dim");
                    const ScalarExpr e = expr(entries[t][2], at(q, 2));
                    check_expr(m, e, at(q, 2));
                    blk.at(r, c) += e;
                    if (r != c) blk.at(c, r) += e;
                }
                m.add_lmi_block(std::move(blk));
            }
        }
        if (const Json* names = optional(j, ptr, "names")) {
            const std::string nptr = ptr + "/names";
            object(*names, nptr);
            for (auto it = names->begin(); it != names->end(); ++it) {
                const std::string p = at(nptr, it.key());
                only(it.value(), p, {"point", "symbol"});
                if (const Json* sym = optional(it.value(), p, "symbol")) {
                    const std::size_t id = index(*sym, p + "/symbol");
                    if (id >= m.f_count()) fail(p + "/symbol", "unknown function value");
                    m.name(it.key(), FSymbol{id});
                } else {
                    PointExpr pt;
                    for (auto [leaf, v] : pairs(member(it.value(), p, "point"), p + "/point")) {
                        if (leaf >= m.leaf_count()) fail(p + "/point", "unknown leaf");
                        pt += v * PointExpr::leaf(LeafIndex{leaf});
                    }
                    m.name(it.key(), pt);
                }
            }
        }
        m.freeze();
        return m;
    }

    OutcomeSet outcomes(const Json& j, const std::string& ptr, const PepModel& m) const {
        array(j, ptr);
        if (j.empty()) fail(ptr, "at least one outcome is required");
        OutcomeSet out;
        Scalar total = 0.0;
        for (std::size_t k = 0; k < j.size(); ++k) {
            const std::string p = at(ptr, k);
            only(j[k], p, {"prob", "sigma", "sigma_f", "sigma_f_offset"});
            Outcome o;
            o.prob = number(member(j[k], p, "prob"), p + "/prob");
            if (!(o.prob > 0.0 && o.prob <= 1.0)) fail(p + "/prob", "probability must lie in (0, 1]");
            total += o.prob;
            o.transition.sigma = rows(member(j[k], p, "sigma"), p + "/sigma", m.leaf_count(), m.leaf_count());
            o.transition.sigma_f = rows(member(j[k], p, "sigma_f"), p + "/sigma_f", m.f_count(), m.f_count());
            o.transition.sigma_f_offset = Vector::Zero(static_cast<Eigen::Index>(m.f_count()));
            if (const Json* off = optional(j[k], p, "sigma_f_offset")) {
                o.transition.sigma_f_offset = vector(*off, p + "/sigma_f_offset");
                if (static_cast<std::size_t>(o.transition.sigma_f_offset.size()) != m.f_count())
                    fail(p + "/sigma_f_offset", "expected " + std::to_string(m.f_count()) + " entries");
            }
            out.outcomes.push_back(std::move(o));
        }
        if (std::abs(total - 1.0) > 1e-12) fail(ptr, "probabilities must sum to 1");
        return out;
    }

    LyapunovSpec spec(const Json& j, const std::string& ptr, const PepModel& m, std::vector<std::string>& names) const {
        only(j, ptr,
             {"support", "nonneg", "nonneg_names", "decrease", "mode", "rho", "fixed_q", "minimize_q", "normalization"});
        LyapunovSpec s;
        if (const Json* sup = optional(j, ptr, "support")) {
            array(*sup, ptr + "/support");
            for (std::size_t i = 0; i < sup->size(); ++i) {
                const std::size_t l = index((*sup)[i], at(ptr + "/support", i));
                if (l >= m.leaf_count()) fail(at(ptr + "/support", i), "unknown leaf");
                s.support.insert(l);
            }
        }
        if (const Json* nn = optional(j, ptr, "nonneg")) {
            array(*nn, ptr + "/nonneg");
            for (std::size_t i = 0; i < nn->size(); ++i) {
                s.nonneg.push_back(expr((*nn)[i], at(ptr + "/nonneg", i)));
                check_expr(m, s.nonneg.back(), at(ptr + "/nonneg", i));
            }
        }
        if (const Json* nm = optional(j, ptr, "nonneg_names")) {
            array(*nm, ptr + "/nonneg_names");
            for (std::size_t i = 0; i < nm->size(); ++i) names.push_back(string((*nm)[i], at(ptr + "/nonneg_names", i)));
            if (names.size() != s.nonneg.size()) fail(ptr + "/nonneg_names", "needs one name per nonneg entry");
        }
        if (const Json* d = optional(j, ptr, "decrease")) {
            s.decrease = expr(*d, ptr + "/decrease");
            check_expr(m, s.decrease, ptr + "/decrease");
        }
        const std::string mode = string(member(j, ptr, "mode"), ptr + "/mode");
        if (mode == "descent") s.mode = LyapunovMode::Descent;
        else if (mode == "linear_rate") s.mode = LyapunovMode::LinearRate;
        else if (mode == "minmax_value") s.mode = LyapunovMode::MinMaxValue;
        else fail(ptr + "/mode", "expected descent, linear_rate or minmax_value");
        if (const Json* r = optional(j, ptr, "rho")) s.rho = number(*r, ptr + "/rho");
        if (const Json* fq = optional(j, ptr, "fixed_q")) {
            array(*fq, ptr + "/fixed_q");
            for (std::size_t i = 0; i < fq->size(); ++i) {
                if ((*fq)[i].is_null()) s.fixed_q.emplace_back();
                else s.fixed_q.emplace_back(number((*fq)[i], at(ptr + "/fixed_q", i)));
            }
        }
        if (const Json* mq = optional(j, ptr, "minimize_q")) s.minimize_q = index(*mq, ptr + "/minimize_q");
        if (const Json* nz = optional(j, ptr, "normalization")) {
            const std::string p = ptr + "/normalization";
            only(*nz, p, {"trace_bound", "unit_leaves"});
            MinMaxNormalization n;
            if (const Json* b = optional(*nz, p, "trace_bound")) n.trace_bound = number(*b, p + "/trace_bound");
            if (const Json* u = optional(*nz, p, "unit_leaves")) {
                array(*u, p + "/unit_leaves");
                for (std::size_t i = 0; i < u->size(); ++i) n.unit_leaves.push_back(index((*u)[i], at(p + "/unit_leaves", i)));
            }
            s.normalization = n;
        }
        try {
            s.validate(m);
        } catch (const std::exception& e) {
            fail(ptr, e.what());
        }
        return s;
    }

private:
    std::map<std::string, int> lines_;
};

int line_of_byte(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

Json rows_json(const Matrix& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

Json vec_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

}  // namespace

std::map<std::string, int> line_map(const std::string& text) {
    std::map<std::string, int> out;
    LineState state;
    LineSax sax(out, state);
    const char* b = text.data();
    Json::sax_parse(CountingIterator(b, &state), CountingIterator(b + text.size(), &state), &sax);
    return out;
}

Document parse_document(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw SchemaError("", line_of_byte(text, e.byte), std::string("invalid JSON: ") + e.what());
    }
    Reader rd(line_map(text));
    const std::string kind = rd.string(rd.member(j, "", "kind"), "/kind");
    if (kind == "conic_program") return rd.program(j);
    if (kind != "lyapunov") rd.fail("/kind", "expected \"conic_program\" or \"lyapunov\"");
    rd.only(j, "", {"kind", "model", "outcomes", "lyapunov"});
    LyapunovDocument doc;
    doc.model = rd.model(rd.member(j, "", "model"), "/model");
    doc.outcomes = rd.outcomes(rd.member(j, "", "outcomes"), "/outcomes", doc.model);
    doc.spec = rd.spec(rd.member(j, "", "lyapunov"), "/lyapunov", doc.model, doc.nonneg_names);
    for (std::size_t i = doc.nonneg_names.size(); i < doc.spec.nonneg.size(); ++i)
        doc.nonneg_names.push_back("N" + std::to_string(i));
    return doc;
}

// ------------------------------------------------------------ writing

Json to_json(const ScalarExpr& e) {
    Json out = Json::object();
    if (e.constant() != 0.0) out["a"] = e.constant();
    if (!e.lin().empty()) {
        Json b = Json::array();
        for (const auto& [f, v] : e.lin()) b.push_back(Json::array({f, v}));
        out["b"] = std::move(b);
    }
    if (!e.quad().empty()) {
        Json d = Json::array();
        for (const auto& [key, v] : e.quad()) d.push_back(Json::array({key.first, key.second, v}));
        out["D"] = std::move(d);
    }
    return out;
}

Json to_json(const conic::ConicProgram& p) {
    Json out;
    out["kind"] = "conic_program";
    out["c"] = vec_json(p.c);
    out["b"] = vec_json(p.b);
    Json a = Json::array();
    for (Eigen::Index k = 0; k < p.A.outerSize(); ++k)
        for (conic::SparseMatrix::InnerIterator it(p.A, k); it; ++it) a.push_back(Json::array({it.row(), it.col(), it.value()}));
    out["A"] = std::move(a);
    Json cones = Json::array();
    for (const auto& c : p.cones) cones.push_back({{"type", conic::to_string(c.type)}, {"dim", c.dim}});
    out["cones"] = std::move(cones);
    return out;
}

Json to_json(const PepModel& m) {
    Json out;
    out["leaf_count"] = m.leaf_count();
    out["leaf_subspaces"] = m.leaf_subspaces();
    out["f_count"] = m.f_count();
    Json cons = Json::array();
    for (const auto& c : m.constraints()) {
        Json jc = to_json(c.expr);
        jc["sense"] = c.sense == Sense::Eq0 ? "eq" : "leq";
        jc["tag"] = c.tag;
        cons.push_back(std::move(jc));
    }
    out["constraints"] = std::move(cons);
    Json blocks = Json::array();
    for (const auto& b : m.lmi_blocks()) {
        Json entries = Json::array();
        for (std::size_t i = 0; i < b.dim; ++i)
            for (std::size_t j = i; j < b.dim; ++j)
                if (!b.at(i, j).is_zero()) entries.push_back(Json::array({i, j, to_json(b.at(i, j))}));
        blocks.push_back({{"dim", b.dim}, {"tag", b.tag}, {"entries", std::move(entries)}});
    }
    out["lmi_blocks"] = std::move(blocks);
    Json names = Json::object();
    for (const auto& [key, entity] : m.names()) {
        if (const auto* s = std::get_if<FSymbol>(&entity)) {
            names[key] = {{"symbol", s->id}};
        } else {
            Json pt = Json::array();
            for (const auto& [leaf, v] : std::get<PointExpr>(entity).coeffs()) pt.push_back(Json::array({leaf, v}));
            names[key] = {{"point", std::move(pt)}};
        }
    }
    out["names"] = std::move(names);
    return out;
}

Json to_json(const OutcomeSet& o) {
    Json out = Json::array();
    for (const auto& w : o.outcomes) {
        Json jw;
        jw["prob"] = w.prob;
        jw["sigma"] = rows_json(w.transition.sigma);
        jw["sigma_f"] = rows_json(w.transition.sigma_f);
        if (w.transition.sigma_f_offset.size() > 0 && !w.transition.sigma_f_offset.isZero(0.0))
            jw["sigma_f_offset"] = vec_json(w.transition.sigma_f_offset);
        out.push_back(std::move(jw));
    }
    return out;
}

Json to_json(const LyapunovSpec& s, const std::vector<std::string>& nonneg_names) {
    Json out;
    out["support"] = Json(std::vector<std::size_t>(s.support.begin(), s.support.end()));
    Json nn = Json::array();
    for (const auto& e : s.nonneg) nn.push_back(to_json(e));
    out["nonneg"] = std::move(nn);
    if (!nonneg_names.empty()) out["nonneg_names"] = nonneg_names;
    out["decrease"] = to_json(s.decrease);
    out["mode"] = to_string(s.mode);
    out["rho"] = s.rho;
    if (!s.fixed_q.empty()) {
        Json fq = Json::array();
        for (const auto& v : s.fixed_q) fq.push_back(v ? Json(*v) : Json(nullptr));
        out["fixed_q"] = std::move(fq);
    }
    if (s.minimize_q) out["minimize_q"] = *s.minimize_q;
    if (s.normalization) {
        out["normalization"] = {{"trace_bound", s.normalization->trace_bound},
                                {"unit_leaves", s.normalization->unit_leaves}};
    }
    return out;
}

Json lyapunov_document(const PepModel& model, const OutcomeSet& outcomes, const LyapunovSpec& spec,
                       const std::vector<std::string>& nonneg_names) {
    Json out;
    out["kind"] = "lyapunov";
    out["model"] = to_json(model);
    out["outcomes"] = to_json(outcomes);
    out["lyapunov"] = to_json(spec, nonneg_names);
    return out;
}

Json to_json(const conic::SolveReport& r) {
    Json out;
    out["status"] = conic::to_string(r.status);
    out["iterations"] = r.iterations;
    out["primal_objective"] = r.primal_objective;
    out["dual_objective"] = r.dual_objective;
    out["residuals"] = {{"primal", r.residuals.primal}, {"dual", r.residuals.dual}, {"gap", r.residuals.gap}};
    out["x"] = vec_json(r.x);
    out["s"] = vec_json(r.s);
    out["y"] = vec_json(r.y);
    return out;
}

Json to_json(const VerificationReport& v) {
    Json out;
    out["passed"] = v.passed;
    out["eig_max"] = v.eig_max;
    out["lin_res"] = v.lin_res;
    out["const_slack"] = v.const_slack;
    out["sign_violation"] = v.sign_violation;
    if (!v.failure.empty()) out["failure"] = v.failure;
    return out;
}

Json to_json(const SampleReport& s) {
    Json out;
    out["passed"] = s.passed;
    out["sample_worst"] = s.samples > 0 ? Json(s.worst) : Json(nullptr);
    out["samples"] = s.samples;
    out["seed"] = s.seed;
    return out;
}

Json to_json(const CertificateProblem& problem, const Certificate& cert, const std::vector<std::string>& nonneg_names) {
    Json out;
    out["status"] = conic::to_string(cert.status);
    out["feasible"] = certified(cert);
    out["mode"] = to_string(problem.spec.mode);
    if (problem.spec.mode == LyapunovMode::LinearRate) out["rho"] = problem.spec.rho;
    out["objective"] = cert.objective;
    // Q restricted to the support, in leaf order
    std::vector<std::size_t> sup(problem.spec.support.begin(), problem.spec.support.end());
    Matrix Qs(static_cast<Eigen::Index>(sup.size()), static_cast<Eigen::Index>(sup.size()));
    for (std::size_t i = 0; i < sup.size(); ++i)
        for (std::size_t j = 0; j < sup.size(); ++j)
            Qs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                cert.Q(static_cast<Eigen::Index>(sup[i]), static_cast<Eigen::Index>(sup[j]));
    out["Q"] = {{"leaves", sup}, {"matrix", rows_json(Qs)}};
    Json q = Json::array();
    for (Eigen::Index k = 0; k < cert.q.size(); ++k) {
        const auto kk = static_cast<std::size_t>(k);
        q.push_back({{"name", kk < nonneg_names.size() ? nonneg_names[kk] : "N" + std::to_string(k)}, {"value", cert.q(k)}});
    }
    out["q"] = std::move(q);
    Json systems = Json::array();
    for (const auto& m : cert.systems) {
        Json js;
        js["kind"] = to_string(m.kind);
        Json mult = Json::array();
        for (Eigen::Index i = 0; i < m.constraint.size(); ++i)
            if (m.constraint(i) != 0.0)
                mult.push_back({{"tag", problem.model.constraints()[static_cast<std::size_t>(i)].tag}, {"value", m.constraint(i)}});
        js["multipliers"] = std::move(mult);
        Json lmi = Json::array();
        for (std::size_t b = 0; b < m.lmi.size(); ++b)
            lmi.push_back({{"tag", problem.model.lmi_blocks()[b].tag}, {"matrix", rows_json(m.lmi[b])}});
        js["lmi"] = std::move(lmi);
        if (!m.mu.empty()) {
            Json mu = Json::array();
            for (auto [leaf, v] : m.mu) mu.push_back(Json::array({leaf, v}));
            js["mu"] = std::move(mu);
        }
        systems.push_back(std::move(js));
    }
    out["systems"] = std::move(systems);
    out["solver"] = {{"iterations", cert.iterations},
                     {"residuals",
                      {{"primal", cert.solver_residuals.primal},
                       {"dual", cert.solver_residuals.dual},
                       {"gap", cert.solver_residuals.gap}}}};
    out["verification"] = to_json(cert.verification);
    return out;
}

}  // namespace lyacert::io
