// SPDX-License-Identifier: Apache-2.0

#include "lyacert/problem_classes.hpp"

#include <cmath>

namespace lyacert {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::string pair_tag(const std::string& fname, const char* cls, std::size_t i, std::size_t j) {
    return fname + ":" + cls + ":(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

}  // namespace

std::string class_name(const FunctionClass& cls) {
    return std::visit(overloaded{
                          [](const Convex&) { return std::string("convex"); },
                          [](const SmoothConvex&) { return std::string("smooth_convex"); },
                          [](const SmoothStronglyConvex&) { return std::string("smooth_strongly_convex"); },
                          [](const BlockSmoothConvex&) { return std::string("block_smooth_convex"); },
                      },
                      cls);
}

void validate(const FunctionClass& cls) {
    std::visit(overloaded{
                   [](const Convex&) {},
                   [](const SmoothConvex& c) {
                       if (!(c.L > 0.0) || !std::isfinite(c.L)) throw ParameterError("smoothness L must be > 0");
                   },
                   [](const SmoothStronglyConvex& c) {
                       if (!(c.L > 0.0) || !std::isfinite(c.L)) throw ParameterError("smoothness L must be > 0");
                       if (!(c.mu >= 0.0) || !(c.mu < c.L)) throw ParameterError("need 0 <= mu < L");
                   },
                   [](const BlockSmoothConvex& c) {
                       if (c.L.empty() || c.L.size() != c.subspaces.size())
                           throw ParameterError("block class needs one constant and one subspace per block");
                       for (Scalar l : c.L) {
                           if (!(l > 0.0) || !std::isfinite(l)) throw ParameterError("block constants must be > 0");
                       }
                   },
               },
               cls);
}

// ------------------------------------------------------------ FunctionHandle

FunctionHandle::FunctionHandle(PepModel& model, FunctionClass cls, std::string name, std::size_t subspace)
    : model_(&model), class_(std::move(cls)), name_(std::move(name)), subspace_(subspace) {
    validate(class_);
}

FunctionHandle declare_function(PepModel& model, FunctionClass cls, std::string name, std::size_t subspace) {
    return FunctionHandle(model, std::move(cls), std::move(name), subspace);
}

const Triple* FunctionHandle::find(const PointExpr& point) const {
    for (const auto& t : triples_) {
        if (t.point == point) return &t;
    }
    return nullptr;
}

Triple FunctionHandle::oracle(const PointExpr& point) {
    if (const Triple* t = find(point)) return *t;
    model_->check(dot(point, point));
    PointExpr grad;
    if (const auto* block = std::get_if<BlockSmoothConvex>(&class_)) {
        for (std::size_t s : block->subspaces) grad += model_->new_leaf(s);
    } else {
        grad = model_->new_leaf(subspace_);
    }
    const FSymbol value = model_->new_f_symbol();
    triples_.push_back(Triple{point, grad, value});
    return triples_.back();
}

Triple FunctionHandle::register_stationary(const PointExpr& point) { return register_triple(point, PointExpr{}); }

Triple FunctionHandle::register_triple(const PointExpr& point, const PointExpr& grad) {
    if (const Triple* t = find(point)) {
        if (!(t->grad == grad)) throw ModelingError("point already registered with a different gradient");
        return *t;
    }
    triples_.push_back(Triple{point, grad, model_->new_f_symbol()});
    return triples_.back();
}

Triple FunctionHandle::prox(const PointExpr& anchor, Scalar step) {
    if (!(step > 0.0) || !std::isfinite(step)) throw ParameterError("prox step must be > 0");
    if (std::holds_alternative<BlockSmoothConvex>(class_))
        throw ModelingError("prox is not available for block-smooth classes");
    const PointExpr g = model_->new_leaf(subspace_);
    const PointExpr out = anchor - step * g;
    if (find(out)) throw ModelingError("prox output coincides with a registered point");
    triples_.push_back(Triple{out, g, model_->new_f_symbol()});
    return triples_.back();
}

PointExpr FunctionHandle::block_part(const PointExpr& point, std::size_t block) const {
    const auto* cls = std::get_if<BlockSmoothConvex>(&class_);
    if (!cls) throw ModelingError("block_part requires a block-smooth class");
    if (block >= cls->subspaces.size()) throw ModelingError("unknown block index");
    PointExpr out;
    for (auto [k, c] : point.coeffs()) {
        if (model_->subspace_of(k) == cls->subspaces[block]) out += c * PointExpr::leaf(LeafIndex{k});
    }
    return out;
}

std::vector<ScalarExpr> interpolation_inequalities(const FunctionClass& cls, const Triple& i, const Triple& j,
                                                   const FunctionHandle* handle) {
    // Each returned expression e encodes e <= 0.
    // Base: f_j - f_i + <g_j, x_i - x_j>  (convexity, f_i >= f_j + <g_j, x_i - x_j>).
    const ScalarExpr base = f_value(j.value) - f_value(i.value) + dot(j.grad, i.point - j.point);
    return std::visit(
        overloaded{
            [&](const Convex&) { return std::vector<ScalarExpr>{base}; },
            [&](const SmoothConvex& c) {
                return std::vector<ScalarExpr>{base + (0.5 / c.L) * sqnorm(i.grad - j.grad)};
            },
            [&](const SmoothStronglyConvex& c) {
                const PointExpr dg = i.grad - j.grad;
                const PointExpr dx = i.point - j.point;
                const Scalar w = 1.0 / (2.0 * (1.0 - c.mu / c.L));
                ScalarExpr e = base;
                e += w * ((1.0 / c.L) * sqnorm(dg) + c.mu * sqnorm(dx) - (2.0 * c.mu / c.L) * dot(dg, dx));
                return std::vector<ScalarExpr>{e};
            },
            [&](const BlockSmoothConvex& c) {
                if (!handle) throw ModelingError("block-smooth inequalities need the function handle");
                std::vector<ScalarExpr> out;
                for (std::size_t b = 0; b < c.L.size(); ++b) {
                    const PointExpr dg = handle->block_part(i.grad, b) - handle->block_part(j.grad, b);
                    out.push_back(base + (0.5 / c.L[b]) * sqnorm(dg));
                }
                return out;
            },
        },
        cls);
}

std::vector<std::size_t> FunctionHandle::emit_class_constraints() {
    std::vector<std::size_t> ids;
    const std::string cname = class_name(class_);
    for (std::size_t a = 0; a < triples_.size(); ++a) {
        for (std::size_t b = 0; b < triples_.size(); ++b) {
            if (a == b) continue;
            const auto exprs = interpolation_inequalities(class_, triples_[a], triples_[b], this);
            for (std::size_t k = 0; k < exprs.size(); ++k) {
                std::string tag = pair_tag(name_, cname.c_str(), a, b);
                if (exprs.size() > 1) tag += ":block" + std::to_string(k);
                ids.push_back(model_->add_constraint(exprs[k], Sense::Leq0, std::move(tag)));
            }
        }
    }
    return ids;
}

std::vector<std::size_t> FunctionHandle::emit_block_smooth_constraints(const PointExpr& pre, const PointExpr& post,
                                                                      std::size_t block) {
    const auto* cls = std::get_if<BlockSmoothConvex>(&class_);
    if (!cls) throw ModelingError("block smoothness requires a block-smooth class");
    if (block >= cls->L.size()) throw ModelingError("unknown block index");
    const Triple t_pre = oracle(pre);
    const Triple t_post = oracle(post);
    const PointExpr step = post - pre;
    ScalarExpr e = f_value(t_post.value) - f_value(t_pre.value) - dot(t_pre.grad, step);
    e -= (0.5 * cls->L[block]) * sqnorm(step);
    std::size_t pre_idx = 0, post_idx = 0;
    for (std::size_t k = 0; k < triples_.size(); ++k) {
        if (triples_[k].point == pre) pre_idx = k;
        if (triples_[k].point == post) post_idx = k;
    }
    return {model_->add_constraint(e, Sense::Leq0,
                                   name_ + ":block_descent:(" + std::to_string(pre_idx) + "," +
                                       std::to_string(post_idx) + "):block" + std::to_string(block))};
}

// ------------------------------------------------------------ OperatorHandle

OperatorHandle::OperatorHandle(PepModel& model, Scalar norm_bound, std::string name, std::size_t in_subspace,
                               std::size_t out_subspace)
    : model_(&model),
      norm_bound_(norm_bound),
      name_(std::move(name)),
      in_subspace_(in_subspace),
      out_subspace_(out_subspace) {
    if (!(norm_bound > 0.0) || !std::isfinite(norm_bound)) throw ParameterError("operator norm bound must be > 0");
}

OperatorHandle declare_operator(PepModel& model, Scalar norm_bound, std::string name, std::size_t in_subspace,
                                std::size_t out_subspace) {
    return OperatorHandle(model, norm_bound, std::move(name), in_subspace, out_subspace);
}

PointExpr OperatorHandle::apply(const PointExpr& point) {
    for (const auto& a : forward_) {
        if (a.input == point) return a.output;
    }
    model_->check(dot(point, point));
    forward_.push_back(Application{point, model_->new_leaf(out_subspace_)});
    return forward_.back().output;
}

PointExpr OperatorHandle::apply_adjoint(const PointExpr& point) {
    for (const auto& a : adjoint_) {
        if (a.input == point) return a.output;
    }
    model_->check(dot(point, point));
    adjoint_.push_back(Application{point, model_->new_leaf(in_subspace_)});
    return adjoint_.back().output;
}

std::vector<std::size_t> OperatorHandle::emit_operator_constraints() {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < forward_.size(); ++i) {
        for (std::size_t j = 0; j < adjoint_.size(); ++j) {
            const ScalarExpr e = dot(forward_[i].output, adjoint_[j].input) - dot(forward_[i].input, adjoint_[j].output);
            ids.push_back(model_->add_constraint(
                e, Sense::Eq0, name_ + ":adjoint:(" + std::to_string(i) + "," + std::to_string(j) + ")"));
        }
    }
    const Scalar l2 = norm_bound_ * norm_bound_;
    auto domination = [&](const std::vector<Application>& apps, const std::string& tag) {
        if (apps.empty()) return;
        LmiBlock block;
        block.dim = apps.size();
        block.tag = tag;
        block.entries.resize(block.dim * block.dim);
        for (std::size_t i = 0; i < block.dim; ++i) {
            for (std::size_t j = 0; j < block.dim; ++j) {
                block.at(i, j) = l2 * dot(apps[i].input, apps[j].input) - dot(apps[i].output, apps[j].output);
            }
        }
        model_->add_lmi_block(std::move(block));
    };
    domination(forward_, name_ + ":norm");
    domination(adjoint_, name_ + "T:norm");
    return ids;
}

}  // namespace lyacert
