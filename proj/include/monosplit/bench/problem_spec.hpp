#pragma once

// Declarative problem descriptions and their JSON form.
//
//   {"name": "skew-box", "kind": "two_op", "dim": 2,
//    "A": {"type": "box", "lo": [-1, -1], "hi": [1, 1]},
//    "B": {"type": "skew", "matrix": [[1]]},
//    "x0": [0.8, -0.6], "known_solution": [0, 0]}
//
// Resolvent types: zero (dim), l1 (dim, lambda), box (lo, hi), quadratic (Q, c).
// Forward types:   zero (dim), affine (matrix, offset, cocoercive), skew (matrix = L).
// Composite problems add "blocks": [{"A": resolvent, "Binv": forward, "L": matrix}].
// Unknown keys are rejected.

#include <json.hpp>

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "monosplit/composite.hpp"
#include "monosplit/errors.hpp"
#include "monosplit/linalg.hpp"
#include "monosplit/operators.hpp"
#include "monosplit/run.hpp"

namespace monosplit::bench {

using Rows = std::vector<std::vector<double>>;

enum class ProblemKind { two_op, three_op, composite };

inline std::string to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::two_op: return "two_op";
        case ProblemKind::three_op: return "three_op";
        case ProblemKind::composite: return "composite";
    }
    return "unknown";
}

struct ResolventSpec {
    std::string type = "zero";
    std::size_t dim = 0;
    double lambda = 0.0;
    std::vector<double> lo, hi;
    Rows Q;
    std::vector<double> c;
};

struct ForwardSpec {
    std::string type = "zero";
    std::size_t dim = 0;
    Rows matrix;
    std::vector<double> offset;
    bool cocoercive = false;
};

struct DualBlockSpec {
    ResolventSpec A;
    ForwardSpec Binv;
    Rows L;
};

struct ProblemSpec {
    std::string name;
    ProblemKind kind = ProblemKind::two_op;
    std::size_t dim = 0;
    ResolventSpec A;
    std::optional<ForwardSpec> B;
    std::optional<ForwardSpec> C;
    std::vector<DualBlockSpec> blocks;
    std::optional<std::vector<double>> x0;
    /// For composite problems: the flattened product-space point (x, v_1, ..., v_m).
    std::optional<std::vector<double>> known_solution;
    /// Seed of any random data in the instance.
    std::optional<std::uint64_t> seed;
};

/// Operators built from a ProblemSpec.
struct ProblemInstance {
    ProblemSpec spec;
    /// Present for two_op and three_op problems.
    std::optional<OperatorSet<DenseVector>> ops;
    /// Present for composite problems.
    std::optional<CompositeProblem> composite;
};

// ---------------------------------------------------------------------------
// Instantiation

inline ResolventOp<DenseVector> build_resolvent(const ResolventSpec& s) {
    if (s.type == "zero") {
        if (s.dim == 0) throw InvalidProblemError("zero resolvent needs dim");
        return zero_resolvent(s.dim);
    }
    if (s.type == "l1") {
        if (s.dim == 0) throw InvalidProblemError("l1 resolvent needs dim");
        return l1_resolvent(s.lambda, s.dim);
    }
    if (s.type == "box") return box_resolvent(DenseVector(s.lo), DenseVector(s.hi));
    if (s.type == "quadratic") return quadratic_resolvent(Matrix::from_rows(s.Q), DenseVector(s.c));
    throw InvalidProblemError("unknown resolvent type '" + s.type + "'");
}

inline ForwardOp<DenseVector> build_forward(const ForwardSpec& s) {
    if (s.type == "zero") {
        if (s.dim == 0) throw InvalidProblemError("zero forward operator needs dim");
        return zero_forward(s.dim);
    }
    if (s.type == "affine") {
        Matrix m = Matrix::from_rows(s.matrix);
        DenseVector offset = s.offset.empty() ? DenseVector(m.rows()) : DenseVector(s.offset);
        return affine_forward(std::move(m), std::move(offset), s.cocoercive);
    }
    if (s.type == "skew") return make_skew_pair(LinearMap(Matrix::from_rows(s.matrix)));
    throw InvalidProblemError("unknown forward type '" + s.type + "'");
}

/// Builds the operators and checks the spec's structural requirements.
/// Every failure surfaces as InvalidProblemError naming the problem.
inline ProblemInstance instantiate(const ProblemSpec& spec) {
    const std::string ctx = "problem '" + spec.name + "': ";
    try {
        if (spec.dim == 0) throw InvalidProblemError("dim must be positive");
        ProblemInstance inst{spec, std::nullopt, std::nullopt};
        auto a = build_resolvent(spec.A);
        if (a.domain_dim() != spec.dim) throw InvalidProblemError("A acts on the wrong space");
        if (!spec.B) throw InvalidProblemError("operator B is required");
        auto b = build_forward(*spec.B);
        if (b.domain_dim() != spec.dim) throw InvalidProblemError("B acts on the wrong space");

        std::size_t solution_dim = spec.dim;
        switch (spec.kind) {
            case ProblemKind::two_op:
                if (spec.C || !spec.blocks.empty()) throw InvalidProblemError("two_op takes only A and B");
                inst.ops = OperatorSet<DenseVector>{std::move(a), std::move(b), std::nullopt};
                break;
            case ProblemKind::three_op: {
                if (!spec.C || !spec.blocks.empty()) throw InvalidProblemError("three_op takes A, B and C");
                auto c = build_forward(*spec.C);
                if (c.domain_dim() != spec.dim) throw InvalidProblemError("C acts on the wrong space");
                if (!c.cocoercive_beta()) throw InvalidProblemError("C must be cocoercive");
                inst.ops = OperatorSet<DenseVector>{std::move(a), std::move(b), std::move(c)};
                break;
            }
            case ProblemKind::composite: {
                if (spec.C) throw InvalidProblemError("composite problems take no C");
                std::vector<DualBlock> blocks;
                for (const auto& bs : spec.blocks)
                    blocks.push_back(DualBlock{build_resolvent(bs.A), build_forward(bs.Binv),
                                               LinearMap(Matrix::from_rows(bs.L)), std::nullopt});
                CompositeProblem cp{std::move(a), std::move(b), std::move(blocks)};
                cp.validate();
                for (auto d : cp.dual_dims()) solution_dim += d;
                inst.composite = std::move(cp);
                break;
            }
        }
        if (spec.x0 && spec.x0->size() != solution_dim) throw InvalidProblemError("x0 has wrong dimension");
        if (spec.known_solution && spec.known_solution->size() != solution_dim)
            throw InvalidProblemError("known_solution has wrong dimension");
        return inst;
    } catch (const InvalidProblemError& e) {
        throw InvalidProblemError(ctx + e.what());
    } catch (const Error& e) {
        throw InvalidProblemError(ctx + e.what());
    }
}

/// Starting point: spec.x0 or the origin, on H or on the product space.
inline DenseVector initial_point(const ProblemInstance& inst) {
    std::size_t n = inst.spec.dim;
    if (inst.composite)
        for (auto d : inst.composite->dual_dims()) n += d;
    return inst.spec.x0 ? DenseVector(*inst.spec.x0) : DenseVector(n);
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                                const std::string& where) {
    if (!j.is_object()) throw InvalidProblemError(where + ": expected a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        if (!ok.count(key)) throw InvalidProblemError(where + ": unknown key '" + key + "'");
}

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline ResolventSpec resolvent_from_json(const nlohmann::json& j, const std::string& where) {
    reject_unknown_keys(j, {"type", "dim", "lambda", "lo", "hi", "Q", "c"}, where);
    ResolventSpec s;
    s.type = j.at("type").get<std::string>();
    read_if(j, "dim", s.dim);
    read_if(j, "lambda", s.lambda);
    read_if(j, "lo", s.lo);
    read_if(j, "hi", s.hi);
    read_if(j, "Q", s.Q);
    read_if(j, "c", s.c);
    return s;
}

inline nlohmann::json resolvent_to_json(const ResolventSpec& s) {
    nlohmann::json j{{"type", s.type}};
    if (s.type == "zero" || s.type == "l1") j["dim"] = s.dim;
    if (s.type == "l1") j["lambda"] = s.lambda;
    if (s.type == "box") {
        j["lo"] = s.lo;
        j["hi"] = s.hi;
    }
    if (s.type == "quadratic") {
        j["Q"] = s.Q;
        j["c"] = s.c;
    }
    return j;
}

inline ForwardSpec forward_from_json(const nlohmann::json& j, const std::string& where) {
    reject_unknown_keys(j, {"type", "dim", "matrix", "offset", "cocoercive"}, where);
    ForwardSpec s;
    s.type = j.at("type").get<std::string>();
    read_if(j, "dim", s.dim);
    read_if(j, "matrix", s.matrix);
    read_if(j, "offset", s.offset);
    read_if(j, "cocoercive", s.cocoercive);
    return s;
}

inline nlohmann::json forward_to_json(const ForwardSpec& s) {
    nlohmann::json j{{"type", s.type}};
    if (s.type == "zero") j["dim"] = s.dim;
    if (s.type == "affine" || s.type == "skew") j["matrix"] = s.matrix;
    if (s.type == "affine") {
        j["offset"] = s.offset;
        j["cocoercive"] = s.cocoercive;
    }
    return j;
}

} // namespace detail

inline ProblemSpec problem_from_json(const nlohmann::json& j) {
    try {
        detail::reject_unknown_keys(j, {"name", "kind", "dim", "A", "B", "C", "blocks", "x0", "known_solution", "seed"},
                                    "problem");
        ProblemSpec s;
        s.name = j.value("name", std::string("custom"));
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "two_op") s.kind = ProblemKind::two_op;
        else if (kind == "three_op") s.kind = ProblemKind::three_op;
        else if (kind == "composite") s.kind = ProblemKind::composite;
        else throw InvalidProblemError("problem: unknown kind '" + kind + "'");
        s.dim = j.at("dim").get<std::size_t>();
        s.A = detail::resolvent_from_json(j.at("A"), "A");
        if (j.contains("B")) s.B = detail::forward_from_json(j.at("B"), "B");
        if (j.contains("C")) s.C = detail::forward_from_json(j.at("C"), "C");
        if (j.contains("blocks")) {
            for (const auto& bj : j.at("blocks")) {
                detail::reject_unknown_keys(bj, {"A", "Binv", "L"}, "block");
                s.blocks.push_back(DualBlockSpec{detail::resolvent_from_json(bj.at("A"), "block.A"),
                                                 detail::forward_from_json(bj.at("Binv"), "block.Binv"),
                                                 bj.at("L").get<Rows>()});
            }
        }
        if (j.contains("x0")) s.x0 = j.at("x0").get<std::vector<double>>();
        if (j.contains("known_solution")) s.known_solution = j.at("known_solution").get<std::vector<double>>();
        if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidProblemError(std::string("problem JSON: ") + e.what());
    }
}

inline nlohmann::json problem_to_json(const ProblemSpec& s) {
    nlohmann::json j{{"name", s.name}, {"kind", to_string(s.kind)}, {"dim", s.dim},
                     {"A", detail::resolvent_to_json(s.A)}};
    if (s.B) j["B"] = detail::forward_to_json(*s.B);
    if (s.C) j["C"] = detail::forward_to_json(*s.C);
    if (!s.blocks.empty()) {
        auto arr = nlohmann::json::array();
        for (const auto& b : s.blocks)
            arr.push_back({{"A", detail::resolvent_to_json(b.A)}, {"Binv", detail::forward_to_json(b.Binv)}, {"L", b.L}});
        j["blocks"] = std::move(arr);
    }
    if (s.x0) j["x0"] = *s.x0;
    if (s.known_solution) j["known_solution"] = *s.known_solution;
    if (s.seed) j["seed"] = *s.seed;
    return j;
}

} // namespace monosplit::bench
